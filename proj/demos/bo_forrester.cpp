// Maximizes the (negated) Forrester function with entropy search under
// exact bounds and with random search, printing the regret traces.

#include <boundedgp/boundedgp.hpp>
#include <cstdio>

int main() {
  using namespace bgp;
  for (Acquisition acq : {Acquisition::bes, Acquisition::random}) {
    BoConfig cfg;
    cfg.function = "forrester";
    cfg.acquisition = acq;
    cfg.seed = 1;
    const BoTrace trace = run_bo(cfg);
    std::printf("%s\n", std::string(to_string(acq)).c_str());
    for (const BoRecord& r : trace.records) {
      std::printf("  t=%2d  x=%.4f  y=%8.4f  regret=%.5f  %s\n", r.t, r.x[0], r.y, r.regret, r.acquisition.c_str());
    }
  }
}
