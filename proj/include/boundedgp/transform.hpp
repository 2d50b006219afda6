#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace bgp {

enum class TransformKind { identity, square_root, sinusoidal, sigmoid };

inline std::string_view to_string(TransformKind k) {
  switch (k) {
    case TransformKind::identity: return "identity";
    case TransformKind::square_root: return "square-root";
    case TransformKind::sinusoidal: return "sinusoidal";
    case TransformKind::sigmoid: return "sigmoid";
  }
  return "unknown";
}

/// Clamp applied to radicands and normalized ratios of data violating the bounds.
inline constexpr double kTransformClamp = 1e-9;

/// Output warping f = F(h) between a latent GP h and the objective f.
struct TransformSpec {
  TransformKind kind = TransformKind::identity;
  double f_plus = 0.0;
  double f_minus = 0.0;
  double eta_plus_sq = 0.0;  // square-root kind only

  static TransformSpec identity() { return {}; }
  static TransformSpec square_root(double f_plus, double eta_plus_sq) {
    TransformSpec s{TransformKind::square_root, f_plus, 0.0, eta_plus_sq};
    s.validate();
    return s;
  }
  static TransformSpec sinusoidal(double f_plus, double f_minus) {
    TransformSpec s{TransformKind::sinusoidal, f_plus, f_minus, 0.0};
    s.validate();
    return s;
  }
  static TransformSpec sigmoid(double f_plus, double f_minus) {
    TransformSpec s{TransformKind::sigmoid, f_plus, f_minus, 0.0};
    s.validate();
    return s;
  }

  void validate() const {
    switch (kind) {
      case TransformKind::identity: return;
      case TransformKind::square_root:
        if (!std::isfinite(f_plus)) throw InvalidArgument("square-root transform needs a finite f_plus");
        if (!(eta_plus_sq >= 0.0)) throw InvalidArgument("square-root transform needs eta_plus_sq >= 0");
        return;
      case TransformKind::sinusoidal:
      case TransformKind::sigmoid:
        if (!(f_plus > f_minus)) throw InvalidArgument("bounded transform needs f_plus > f_minus");
        return;
    }
  }

  /// Apex of the square-root parabola, f_plus + 2 * eta_plus.
  double ceiling() const { return f_plus + 2.0 * std::sqrt(eta_plus_sq); }

  /// Latent value for an observation; `clamped` is set when the input had to be clipped.
  double to_h(double y, bool* clamped = nullptr) const {
    bool c = false;
    double h = y;
    switch (kind) {
      case TransformKind::identity: break;
      case TransformKind::square_root: {
        double r = 2.0 * (ceiling() - y);
        if (r < 0.0) {
          r = kTransformClamp;
          c = true;
        }
        h = std::sqrt(r);
        break;
      }
      case TransformKind::sinusoidal: {
        double a = 2.0 * ((y - f_minus) / (f_plus - f_minus) - 0.5);
        const double lim = 1.0 - kTransformClamp;
        if (a > lim || a < -lim) {
          a = std::clamp(a, -lim, lim);
          c = true;
        }
        h = std::asin(a);
        break;
      }
      case TransformKind::sigmoid: {
        double r = (y - f_minus) / (f_plus - f_minus);
        if (r < kTransformClamp || r > 1.0 - kTransformClamp) {
          r = std::clamp(r, kTransformClamp, 1.0 - kTransformClamp);
          c = true;
        }
        h = std::log(r / (1.0 - r));
        break;
      }
    }
    if (clamped) *clamped = c;
    return h;
  }

  double from_h(double h) const {
    switch (kind) {
      case TransformKind::identity: return h;
      case TransformKind::square_root: return ceiling() - 0.5 * h * h;
      case TransformKind::sinusoidal: return f_minus + (f_plus - f_minus) * (0.5 * std::sin(h) + 0.5);
      case TransformKind::sigmoid: return f_minus + (f_plus - f_minus) / (1.0 + std::exp(-h));
    }
    return h;
  }

  /// dF/dh.
  double from_h_derivative(double h) const {
    switch (kind) {
      case TransformKind::identity: return 1.0;
      case TransformKind::square_root: return -h;
      case TransformKind::sinusoidal: return (f_plus - f_minus) * 0.5 * std::cos(h);
      case TransformKind::sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-h));
        return (f_plus - f_minus) * s * (1.0 - s);
      }
    }
    return 1.0;
  }
};

}  // namespace bgp
