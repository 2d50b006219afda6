#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace bgp {

/// Training data with inputs mapped into the unit cube and standardized outputs.
///
/// `X` and `y` are what the surrogate sees; `input_lo`/`input_hi` and
/// `y_mean`/`y_std` carry the affine maps back to the caller's units.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd input_lo;
  Eigen::VectorXd input_hi;
  double y_mean = 0.0;
  double y_std = 1.0;

  int size() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }

  static Dataset empty(int d) {
    Dataset ds;
    ds.X.resize(0, d);
    ds.y.resize(0);
    ds.input_lo = Eigen::VectorXd::Zero(d);
    ds.input_hi = Eigen::VectorXd::Ones(d);
    return ds;
  }

  /// Normalizes raw inputs from [lo, hi] and standardizes raw outputs.
  static Dataset from_raw(const Eigen::MatrixXd& X_raw, const Eigen::VectorXd& y_raw,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (X_raw.rows() != y_raw.size()) {
      throw DimensionMismatch("from_raw: " + std::to_string(X_raw.rows()) + " inputs vs " +
                              std::to_string(y_raw.size()) + " outputs");
    }
    if (lo.size() != X_raw.cols() || hi.size() != X_raw.cols()) {
      throw DimensionMismatch("from_raw: bounds do not match input dimension");
    }
    if (((hi - lo).array() <= 0.0).any()) {
      throw InvalidArgument("from_raw: every input range must have hi > lo");
    }
    Dataset ds;
    ds.input_lo = lo;
    ds.input_hi = hi;
    ds.X = (X_raw.rowwise() - lo.transpose()).array().rowwise() / (hi - lo).transpose().array();
    ds.X = ds.X.cwiseMax(0.0).cwiseMin(1.0);
    ds.set_outputs(y_raw);
    return ds;
  }

  /// Inputs already in [0,1]^d; outputs standardized.
  static Dataset from_unit(const Eigen::MatrixXd& X_unit, const Eigen::VectorXd& y_raw) {
    const Eigen::Index d = X_unit.cols();
    return from_raw(X_unit, y_raw, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
  }

  /// Inputs in [0,1]^d and outputs used verbatim (identity output transform).
  static Dataset unstandardized(const Eigen::MatrixXd& X_unit, const Eigen::VectorXd& y) {
    if (X_unit.rows() != y.size()) throw DimensionMismatch("unstandardized: row count mismatch");
    Dataset ds = empty(static_cast<int>(X_unit.cols()));
    ds.X = X_unit;
    ds.y = y;
    ds.validate();
    return ds;
  }

  double standardize(double y_raw) const { return (y_raw - y_mean) / y_std; }
  double unstandardize(double y_s) const { return y_mean + y_std * y_s; }

  Eigen::MatrixXd raw_inputs() const {
    return (X.array().rowwise() * (input_hi - input_lo).transpose().array()).rowwise() +
           input_lo.transpose().array();
  }
  Eigen::VectorXd raw_outputs() const {
    return (y.array() * y_std + y_mean).matrix();
  }

  void validate() const {
    if (X.rows() != y.size()) throw DimensionMismatch("dataset: X and y row counts differ");
    if (X.size() > 0 && ((X.array() < 0.0).any() || (X.array() > 1.0).any())) {
      throw InvalidArgument("dataset: inputs must lie in [0,1]^d");
    }
    if (!(y_std > 0.0)) throw InvalidArgument("dataset: y_std must be positive");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("dataset: non-finite values");
  }

 private:
  void set_outputs(const Eigen::VectorXd& y_raw) {
    const Eigen::Index n = y_raw.size();
    y_mean = n > 0 ? y_raw.mean() : 0.0;
    double var = 0.0;
    if (n > 1) var = (y_raw.array() - y_mean).square().sum() / static_cast<double>(n - 1);
    y_std = var > 0.0 ? std::sqrt(var) : 1.0;
    y = ((y_raw.array() - y_mean) / y_std).matrix();
    validate();
  }
};

}  // namespace bgp
