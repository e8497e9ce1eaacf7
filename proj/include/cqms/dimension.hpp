#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cqms/operator.hpp"

namespace cqms {

struct DimensionEstimate {
  double delta = 0;
  std::size_t lower = 0;
  std::string lower_method;
  std::size_t upper = 0;
  std::string upper_method;
  /// Numerical rank of the vector set.
  std::size_t span_dimension = 0;
  /// Size of the orthonormal subset behind the lower bound.
  std::size_t orthonormal_subset = 0;
};

/// Bracket for D(Y, delta), Y the columns of `vectors`.
///   upper: min r with sigma_{r+1} < delta (projection onto the top r left
///          singular vectors moves every column by at most sigma_{r+1})
///   lower: ceil((1 - delta^2) m) for a greedily found orthonormal subset of
///          size m, and at least 1 if some column has norm >= delta
DimensionEstimate dimension_estimate(const Eigen::MatrixXcd& vectors, double delta);

/// Columns are the vectors, rows the union of their supports in normal-form order.
Eigen::MatrixXcd embed_vectors(const std::vector<FinVector>& vectors);

struct MdimPoint {
  double delta = 0;
  std::uint64_t lower_radius = 0;  // floor(delta^{-1/k})
  double lower_log = 0;            // log((3/4)|B_radius|)
  std::optional<std::uint64_t> upper_radius;  // n0(delta)
  std::optional<double> upper_log;            // log|B_n0|
};

struct MdimOptions {
  /// Declared polynomial growth exponent r; absent for groups of exponential growth.
  std::optional<double> growth_exponent;
  /// Rapid-decay order p used by the truncation radius; default (r/2 + k)/2.
  std::optional<double> rapid_decay_order;
  /// Empirical rapid-decay constant; the upper slope is produced only when present.
  std::optional<double> c_hat;
  /// Second-half slope above this multiple of the first-half slope flags infinite Mdim.
  double divergence_ratio = 1.5;
};

struct MdimEstimate {
  unsigned k = 0;
  std::vector<MdimPoint> points;
  double lower_slope = 0;
  double lower_residual = 0;
  std::optional<double> upper_slope;
  std::optional<double> rapid_decay_order;
  /// [1/k, 2r/(2k - r)] when r is declared
  double bracket_lower = 0;
  std::optional<double> bracket_upper;
  double first_half_slope = 0;
  double second_half_slope = 0;
  bool infinite_signature = false;
};

/// Slope estimates of log D against log(1/delta) from exact ball counts.
MdimEstimate mdim_slope_estimate(const WordMetric& metric, unsigned k, std::vector<double> delta_grid,
                                 const MdimOptions& options = {});

nlohmann::json to_json(const DimensionEstimate& e);
nlohmann::json to_json(const MdimEstimate& e);

}  // namespace cqms

namespace cqms {

struct RapidDecayConstant {
  double c_hat = 0;
  double order = 0;
  std::size_t samples = 0;
  /// "dft-upper" on Z^d, "l1" otherwise
  std::string norm_method;
};

/// Running max of rapid_decay_ratio over random elements supported in B_radius.
/// The reduced norm is replaced by an upper estimate, so c_hat is an empirical
/// lower estimate of the smallest valid constant.
RapidDecayConstant estimate_rapid_decay_constant(const WordMetric& metric, double order, std::size_t samples,
                                                 std::uint64_t radius, std::mt19937_64& rng);

}  // namespace cqms
