#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cqms {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double rms_residual = 0;
};

/// Ordinary least squares y ~ slope * x + intercept. Needs >= 2 distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

enum class GrowthKind { Polynomial, Exponential, FiniteGroupLike };

std::string to_string(GrowthKind k);

struct GrowthFit {
  GrowthKind kind = GrowthKind::Polynomial;
  /// Slope of log|B_n| against log n.
  double exponent = 0;
  double exponent_residual = 0;
  /// Slope of log|B_n| against n.
  double rate = 0;
  double rate_residual = 0;
  std::uint64_t window_lo = 0;
  std::uint64_t window_hi = 0;
};

struct GrowthWindow {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

/// Default window: drop the first quarter of the radii.
GrowthWindow default_growth_window(std::uint64_t n_max);

/// Classifies growth of exact ball counts (n, |B_n|) over a window of >= 5
/// radii. Exponential when the log-linear slope exceeds `exp_threshold` and
/// the log-linear model fits better than the log-log one.
GrowthFit fit_growth(std::span<const std::pair<std::uint64_t, std::uint64_t>> counts,
                     GrowthWindow window, double exp_threshold = 0.1);

}  // namespace cqms
