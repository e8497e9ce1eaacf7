#include "cqms/growth.hpp"

#include <cmath>

#include "cqms/errors.hpp"

namespace cqms {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("line fit needs >= 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw ParameterError("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

std::string to_string(GrowthKind k) {
  switch (k) {
    case GrowthKind::Polynomial:
      return "polynomial";
    case GrowthKind::Exponential:
      return "exponential";
    case GrowthKind::FiniteGroupLike:
      return "finite-group-like";
  }
  return "?";
}

GrowthWindow default_growth_window(std::uint64_t n_max) {
  return {std::max<std::uint64_t>(1, n_max / 4), n_max};
}

GrowthFit fit_growth(std::span<const std::pair<std::uint64_t, std::uint64_t>> counts,
                     GrowthWindow window, double exp_threshold) {
  std::vector<double> logn, n, logb;
  for (const auto& [r, b] : counts) {
    if (r < window.lo || r > window.hi) continue;
    if (r == 0) throw ParameterError("growth window must start at n >= 1");
    n.push_back(static_cast<double>(r));
    logn.push_back(std::log(static_cast<double>(r)));
    logb.push_back(std::log(static_cast<double>(b)));
  }
  if (n.size() < 5) throw ParameterError("growth window needs at least 5 radii");
  GrowthFit fit;
  fit.window_lo = window.lo;
  fit.window_hi = window.hi;
  if (logb.front() == logb.back()) {
    fit.kind = GrowthKind::FiniteGroupLike;
    return fit;
  }
  const LineFit poly = fit_line(logn, logb);
  const LineFit expo = fit_line(n, logb);
  fit.exponent = poly.slope;
  fit.exponent_residual = poly.rms_residual;
  fit.rate = expo.slope;
  fit.rate_residual = expo.rms_residual;
  fit.kind = expo.slope > exp_threshold && expo.rms_residual < poly.rms_residual
                 ? GrowthKind::Exponential
                 : GrowthKind::Polynomial;
  return fit;
}

}  // namespace cqms
