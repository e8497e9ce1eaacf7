#include "cqms/dimension.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

#include "cqms/growth.hpp"

namespace cqms {

DimensionEstimate dimension_estimate(const Eigen::MatrixXcd& vectors, double delta) {
  if (!(delta > 0)) throw ParameterError("dimension estimate needs delta > 0");
  DimensionEstimate est;
  est.delta = delta;
  const Eigen::Index m = vectors.cols();
  if (m == 0 || vectors.rows() == 0) {
    est.lower_method = "span-trivial";
    est.upper_method = "span-dimension";
    return est;
  }

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(vectors);
  const Eigen::VectorXd sigma = svd.singularValues();
  const double tiny = 1e-12 * std::max(1.0, sigma(0));
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tiny) ++est.span_dimension;
  // sigma_{r+1} < delta, with the comparison widened against rounding in sigma
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(sigma.size()) &&
         !(sigma(static_cast<Eigen::Index>(r)) * (1 + 1e-12) + 1e-14 < delta))
    ++r;
  est.upper = r;
  est.upper_method = r == est.span_dimension ? "span-dimension" : "svd-threshold";

  // greedy orthonormal subset, in column order
  std::vector<Eigen::Index> chosen;
  bool has_long = false;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double n = vectors.col(j).norm();
    if (n >= delta) has_long = true;
    if (std::abs(n - 1.0) > 1e-12) continue;
    bool orthogonal = true;
    for (auto c : chosen)
      if (std::abs(vectors.col(c).dot(vectors.col(j))) > 1e-12) {
        orthogonal = false;
        break;
      }
    if (orthogonal) chosen.push_back(j);
  }
  est.orthonormal_subset = chosen.size();
  const double voiculescu = (1.0 - delta * delta) * static_cast<double>(chosen.size());
  est.lower = voiculescu > 0 ? static_cast<std::size_t>(std::ceil(voiculescu - 1e-9)) : 0;
  est.lower_method = "voiculescu-orthonormal";
  if (est.lower == 0 && has_long) {
    est.lower = 1;
    est.lower_method = "span-trivial";
  }
  return est;
}

Eigen::MatrixXcd embed_vectors(const std::vector<FinVector>& vectors) {
  std::vector<GroupElement> basis;
  for (const auto& v : vectors)
    for (const auto& [g, c] : v.terms()) basis.push_back(g);
  std::sort(basis.begin(), basis.end());
  basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()),
                                                static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j)
    for (const auto& [g, c] : vectors[j].terms()) {
      const auto row = std::lower_bound(basis.begin(), basis.end(), g) - basis.begin();
      out(row, static_cast<Eigen::Index>(j)) = c;
    }
  return out;
}

namespace {

double log_big(const BigInt& n) {
  // log of an arbitrary-size positive integer
  const std::size_t bits = boost::multiprecision::msb(n) + 1;
  if (bits < 1000) return std::log(static_cast<double>(n));
  const std::size_t shift = bits - 60;
  return std::log(static_cast<double>(BigInt(n >> shift))) + static_cast<double>(shift) * std::log(2.0);
}

}  // namespace

MdimEstimate mdim_slope_estimate(const WordMetric& metric, unsigned k, std::vector<double> delta_grid,
                                 const MdimOptions& options) {
  if (k == 0) throw ParameterError("mdim needs k >= 1");
  const auto& r = options.growth_exponent;
  if (r && !(static_cast<double>(k) > *r)) throw ParameterError("mdim needs k above the growth exponent");
  if (delta_grid.size() < 5) throw ParameterError("delta grid needs at least 5 points");
  for (double d : delta_grid)
    if (!(d > 0 && d < 1)) throw ParameterError("delta grid must lie in (0, 1)");
  std::sort(delta_grid.begin(), delta_grid.end(), std::greater<>());
  if (delta_grid.front() / delta_grid.back() < 100 * (1 - 1e-9))
    throw ParameterError("delta grid must span at least two decades");

  MdimEstimate est;
  est.k = k;
  est.bracket_lower = 1.0 / k;
  if (r) {
    est.bracket_upper = 2 * *r / (2 * k - *r);
    est.rapid_decay_order = options.rapid_decay_order.value_or((*r / 2 + k) / 2.0);
  }
  std::vector<double> x, ylo, yup;
  for (double delta : delta_grid) {
    MdimPoint p;
    p.delta = delta;
    // floor with a guard against pow landing just under an integer
    p.lower_radius = static_cast<std::uint64_t>(std::floor(std::pow(delta, -1.0 / k) + 1e-9));
    p.lower_log = std::log(0.75) + log_big(metric.ball_count(p.lower_radius));
    if (r && options.c_hat) {
      p.upper_radius = tail_truncation_radius(k, *est.rapid_decay_order, *options.c_hat, delta);
      p.upper_log = log_big(metric.ball_count(*p.upper_radius));
      yup.push_back(*p.upper_log);
    }
    x.push_back(std::log(1.0 / delta));
    ylo.push_back(p.lower_log);
    est.points.push_back(p);
  }
  const LineFit lo = fit_line(x, ylo);
  est.lower_slope = lo.slope;
  est.lower_residual = lo.rms_residual;
  if (!yup.empty()) est.upper_slope = fit_line(x, yup).slope;

  const std::size_t half = (x.size() + 1) / 2;
  auto slope_on = [&](std::size_t a, std::size_t b) {
    return fit_line(std::span<const double>(x).subspan(a, b - a), std::span<const double>(ylo).subspan(a, b - a))
        .slope;
  };
  est.first_half_slope = slope_on(0, half);
  est.second_half_slope = slope_on(x.size() - half, x.size());
  est.infinite_signature = est.second_half_slope > options.divergence_ratio * est.first_half_slope;
  return est;
}

RapidDecayConstant estimate_rapid_decay_constant(const WordMetric& metric, double order, std::size_t samples,
                                                 std::uint64_t radius, std::mt19937_64& rng) {
  const auto& group = metric.group();
  const Ball ball = metric.ball(radius);
  const bool abelian = group->kind() == GroupKind::FreeAbelian && group->rank() <= 2;
  RapidDecayConstant out;
  out.order = order;
  out.norm_method = abelian ? "dft-upper" : "l1";
  for (std::size_t i = 0; i < samples; ++i) {
    const AlgebraElement f = to_float(sample_element<ComplexRational>(group, ball, rng));
    double norm = weighted_l1(f, 0, metric);
    if (abelian) norm = std::min(norm, dft_norm_oracle(f, group->rank() == 1 ? 1024 : 128).upper);
    out.c_hat = std::max(out.c_hat, rapid_decay_ratio(f, order, norm, metric));
    ++out.samples;
  }
  return out;
}

nlohmann::json to_json(const DimensionEstimate& e) {
  return {{"delta", e.delta},
          {"lower", {{"value", e.lower}, {"method", e.lower_method}}},
          {"upper", {{"value", e.upper}, {"method", e.upper_method}}},
          {"span_dimension", e.span_dimension},
          {"orthonormal_subset", e.orthonormal_subset}};
}

nlohmann::json to_json(const MdimEstimate& e) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : e.points) {
    nlohmann::json j{{"delta", p.delta}, {"lower_radius", p.lower_radius}, {"lower_log", p.lower_log}};
    if (p.upper_radius) {
      j["upper_radius"] = *p.upper_radius;
      j["upper_log"] = *p.upper_log;
    }
    pts.push_back(j);
  }
  nlohmann::json j{{"k", e.k},
                   {"points", pts},
                   {"lower_slope", {{"value", e.lower_slope}, {"certificate", "voiculescu: D >= (3/4)|U_delta|"}}},
                   {"lower_residual", e.lower_residual},
                   {"bracket_lower", e.bracket_lower},
                   {"first_half_slope", e.first_half_slope},
                   {"second_half_slope", e.second_half_slope},
                   {"infinite_signature", e.infinite_signature}};
  if (e.upper_slope)
    j["upper_slope"] = {{"value", *e.upper_slope},
                        {"certificate", "tail truncation with empirical C_hat, p = " +
                                            std::to_string(*e.rapid_decay_order)}};
  if (e.bracket_upper) j["bracket_upper"] = *e.bracket_upper;
  return j;
}

}  // namespace cqms
