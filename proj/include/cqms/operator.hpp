#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cqms/algebra.hpp"

namespace cqms {

/// A finitely supported vector of l^2(G); it shares the sparse map
/// representation of the algebra (lambda(f) delta_e is f itself).
template <class S>
using BasicFinVector = BasicAlgebraElement<S>;
using FinVector = AlgebraElement;
using ExactFinVector = ExactAlgebraElement;

/// lambda(f) v = sum_g a_g (left translate of v by g)
template <class S>
BasicFinVector<S> apply_regular(const BasicAlgebraElement<S>& f, const BasicFinVector<S>& v) {
  return convolve(f, v);
}

/// Delta^k(f) v = sum_{g,h} a_g v(h) (l(gh) - l(h))^k delta_{gh}
template <class S>
BasicFinVector<S> apply_delta(const BasicAlgebraElement<S>& f, unsigned k, const BasicFinVector<S>& v,
                              const WordMetric& metric) {
  f.require_same(v);
  if (k == 0) return apply_regular(f, v);
  const auto& grp = *f.group();
  BasicFinVector<S> out(f.group());
  for (const auto& [h, b] : v.terms()) {
    const auto lh = static_cast<std::int64_t>(metric.length(h));
    for (const auto& [g, a] : f.terms()) {
      const GroupElement gh = grp.multiply(g, h);
      const std::int64_t jump = static_cast<std::int64_t>(metric.length(gh)) - lh;
      if (jump == 0) continue;
      std::int64_t w = 1;
      for (unsigned i = 0; i < k; ++i) w *= jump;
      out.add(gh, a * b * detail::scalar_from_int<S>(w));
    }
  }
  return out;
}

struct LeibnizOptions {
  /// Cap on the number of compositions r_1 + ... + r_n = k.
  std::uint64_t max_compositions = 100'000;
};

struct LeibnizResult {
  /// max over test vectors of ||LHS v - RHS v||_2
  double max_deviation = 0;
  /// every difference vector was identically zero (meaningful in exact mode)
  bool exact_zero = true;
  std::uint64_t compositions = 0;
  std::size_t vectors = 0;
};

/// Number of compositions of k into n nonnegative parts, C(k+n-1, n-1).
BigInt composition_count(unsigned n, unsigned k);

/// Compares Delta^k(f_1 ... f_n) v with
///   sum_{r_1+...+r_n=k} (k; r_1..r_n) Delta^{r_1}(f_1) ... Delta^{r_n}(f_n) v
/// on every test vector. Products are applied right to left; suffix products
/// are shared between compositions with a common tail.
template <class S>
LeibnizResult verify_leibniz(const std::vector<BasicAlgebraElement<S>>& fs, unsigned k,
                             const std::vector<BasicFinVector<S>>& test_vectors, const WordMetric& metric,
                             const LeibnizOptions& opt = {}) {
  if (fs.empty()) throw ParameterError("verify_leibniz needs at least one factor");
  if (k == 0) throw ParameterError("verify_leibniz needs k >= 1");
  const BigInt count = composition_count(static_cast<unsigned>(fs.size()), k);
  if (count > opt.max_compositions)
    throw ResourceError("Leibniz expansion has " + count.str() + " compositions, above the cap", 0);

  BasicAlgebraElement<S> product = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) product = convolve(product, fs[i]);

  std::vector<BigInt> factorial(k + 1, BigInt(1));
  for (unsigned i = 1; i <= k; ++i) factorial[i] = factorial[i - 1] * i;

  LeibnizResult res;
  res.compositions = static_cast<std::uint64_t>(count);
  const std::size_t n = fs.size();
  for (const auto& v : test_vectors) {
    product.require_same(v);
    const auto lhs = apply_delta(product, k, v, metric);
    BasicFinVector<S> rhs(v.group());
    // parts[i] = r_i; suffix = Delta^{r_i}(f_i) ... Delta^{r_n}(f_n) v
    std::vector<unsigned> parts(n, 0);
    auto expand = [&](auto&& self, std::size_t i, unsigned remaining, const BasicFinVector<S>& suffix) -> void {
      if (i == 0) {
        parts[0] = remaining;
        BigInt coef = factorial[k];
        for (unsigned r : parts) coef /= factorial[r];
        auto term = apply_delta(fs[0], remaining, suffix, metric);
        if constexpr (std::is_same_v<S, ComplexRational>)
          rhs += term.scaled(ComplexRational(Rational(coef)));
        else
          rhs += term.scaled(S(static_cast<double>(coef)));
        return;
      }
      for (unsigned r = 0; r <= remaining; ++r) {
        parts[i] = r;
        self(self, i - 1, remaining - r, apply_delta(fs[i], r, suffix, metric));
      }
    };
    expand(expand, n - 1, k, v);
    const auto diff = lhs - rhs;
    if (!diff.empty()) res.exact_zero = false;
    double dev = 0;
    if constexpr (std::is_same_v<S, ComplexRational>) {
      Rational sq = 0;
      for (const auto& [g, c] : diff.terms()) sq += norm_squared(c);
      dev = std::sqrt(static_cast<double>(sq));
    } else {
      dev = diff.l2_norm();
    }
    res.max_deviation = std::max(res.max_deviation, dev);
    ++res.vectors;
  }
  return res;
}

/// Matrix of lambda(f) (k = 0) or Delta^k(f) between the ball B_N and the
/// ball B_{N + max length in supp f}. Rows are the codomain elements that
/// actually receive mass, in normal-form order.
struct CompressedOperator {
  std::uint64_t domain_radius = 0;
  std::uint64_t codomain_radius = 0;
  unsigned k = 0;
  std::string provenance;
  std::vector<GroupElement> domain;
  std::vector<GroupElement> codomain;
  Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor> matrix;

  /// "row col re im" per entry, 0-based, after a two-line header.
  void write_coordinate(std::ostream& out) const;
};

CompressedOperator compress(const AlgebraElement& f, unsigned k, std::uint64_t n, const WordMetric& metric);

enum class GramSolver {
  /// Thick-restarted Lanczos on A*A (basis of 20, 5 Ritz vectors kept).
  Lanczos,
  /// Plain power iteration on A*A.
  Power,
};

struct PowerIterationOptions {
  /// Relative accuracy of the top eigenvalue of A*A (eigen-residual test).
  double tolerance = 1e-8;
  /// Cap on applications of A*A.
  std::uint64_t max_iterations = 10'000;
  GramSolver solver = GramSolver::Lanczos;
};

struct NormLowerBound {
  /// Certified lower bound for the operator norm: max(power, column, carried).
  double value = 0;
  /// Largest ||A x|| / ||x|| over the probe vectors (Ritz vector on convergence).
  double power_estimate = 0;
  /// Largest column norm of the compression.
  double max_column_norm = 0;
  std::uint64_t iterations = 0;
  bool converged = false;
  /// "converged" or "unconverged-lower-bound-still-valid"
  std::string status;
};

/// Largest singular value estimate of the compression from the top eigenpair
/// of A*A, started at the normalized all-ones vector (or at `start` when
/// given, a vector indexed like op.domain). The reported value is ||A y|| for
/// an explicit unit vector y, so it stays a lower bound when the solver stops
/// early. On return `*final_vector` holds y.
NormLowerBound compressed_norm_lower(const CompressedOperator& op, const PowerIterationOptions& opt = {},
                                     const Eigen::VectorXcd* start = nullptr,
                                     Eigen::VectorXcd* final_vector = nullptr);

NormLowerBound compressed_norm_lower(const AlgebraElement& f, unsigned k, std::uint64_t n, const WordMetric& metric,
                                     const PowerIterationOptions& opt = {});

/// Compressions over an increasing schedule. Each power iteration after the
/// first starts from the previous iterate, and each reported value is at least
/// the previous one (a compression of B_N is a compression of B_N' for N <= N').
std::vector<NormLowerBound> compressed_norm_schedule(const AlgebraElement& f, unsigned k,
                                                     const std::vector<std::uint64_t>& schedule,
                                                     const WordMetric& metric, const PowerIterationOptions& opt = {});

struct Bound {
  double value = 0;
  std::string method;
};

struct SeminormEstimate {
  unsigned k = 0;
  Bound lower;
  Bound upper;
  double weighted_l2 = 0;
  std::vector<std::pair<std::uint64_t, NormLowerBound>> compressions;
};

/// lower = max(weighted_l2, compressions), upper = weighted_l1. A lower value
/// pushed above the upper bound by rounding is pulled back to it.
SeminormEstimate seminorm_sandwich(const AlgebraElement& f, unsigned k, const std::vector<std::uint64_t>& schedule,
                                   const WordMetric& metric, const PowerIterationOptions& opt = {});

struct DftBounds {
  double lower = 0;
  double upper = 0;
  std::vector<double> argmax;
  std::uint64_t grid_density = 0;
};

/// Bounds on ||f||_red = sup_theta |sum_v a_v e^{2 pi i <v, theta>}| for f on
/// Z^d, from a uniform grid of `grid_density` points per axis. The upper bound
/// adds the gradient bound 2 pi sum ||v||_2 |a_v| times the half grid diagonal.
DftBounds dft_norm_oracle(const AlgebraElement& f, std::uint64_t grid_density);

/// Smallest n >= 1 with 2^p C n^(p - k) <= delta, i.e. ceil((2^p C / delta)^(1/(k-p))).
std::uint64_t tail_truncation_radius(double k, double p, double c_hat, double delta);

struct AdInequalityResult {
  bool passed = false;
  double lhs = 0;
  double rhs = 0;
};

/// lower(Ad_h f, k) <= sum_j C(k,j) (2 l(h))^(k-j) upper(f, j)
AdInequalityResult ad_inequality_check(const GroupElement& h, const AlgebraElement& f, unsigned k,
                                       const std::vector<std::uint64_t>& schedule, const WordMetric& metric,
                                       const PowerIterationOptions& opt = {});

}  // namespace cqms
