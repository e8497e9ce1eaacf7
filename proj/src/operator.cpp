#include "cqms/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace cqms {

BigInt composition_count(unsigned n, unsigned k) {
  // C(k + n - 1, n - 1)
  BigInt c = 1;
  for (unsigned i = 1; i < n; ++i) c = c * (k + i) / i;
  return c;
}

void CompressedOperator::write_coordinate(std::ostream& out) const {
  out << "% " << provenance << " domain_radius=" << domain_radius << " codomain_radius=" << codomain_radius << "\n";
  out << matrix.rows() << " " << matrix.cols() << " " << matrix.nonZeros() << "\n";
  out.precision(17);
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r)
    for (decltype(matrix)::InnerIterator it(matrix, r); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value().real() << " " << it.value().imag() << "\n";
}

CompressedOperator compress(const AlgebraElement& f, unsigned k, std::uint64_t n, const WordMetric& metric) {
  if (!same_group(f.group(), metric.group())) throw StructuralError("element and metric on different groups");
  const auto& grp = *f.group();
  CompressedOperator op;
  op.k = k;
  op.domain_radius = n;
  op.codomain_radius = n + f.max_length(metric);
  op.provenance = k == 0 ? "lambda(f)" : "Delta^" + std::to_string(k) + "(f)";

  Ball ball = metric.ball(n);
  op.domain = std::move(ball.elements);

  struct Entry {
    GroupElement row;
    Eigen::Index col;
    std::complex<double> value;
  };
  std::vector<Entry> entries;
  entries.reserve(op.domain.size() * f.support_size());
  for (std::size_t c = 0; c < op.domain.size(); ++c) {
    const GroupElement& h = op.domain[c];
    const double lh = ball.lengths[c];
    for (const auto& [g, a] : f.terms()) {
      GroupElement gh = grp.multiply(g, h);
      std::complex<double> v = a;
      if (k > 0) {
        const double jump = static_cast<double>(metric.length(gh)) - lh;
        if (jump == 0) continue;
        v *= std::pow(jump, static_cast<double>(k));
      }
      entries.push_back({std::move(gh), static_cast<Eigen::Index>(c), v});
    }
  }
  op.codomain.reserve(entries.size());
  for (const auto& e : entries) op.codomain.push_back(e.row);
  std::sort(op.codomain.begin(), op.codomain.end());
  op.codomain.erase(std::unique(op.codomain.begin(), op.codomain.end()), op.codomain.end());
  std::unordered_map<GroupElement, Eigen::Index, GroupElementHash> row_of;
  row_of.reserve(op.codomain.size());
  for (std::size_t i = 0; i < op.codomain.size(); ++i) row_of.emplace(op.codomain[i], static_cast<Eigen::Index>(i));

  std::vector<Eigen::Triplet<std::complex<double>>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) triplets.emplace_back(row_of.at(e.row), e.col, e.value);
  op.matrix.resize(static_cast<Eigen::Index>(op.codomain.size()), static_cast<Eigen::Index>(op.domain.size()));
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

namespace {

using SparseRows = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;

// Keeps the best ||A x|| / ||x|| seen over all probe vectors.
struct Probe {
  const SparseRows& a;
  const SparseRows& adjoint;
  Eigen::VectorXcd y;
  double best = 0;
  Eigen::VectorXcd best_vector;

  // z = A*A x
  void apply(const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> z) {
    y.noalias() = a * x;
    const double xn = x.norm();
    if (xn > 0) {
      const double sigma = y.norm() / xn;
      if (sigma > best) {
        best = sigma;
        best_vector = x / xn;
      }
    }
    z.noalias() = adjoint * y;
  }
};

void power_solve(Probe& p, Eigen::VectorXcd x, const PowerIterationOptions& opt, NormLowerBound& out) {
  const auto cols = x.size();
  Eigen::VectorXcd z(cols);
  // Stop on the Gram eigen-residual |A*Ax - s^2 x| <= tol s^2. A small step
  // between iterates is not enough: near-degenerate top singular values make
  // the iteration creep while still far from the limit.
  for (out.iterations = 1; out.iterations <= opt.max_iterations; ++out.iterations) {
    p.apply(x, z);
    const double mu = x.dot(z).real();
    const double zn = z.norm();
    if (zn == 0) {
      out.converged = true;
      break;
    }
    const double residual = std::sqrt(std::max(0.0, zn * zn - mu * mu));
    if (residual <= opt.tolerance * mu) {
      out.converged = true;
      break;
    }
    x = z / zn;
  }
  out.iterations = std::min(out.iterations, opt.max_iterations);
}

void dense_solve(Probe& p, Eigen::Index cols, NormLowerBound& out) {
  const Eigen::MatrixXcd a = Eigen::MatrixXcd(p.a);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a);
  Eigen::VectorXcd z(cols);
  p.apply(es.eigenvectors().col(cols - 1), z);
  out.iterations = 1;
  out.converged = true;
}

// Thick-restarted Lanczos on A*A with full reorthogonalisation. The basis V
// and W = A*A V are kept explicitly, so the projected matrix is V*W and the
// residual of the top Ritz pair is W y - theta V y. After `basis` vectors the
// top `keep` Ritz vectors are retained. There are no random restarts: a
// vanishing residual means the span is invariant and the Ritz value is exact.
void lanczos_solve(Probe& p, const Eigen::VectorXcd& x, const PowerIterationOptions& opt, NormLowerBound& out) {
  constexpr Eigen::Index basis = 20, keep = 5;
  const Eigen::Index n = x.size();
  const Eigen::Index cap = std::min<Eigen::Index>(basis, n);
  Eigen::MatrixXcd v(n, cap), w(n, cap), h = Eigen::MatrixXcd::Zero(cap, cap);
  Eigen::VectorXcd ax(p.a.rows());
  auto apply = [&](Eigen::Index j) {
    ax.noalias() = p.a * v.col(j);
    w.col(j).noalias() = p.adjoint * ax;
  };
  v.col(0) = x;
  apply(0);
  std::uint64_t applications = 1;
  Eigen::Index size = 1;
  Eigen::VectorXcd u = x, r(n);
  while (true) {
    for (Eigen::Index i = 0; i < size; ++i) {
      h(i, size - 1) = v.col(i).dot(w.col(size - 1));
      h(size - 1, i) = std::conj(h(i, size - 1));
    }
    h(size - 1, size - 1) = h(size - 1, size - 1).real();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.topLeftCorner(size, size));
    const double theta = es.eigenvalues()[size - 1];
    const Eigen::VectorXcd y = es.eigenvectors().col(size - 1);
    u.noalias() = v.leftCols(size) * y;
    r.noalias() = w.leftCols(size) * y;
    r -= theta * u;
    if (r.norm() <= opt.tolerance * std::abs(theta)) {
      out.converged = true;
      break;
    }
    if (applications == opt.max_iterations) break;
    if (size == cap) {
      const Eigen::Index k = std::min(keep, size - 1);
      const Eigen::MatrixXcd y_keep = es.eigenvectors().rightCols(k);
      const Eigen::MatrixXcd nv = v.leftCols(size) * y_keep, nw = w.leftCols(size) * y_keep;
      v.leftCols(k) = nv;
      w.leftCols(k) = nw;
      h.setZero();
      h.topLeftCorner(k, k) = es.eigenvalues().tail(k).cast<std::complex<double>>().asDiagonal();
      size = k;
    }
    // two passes of Gram-Schmidt against the basis
    for (int pass = 0; pass < 2; ++pass) r -= v.leftCols(size) * (v.leftCols(size).adjoint() * r);
    const double rn = r.norm();
    if (rn <= 1e-14 * std::max(1.0, std::abs(theta))) {
      out.converged = true;
      break;
    }
    v.col(size) = r / rn;
    apply(size);
    ++applications;
    ++size;
  }
  out.iterations = applications;
  Eigen::VectorXcd z(n);
  p.apply(u, z);
}

}  // namespace

NormLowerBound compressed_norm_lower(const CompressedOperator& op, const PowerIterationOptions& opt,
                                     const Eigen::VectorXcd* start, Eigen::VectorXcd* final_vector) {
  NormLowerBound out;
  const auto cols = op.matrix.cols();
  if (cols == 0 || op.matrix.nonZeros() == 0) {
    out.converged = true;
    out.status = "converged";
    if (final_vector) *final_vector = Eigen::VectorXcd::Zero(cols);
    return out;
  }
  if (opt.max_iterations == 0) throw ParameterError("iteration cap must be positive");
  // column norms, from the row-major storage
  Eigen::VectorXd col_sq = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r = 0; r < op.matrix.outerSize(); ++r)
    for (SparseRows::InnerIterator it(op.matrix, r); it; ++it) col_sq[it.col()] += std::norm(it.value());
  out.max_column_norm = std::sqrt(col_sq.maxCoeff());

  Eigen::VectorXcd x = start && start->size() == cols && start->norm() > 0
                           ? Eigen::VectorXcd(*start)
                           : Eigen::VectorXcd(Eigen::VectorXcd::Ones(cols));
  x /= x.norm();
  const SparseRows adjoint = op.matrix.adjoint();
  Probe probe{op.matrix, adjoint, Eigen::VectorXcd(op.matrix.rows()), 0, x};

  if (opt.solver == GramSolver::Power)
    power_solve(probe, x, opt, out);
  else if (cols <= 24)
    dense_solve(probe, cols, out);
  else
    lanczos_solve(probe, x, opt, out);

  out.power_estimate = probe.best;
  out.status = out.converged ? "converged" : "unconverged-lower-bound-still-valid";
  out.value = std::max(out.power_estimate, out.max_column_norm);
  if (final_vector) *final_vector = probe.best_vector;
  return out;
}

NormLowerBound compressed_norm_lower(const AlgebraElement& f, unsigned k, std::uint64_t n, const WordMetric& metric,
                                     const PowerIterationOptions& opt) {
  return compressed_norm_lower(compress(f, k, n, metric), opt);
}

std::vector<NormLowerBound> compressed_norm_schedule(const AlgebraElement& f, unsigned k,
                                                     const std::vector<std::uint64_t>& schedule,
                                                     const WordMetric& metric, const PowerIterationOptions& opt) {
  if (!std::is_sorted(schedule.begin(), schedule.end()))
    throw ParameterError("truncation schedule must be nondecreasing");
  std::vector<NormLowerBound> out;
  std::vector<GroupElement> prev_domain;
  Eigen::VectorXcd prev_vec;
  for (std::uint64_t n : schedule) {
    const CompressedOperator op = compress(f, k, n, metric);
    Eigen::VectorXcd start;
    if (prev_vec.size() > 0) {
      start = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(op.domain.size()));
      // both domains are sorted, and the old one is a subset of the new one
      std::size_t j = 0;
      for (std::size_t i = 0; i < prev_domain.size(); ++i) {
        while (op.domain[j] != prev_domain[i]) ++j;
        start[static_cast<Eigen::Index>(j)] = prev_vec[static_cast<Eigen::Index>(i)];
      }
    }
    Eigen::VectorXcd last;
    NormLowerBound b = compressed_norm_lower(op, opt, prev_vec.size() > 0 ? &start : nullptr, &last);
    if (!out.empty()) b.value = std::max(b.value, out.back().value);
    out.push_back(b);
    prev_domain = op.domain;
    prev_vec = std::move(last);
  }
  return out;
}

SeminormEstimate seminorm_sandwich(const AlgebraElement& f, unsigned k, const std::vector<std::uint64_t>& schedule,
                                   const WordMetric& metric, const PowerIterationOptions& opt) {
  SeminormEstimate est;
  est.k = k;
  est.weighted_l2 = weighted_l2(f, k, metric);
  est.upper = {weighted_l1(f, k, metric), "weightedL1"};
  est.lower = {est.weighted_l2, "weightedL2"};
  const auto bounds = compressed_norm_schedule(f, k, schedule, metric, opt);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    est.compressions.emplace_back(schedule[i], bounds[i]);
    if (bounds[i].value > est.lower.value)
      est.lower = {bounds[i].value, "compressed(" + std::to_string(schedule[i]) + ")"};
  }
  est.lower.value = std::min(est.lower.value, est.upper.value);
  return est;
}

DftBounds dft_norm_oracle(const AlgebraElement& f, std::uint64_t grid_density) {
  const auto& grp = *f.group();
  if (grp.kind() != GroupKind::FreeAbelian) throw StructuralError("the Fourier oracle needs Z^d");
  if (grid_density == 0) throw ParameterError("grid density must be positive");
  const std::size_t d = grp.rank();
  const std::uint64_t g = grid_density;
  DftBounds out;
  out.grid_density = g;
  out.argmax.assign(d, 0.0);

  struct Term {
    std::vector<std::int64_t> v;
    std::complex<double> a;
  };
  std::vector<Term> terms;
  double gradient = 0, mass = 0;
  for (const auto& [el, a] : f.terms()) {
    Term t{std::vector<std::int64_t>(el.coords().begin(), el.coords().end()), a};
    double n2 = 0;
    for (auto c : t.v) n2 += static_cast<double>(c) * static_cast<double>(c);
    gradient += std::sqrt(n2) * std::abs(a);
    mass += std::abs(a);
    terms.push_back(std::move(t));
  }
  if (terms.empty()) return out;

  // e^{2 pi i m j / g} for m in [-M, M], per grid index j
  std::int64_t m_max = 0;
  for (const auto& t : terms)
    for (auto c : t.v) m_max = std::max(m_max, std::abs(c));
  const std::size_t width = static_cast<std::size_t>(2 * m_max + 1);
  std::vector<std::complex<double>> table(width * g);
  for (std::int64_t m = -m_max; m <= m_max; ++m)
    for (std::uint64_t j = 0; j < g; ++j) {
      const double ang = 2 * std::numbers::pi * static_cast<double>(m) * static_cast<double>(j) / static_cast<double>(g);
      table[static_cast<std::size_t>(m + m_max) * g + j] = std::polar(1.0, ang);
    }

  std::vector<std::uint64_t> idx(d, 0);
  while (true) {
    std::complex<double> s = 0;
    for (const auto& t : terms) {
      std::complex<double> e = t.a;
      for (std::size_t i = 0; i < d; ++i) e *= table[static_cast<std::size_t>(t.v[i] + m_max) * g + idx[i]];
      s += e;
    }
    const double mod = std::abs(s);
    if (mod > out.lower) {
      out.lower = mod;
      for (std::size_t i = 0; i < d; ++i) out.argmax[i] = static_cast<double>(idx[i]) / static_cast<double>(g);
    }
    std::size_t i = 0;
    while (i < d && ++idx[i] == g) idx[i++] = 0;
    if (i == d) break;
  }
  const double half_diagonal = std::sqrt(static_cast<double>(d)) / (2.0 * static_cast<double>(g));
  // the last term covers rounding in the grid evaluation
  out.upper = out.lower + 2 * std::numbers::pi * gradient * half_diagonal +
              1e-12 * mass * static_cast<double>(terms.size() * (d + 1));
  return out;
}

std::uint64_t tail_truncation_radius(double k, double p, double c_hat, double delta) {
  if (!(k > p && p > 0)) throw ParameterError("tail truncation needs k > p > 0");
  if (!(c_hat > 0) || !(delta > 0)) throw ParameterError("tail truncation needs C > 0 and delta > 0");
  const double scale = std::pow(2.0, p) * c_hat;
  auto ok = [&](double n) { return scale * std::pow(n, p - k) <= delta; };
  double n = std::max(1.0, std::ceil(std::pow(scale / delta, 1.0 / (k - p))));
  while (n > 1 && ok(n - 1)) n -= 1;
  while (!ok(n)) n += 1;
  return static_cast<std::uint64_t>(n);
}

AdInequalityResult ad_inequality_check(const GroupElement& h, const AlgebraElement& f, unsigned k,
                                       const std::vector<std::uint64_t>& schedule, const WordMetric& metric,
                                       const PowerIterationOptions& opt) {
  const auto ad = pushforward(Automorphism::inner(f.group(), h), f);
  AdInequalityResult r;
  r.lhs = seminorm_sandwich(ad, k, schedule, metric, opt).lower.value;
  const double two_lh = 2.0 * static_cast<double>(metric.length(h));
  double binom = 1;
  for (unsigned j = 0; j <= k; ++j) {
    r.rhs += binom * std::pow(two_lh, static_cast<double>(k - j)) * weighted_l1(f, j, metric);
    binom = binom * (k - j) / (j + 1);
  }
  r.passed = r.lhs <= r.rhs;
  return r;
}

}  // namespace cqms
