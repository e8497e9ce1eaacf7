#include "cqms/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "cqms/errors.hpp"

namespace cqms {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using Poly = std::vector<Rational>;  // c_0 .. c_d

void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  trim(d);
  return d;
}

// Polynomial long division, returns {quotient, remainder}.
std::pair<Poly, Poly> divmod(Poly a, const Poly& b) {
  if (b.empty()) throw NumericalError("division by zero polynomial");
  trim(a);
  if (a.size() < b.size()) return {Poly{}, a};
  Poly q(a.size() - b.size() + 1);
  for (std::size_t i = a.size(); i-- >= b.size();) {
    const Rational c = a[i] / b.back();
    q[i - (b.size() - 1)] = c;
    for (std::size_t j = 0; j < b.size(); ++j) a[i - (b.size() - 1) + j] -= c * b[j];
    if (i == b.size() - 1) break;
  }
  trim(a);
  trim(q);
  return {q, a};
}

Poly monic(Poly p) {
  trim(p);
  const Rational lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

Poly gcd(Poly a, Poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

// Yun's square-free factorisation: p = prod f_i^i with f_i square-free, coprime.
std::vector<std::pair<Poly, std::size_t>> square_free(const Poly& p) {
  std::vector<std::pair<Poly, std::size_t>> out;
  Poly a = monic(p);
  Poly b = derivative(a);
  Poly c = gcd(a, b);
  Poly w = divmod(a, c).first;
  std::size_t i = 1;
  while (w.size() > 1) {
    Poly y = gcd(w, c);
    Poly z = divmod(w, y).first;
    if (z.size() > 1) out.emplace_back(monic(z), i);
    w = std::move(y);
    c = divmod(c, w).first;
    ++i;
  }
  return out;
}

// Parlett-Reinsch balancing, in place.
void balance(Eigen::MatrixXd& a) {
  const auto n = a.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0, r = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      if (c == 0 || r == 0) continue;
      double f = 1;
      const double s = c + r;
      while (c < r / 2) {
        c *= 2;
        r /= 2;
        f *= 2;
      }
      while (c >= r * 2) {
        c /= 2;
        r *= 2;
        f /= 2;
      }
      if ((c + r) < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

template <class C>
C horner(const std::vector<C>& coef, const C& z) {
  C acc = coef.back();
  for (std::size_t i = coef.size() - 1; i-- > 0;) acc = acc * z + coef[i];
  return acc;
}

std::vector<std::complex<double>> double_roots(const Poly& p) {
  const std::size_t d = p.size() - 1;
  if (d == 1) return {std::complex<double>(static_cast<double>(-p[0] / p[1]), 0)};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 1; i < d; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1;
  for (std::size_t i = 0; i < d; ++i)
    comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d - 1)) = -static_cast<double>(p[i] / p[d]);
  balance(comp);
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  if (es.info() != Eigen::Success) throw NumericalError("companion eigen-solver did not converge");
  std::vector<std::complex<long double>> coef(p.size()), dcoef;
  for (std::size_t i = 0; i < p.size(); ++i) coef[i] = static_cast<long double>(static_cast<double>(p[i]));
  for (std::size_t i = 1; i < p.size(); ++i) dcoef.push_back(coef[i] * static_cast<long double>(i));
  std::vector<std::complex<double>> roots;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    std::complex<long double> z(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
    for (int it = 0; it < 8; ++it) {  // Newton polish on a simple root
      const auto fz = horner(coef, z);
      const auto dz = horner(dcoef, z);
      if (std::abs(dz) == 0) break;
      const auto step = fz / dz;
      z -= step;
      if (std::abs(step) <= 1e-18L * std::max(1.0L, std::abs(z))) break;
    }
    roots.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  }
  return roots;
}

// Aberth-Ehrlich iteration in 50-digit arithmetic.
std::vector<std::complex<double>> multiprecision_roots(const Poly& p) {
  using Real = boost::multiprecision::cpp_bin_float_50;
  using Complex = boost::multiprecision::cpp_complex_50;
  const std::size_t d = p.size() - 1;
  std::vector<Complex> coef(p.size()), dcoef;
  for (std::size_t i = 0; i < p.size(); ++i)
    coef[i] = Complex(Real(numerator(p[i])) / Real(denominator(p[i])));
  for (std::size_t i = 1; i < p.size(); ++i) dcoef.push_back(coef[i] * Real(i));
  Real radius = 1;
  for (std::size_t i = 0; i < d; ++i) radius = std::max(radius, Real(1) + abs(coef[i] / coef[d]));
  std::vector<Complex> z(d);
  for (std::size_t k = 0; k < d; ++k) {
    const Real ang = Real(2) * boost::math::constants::pi<Real>() * Real(k) / Real(d) + Real(0.4);
    z[k] = Complex(radius * cos(ang) / 2, radius * sin(ang) / 2);
  }
  for (int it = 0; it < 500; ++it) {
    Real worst = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const Complex ratio = horner(coef, z[k]) / horner(dcoef, z[k]);
      Complex sum = 0;
      for (std::size_t j = 0; j < d; ++j)
        if (j != k) sum += Complex(1) / (z[k] - z[j]);
      const Complex w = ratio / (Complex(1) - ratio * sum);
      z[k] -= w;
      worst = std::max(worst, Real(abs(w)));
    }
    if (worst < Real("1e-40")) break;
  }
  std::vector<std::complex<double>> out;
  for (const auto& r : z)
    out.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
  return out;
}

double det_residual(const std::vector<Eigenvalue>& ev, const BigInt& det) {
  long double logprod = 0;
  for (const auto& e : ev) logprod += static_cast<long double>(e.multiplicity) * std::log(static_cast<long double>(std::abs(e.value)));
  const long double target = std::abs(static_cast<long double>(static_cast<double>(det)));
  if (target == 0) return static_cast<double>(std::exp(logprod));
  return static_cast<double>(std::abs(std::exp(logprod) - target) / std::max(1.0L, target));
}

}  // namespace

std::vector<BigInt> characteristic_polynomial(const IntMatrix& t) {
  // Faddeev-LeVerrier; every division below is exact.
  const std::size_t n = t.dim();
  std::vector<BigInt> c(n + 1);
  c[n] = 1;
  IntMatrix m(n);  // M_0 = 0
  for (std::size_t k = 1; k <= n; ++k) {
    IntMatrix next = t * m;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    m = std::move(next);
    IntMatrix am = t * m;
    BigInt tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
    c[n - k] = -tr / static_cast<long>(k);
  }
  return c;
}

Spectrum spectrum(const IntMatrix& t) {
  if (t.dim() == 0) return {};
  const auto cp = characteristic_polynomial(t);
  Poly p(cp.begin(), cp.end());
  const auto factors = square_free(p);
  const BigInt det = t.determinant();

  auto collect = [&](auto&& root_finder) {
    std::vector<Eigenvalue> ev;
    for (const auto& [f, mult] : factors)
      for (const auto& z : root_finder(f)) ev.push_back({z, mult});
    return ev;
  };
  Spectrum s;
  s.eigenvalues = collect(double_roots);
  s.determinant_residual = det_residual(s.eigenvalues, det);
  if (!(s.determinant_residual < 1e-6)) {
    s.eigenvalues = collect(multiprecision_roots);
    s.determinant_residual = det_residual(s.eigenvalues, det);
    s.used_multiprecision = true;
    if (!(s.determinant_residual < 1e-6))
      throw NumericalError("eigenvalue residual check failed for " + t.to_string());
  }
  return s;
}

double eigen_entropy(const IntMatrix& t) {
  double h = 0;
  for (const auto& e : spectrum(t).eigenvalues) {
    const double m = std::abs(e.value);
    if (m >= 1.0) h += static_cast<double>(e.multiplicity) * std::log(m);
  }
  return h;
}

HyperbolicityResult hyperbolicity_check(const IntMatrix& t) {
  HyperbolicityResult r;
  for (const auto& e : spectrum(t).eigenvalues) r.max_modulus = std::max(r.max_modulus, std::abs(e.value));
  r.hyperbolic = r.max_modulus >= 2.0;
  return r;
}

}  // namespace cqms
