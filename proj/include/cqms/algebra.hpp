#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "cqms/automorphism.hpp"
#include "cqms/errors.hpp"
#include "cqms/group.hpp"
#include "cqms/word_metric.hpp"

namespace cqms {

using Rational = boost::multiprecision::cpp_rational;

/// Gaussian rationals, used where identities must hold exactly.
struct ComplexRational {
  Rational re = 0;
  Rational im = 0;

  ComplexRational() = default;
  ComplexRational(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}
  ComplexRational(int r) : re(r) {}

  ComplexRational& operator+=(const ComplexRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ComplexRational& operator-=(const ComplexRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
  friend ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) = default;
};

inline ComplexRational conj(const ComplexRational& z) { return {z.re, -z.im}; }
inline std::complex<double> to_complex(const ComplexRational& z) {
  return {static_cast<double>(z.re), static_cast<double>(z.im)};
}
inline std::complex<double> to_complex(const std::complex<double>& z) { return z; }
inline Rational norm_squared(const ComplexRational& z) { return z.re * z.re + z.im * z.im; }
inline double norm_squared(const std::complex<double>& z) { return std::norm(z); }

namespace detail {
template <class S>
bool is_zero(const S& s) {
  return s == S(0);
}
template <class S>
S scalar_from_int(std::int64_t v) {
  if constexpr (std::is_same_v<S, ComplexRational>)
    return ComplexRational(Rational(v));
  else
    return S(static_cast<double>(v));
}
template <class S>
S imaginary_unit() {
  if constexpr (std::is_same_v<S, ComplexRational>)
    return ComplexRational(Rational(0), Rational(1));
  else
    return S(0, 1);
}
}  // namespace detail

/// A finitely supported function on the group, sum c_g delta_g, with no
/// stored zeros. The same representation serves as a finitely supported
/// vector of l^2(G).
template <class Scalar>
class BasicAlgebraElement {
 public:
  using Map = std::map<GroupElement, Scalar>;

  explicit BasicAlgebraElement(GroupPtr group) : group_(std::move(group)) {}

  static BasicAlgebraElement delta(GroupPtr group, const GroupElement& g, Scalar c = Scalar(1)) {
    BasicAlgebraElement f(std::move(group));
    f.add(g, c);
    return f;
  }

  const GroupPtr& group() const { return group_; }
  const Map& terms() const { return terms_; }
  std::size_t support_size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Scalar coefficient(const GroupElement& g) const {
    auto it = terms_.find(g);
    return it == terms_.end() ? Scalar(0) : it->second;
  }

  /// Adds c to the coefficient at g, dropping the entry if it becomes exactly zero.
  void add(const GroupElement& g, const Scalar& c) {
    if (detail::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(g, c);
    if (!inserted) {
      it->second += c;
      if (detail::is_zero(it->second)) terms_.erase(it);
    }
  }

  BasicAlgebraElement& operator+=(const BasicAlgebraElement& o) {
    require_same(o);
    for (const auto& [g, c] : o.terms_) add(g, c);
    return *this;
  }
  BasicAlgebraElement& operator-=(const BasicAlgebraElement& o) {
    require_same(o);
    for (const auto& [g, c] : o.terms_) add(g, Scalar(0) - c);
    return *this;
  }
  friend BasicAlgebraElement operator+(BasicAlgebraElement a, const BasicAlgebraElement& b) { return a += b; }
  friend BasicAlgebraElement operator-(BasicAlgebraElement a, const BasicAlgebraElement& b) { return a -= b; }

  BasicAlgebraElement scaled(const Scalar& s) const {
    BasicAlgebraElement out(group_);
    for (const auto& [g, c] : terms_) out.add(g, c * s);
    return out;
  }

  /// Largest word length in the support (0 for the empty element).
  std::uint64_t max_length(const WordMetric& metric) const {
    std::uint64_t m = 0;
    for (const auto& [g, c] : terms_) m = std::max(m, metric.length(g));
    return m;
  }

  double l2_norm() const {
    double s = 0;
    for (const auto& [g, c] : terms_) s += std::norm(to_complex(c));
    return std::sqrt(s);
  }

  void require_same(const BasicAlgebraElement& o) const {
    if (!same_group(group_, o.group_)) throw StructuralError("algebra elements over different groups");
  }

  friend bool operator==(const BasicAlgebraElement& a, const BasicAlgebraElement& b) {
    return same_group(a.group_, b.group_) && a.terms_ == b.terms_;
  }

 private:
  GroupPtr group_;
  Map terms_;
};

using AlgebraElement = BasicAlgebraElement<std::complex<double>>;
using ExactAlgebraElement = BasicAlgebraElement<ComplexRational>;

/// (f1 * f2)(g) = sum_h f1(h) f2(h^-1 g)
template <class S>
BasicAlgebraElement<S> convolve(const BasicAlgebraElement<S>& f1, const BasicAlgebraElement<S>& f2) {
  f1.require_same(f2);
  const auto& grp = *f1.group();
  BasicAlgebraElement<S> out(f1.group());
  for (const auto& [g, a] : f1.terms())
    for (const auto& [h, b] : f2.terms()) out.add(grp.multiply(g, h), a * b);
  return out;
}

/// f*(g) = conj(f(g^-1))
template <class S>
BasicAlgebraElement<S> adjoint(const BasicAlgebraElement<S>& f) {
  using std::conj;
  BasicAlgebraElement<S> out(f.group());
  for (const auto& [g, c] : f.terms()) out.add(f.group()->inverse(g), conj(c));
  return out;
}

/// alpha(sum c_g delta_g) = sum c_g delta_{alpha(g)}
template <class S>
BasicAlgebraElement<S> pushforward(const Automorphism& alpha, const BasicAlgebraElement<S>& f) {
  if (!same_group(alpha.group(), f.group())) throw StructuralError("automorphism and element on different groups");
  BasicAlgebraElement<S> out(f.group());
  for (const auto& [g, c] : f.terms()) out.add(alpha.apply(g), c);
  return out;
}

/// sum_g l(g)^k |a_g|
template <class S>
double weighted_l1(const BasicAlgebraElement<S>& f, unsigned k, const WordMetric& metric) {
  double s = 0;
  for (const auto& [g, c] : f.terms())
    s += std::pow(static_cast<double>(metric.length(g)), static_cast<double>(k)) * std::abs(to_complex(c));
  return s;
}

/// (sum_g l(g)^{2k} |a_g|^2)^{1/2}
template <class S>
double weighted_l2(const BasicAlgebraElement<S>& f, unsigned k, const WordMetric& metric) {
  double s = 0;
  for (const auto& [g, c] : f.terms())
    s += std::pow(static_cast<double>(metric.length(g)), 2.0 * k) * std::norm(to_complex(c));
  return std::sqrt(s);
}

/// norm_upper / (sum |f(g)|^2 (1 + l(g))^{2r})^{1/2}, where norm_upper is an
/// upper estimate of the reduced norm of f.
double rapid_decay_ratio(const AlgebraElement& f, double r, double norm_upper, const WordMetric& metric);

AlgebraElement to_float(const ExactAlgebraElement& f);

/// {"support": [{"g": normal form, "re": .., "im": ..}]}
nlohmann::json to_json(const AlgebraElement& f);
AlgebraElement algebra_element_from_json(GroupPtr group, const nlohmann::json& j);
/// Exact variant: re/im serialized as "p/q" strings.
nlohmann::json to_json(const ExactAlgebraElement& f);
ExactAlgebraElement exact_algebra_element_from_json(GroupPtr group, const nlohmann::json& j);

struct SamplingOptions {
  std::size_t min_support = 1;
  std::size_t max_support = 6;
  /// Coefficient real and imaginary parts are integers in [-coefficient_range, coefficient_range].
  std::int64_t coefficient_range = 3;
  bool real_coefficients = false;
};

/// Random element supported in `ball` with Gaussian-integer coefficients.
template <class S>
BasicAlgebraElement<S> sample_element(const GroupPtr& group, const Ball& ball, std::mt19937_64& rng,
                                      const SamplingOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> size_dist(opt.min_support, std::min(opt.max_support, ball.size()));
  std::uniform_int_distribution<std::size_t> pick(0, ball.size() - 1);
  std::uniform_int_distribution<std::int64_t> coef(-opt.coefficient_range, opt.coefficient_range);
  BasicAlgebraElement<S> f(group);
  const std::size_t target = size_dist(rng);
  while (f.support_size() < target) {
    const GroupElement& g = ball.elements[pick(rng)];
    if (f.terms().count(g)) continue;
    const std::int64_t re = coef(rng);
    const std::int64_t im = opt.real_coefficients ? 0 : coef(rng);
    if (re == 0 && im == 0) continue;
    const S c = detail::scalar_from_int<S>(re) + detail::scalar_from_int<S>(im) * detail::imaginary_unit<S>();
    f.add(g, c);
  }
  return f;
}

}  // namespace cqms
