#include "cqms/automorphism.hpp"

#include <algorithm>
#include <cmath>

#include "cqms/errors.hpp"

namespace cqms {

std::string to_string(AutomorphismKind k) {
  switch (k) {
    case AutomorphismKind::Identity:
      return "identity";
    case AutomorphismKind::Matrix:
      return "matrix";
    case AutomorphismKind::Extended:
      return "extended";
    case AutomorphismKind::Inner:
      return "inner";
  }
  return "?";
}

Automorphism Automorphism::identity(GroupPtr group) {
  Automorphism a;
  a.group_ = std::move(group);
  a.kind_ = AutomorphismKind::Identity;
  return a;
}

Automorphism Automorphism::matrix(GroupPtr group, IntMatrix psi) {
  if (group->kind() != GroupKind::FreeAbelian || psi.dim() != group->rank())
    throw StructuralError("matrix automorphism needs Z^d with matching d");
  if (!psi.is_unimodular()) throw StructuralError("automorphism matrix must have determinant +-1");
  Automorphism a;
  a.group_ = std::move(group);
  a.kind_ = AutomorphismKind::Matrix;
  a.psi_ = std::move(psi);
  return a;
}

Automorphism Automorphism::extended(GroupPtr group, IntMatrix psi) {
  if (group->kind() != GroupKind::Semidirect || psi.dim() != group->rank())
    throw StructuralError("extended automorphism needs Z^d x_phi Z with matching d");
  if (!psi.is_unimodular()) throw StructuralError("automorphism matrix must have determinant +-1");
  if (!(psi * group->twist() == group->twist() * psi))
    throw StructuralError("extended automorphism requires psi phi = phi psi");
  Automorphism a;
  a.group_ = std::move(group);
  a.kind_ = AutomorphismKind::Extended;
  a.psi_ = std::move(psi);
  return a;
}

Automorphism Automorphism::inner(GroupPtr group, GroupElement h) {
  group->check(h);
  Automorphism a;
  a.group_ = std::move(group);
  a.kind_ = AutomorphismKind::Inner;
  a.h_ = std::move(h);
  return a;
}

Automorphism Automorphism::from_json(GroupPtr group, const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  auto rows = [&] {
    return IntMatrix::from_rows(j.at("matrix").get<std::vector<std::vector<std::int64_t>>>());
  };
  if (kind == "identity") return identity(std::move(group));
  if (kind == "matrix") return matrix(std::move(group), rows());
  if (kind == "extended") return extended(std::move(group), rows());
  if (kind == "inner") {
    GroupElement h = group->element_from_json(j.at("inner_element"));
    return inner(std::move(group), std::move(h));
  }
  throw ParameterError("unknown automorphism kind '" + kind + "'");
}

nlohmann::json Automorphism::to_json() const {
  nlohmann::json j{{"kind", to_string(kind_)}};
  if (kind_ == AutomorphismKind::Matrix || kind_ == AutomorphismKind::Extended)
    j["matrix"] = psi_.to_rows();
  if (kind_ == AutomorphismKind::Inner) j["inner_element"] = group_->element_to_json(h_);
  return j;
}

std::string Automorphism::describe() const {
  switch (kind_) {
    case AutomorphismKind::Identity:
      return "id on " + group_->name();
    case AutomorphismKind::Matrix:
      return psi_.to_string() + " on " + group_->name();
    case AutomorphismKind::Extended:
      return psi_.to_string() + " extended to " + group_->name();
    case AutomorphismKind::Inner:
      return "Ad_" + group_->format(h_) + " on " + group_->name();
  }
  return {};
}

namespace {

GroupElement act_by_matrix(const IntMatrix& m, const GroupElement& g, std::size_t d, bool keep_tail) {
  const auto c = g.big_coords();
  std::vector<BigInt> v(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(d));
  auto w = m.apply(v);
  if (keep_tail) w.push_back(c[d]);
  return GroupElement::from_big(w);
}

}  // namespace

GroupElement Automorphism::apply(const GroupElement& g) const { return apply_power(g, 1); }

GroupElement Automorphism::apply_power(const GroupElement& g, std::uint64_t n) const {
  group_->check(g);
  if (n == 0) return g;
  switch (kind_) {
    case AutomorphismKind::Identity:
      return g;
    case AutomorphismKind::Matrix:
    case AutomorphismKind::Extended: {
      const IntMatrix p = n == 1 ? psi_ : psi_.power(static_cast<std::int64_t>(n));
      if (!g.is_wide()) {
        // int64 fast path
        if (auto small = p.to_int64()) {
          try {
            const std::size_t d = group_->rank();
            std::vector<CheckedInt> v(g.coords().begin(), g.coords().begin() + static_cast<std::ptrdiff_t>(d));
            auto w = mat_vec<CheckedInt>(*small, d, v);
            std::vector<std::int64_t> out(w.size());
            std::transform(w.begin(), w.end(), out.begin(), [](CheckedInt x) { return x.value(); });
            if (kind_ == AutomorphismKind::Extended) out.push_back(g.coords()[d]);
            return GroupElement(std::move(out));
          } catch (const Overflow&) {
          }
        }
      }
      return act_by_matrix(p, g, group_->rank(), kind_ == AutomorphismKind::Extended);
    }
    case AutomorphismKind::Inner: {
      const GroupElement hn = group_->power(h_, static_cast<std::int64_t>(n));
      return group_->multiply(group_->multiply(hn, g), group_->inverse(hn));
    }
  }
  return g;
}

LipschitzCertificate lipschitz_constant(const Automorphism& alpha, const WordMetric& metric,
                                        std::uint64_t validation_radius) {
  if (!same_group(alpha.group(), metric.group()))
    throw StructuralError("metric and automorphism live on different groups");
  const auto& group = *alpha.group();
  LipschitzCertificate cert;
  cert.constant = 0;
  const auto& gens = group.generators();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::uint64_t len = metric.length(alpha.apply(gens[i]));
    if (len > cert.constant) {
      cert.constant = len;
      cert.witness_generator = group.generator_names()[i];
    }
  }
  cert.constant = std::max<std::uint64_t>(cert.constant, 1);
  cert.validation_radius = validation_radius;
  const Ball ball = metric.ball(validation_radius);
  cert.validated = true;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    if (ball.lengths[i] == 0) continue;
    const double ratio = static_cast<double>(metric.length(alpha.apply(ball.elements[i]))) /
                         static_cast<double>(ball.lengths[i]);
    cert.max_observed_ratio = std::max(cert.max_observed_ratio, ratio);
    if (ratio > static_cast<double>(cert.constant)) cert.validated = false;
  }
  return cert;
}

PolynomialBoundReport polynomial_length_bound_check(const IntMatrix& psi, const WordMetric& metric,
                                                    std::span<const std::vector<std::int64_t>> samples,
                                                    std::uint64_t n_max) {
  const std::size_t d = psi.dim();
  if (!(psi == IntMatrix::heisenberg(d)))
    throw ParameterError("polynomial length bound applies to the generalized Heisenberg matrix");
  const auto& group = *metric.group();
  if (group.kind() != GroupKind::Semidirect || group.rank() != d)
    throw StructuralError("polynomial length bound is stated on Z^d x_-I Z");
  const auto alpha = Automorphism::extended(metric.group(), psi);
  PolynomialBoundReport rep;
  for (const auto& v : samples) {
    const GroupElement g = group.pair(v, 0);
    const std::uint64_t base = metric.length(g);
    if (base == 0) continue;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      const double image = static_cast<double>(metric.length(alpha.apply_power(g, n)));
      const double bound = static_cast<double>(d) * std::pow(static_cast<double>(n), static_cast<double>(d - 1)) *
                           static_cast<double>(base);
      rep.max_ratio = std::max(rep.max_ratio, image / static_cast<double>(base));
      rep.max_normalized_ratio = std::max(rep.max_normalized_ratio, image / bound);
      ++rep.checks;
      if (image > bound) {
        ++rep.violations;
        rep.passed = false;
      }
    }
  }
  return rep;
}

}  // namespace cqms
