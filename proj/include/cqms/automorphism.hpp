#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqms/group.hpp"
#include "cqms/int_matrix.hpp"
#include "cqms/word_metric.hpp"

namespace cqms {

enum class AutomorphismKind { Identity, Matrix, Extended, Inner };

std::string to_string(AutomorphismKind k);

/// An automorphism of a descriptor's group acting exactly on normal forms.
///   matrix(psi)    v -> psi v on Z^d
///   extended(psi)  (v,k) -> (psi v, k) on Z^d x_phi Z, requires psi phi = phi psi
///   inner(h)       g -> h g h^-1
class Automorphism {
 public:
  static Automorphism identity(GroupPtr group);
  static Automorphism matrix(GroupPtr group, IntMatrix psi);
  static Automorphism extended(GroupPtr group, IntMatrix psi);
  static Automorphism inner(GroupPtr group, GroupElement h);
  /// {"kind": "matrix"|"extended"|"inner"|"identity", "matrix": [[..]], "inner_element": [..]}
  static Automorphism from_json(GroupPtr group, const nlohmann::json& j);
  nlohmann::json to_json() const;

  AutomorphismKind kind() const { return kind_; }
  const GroupPtr& group() const { return group_; }
  /// psi for matrix/extended automorphisms.
  const IntMatrix& matrix() const { return psi_; }
  const GroupElement& conjugator() const { return h_; }
  std::string describe() const;

  GroupElement apply(const GroupElement& g) const;
  /// alpha^n(g) for n >= 0, without iterating n times.
  GroupElement apply_power(const GroupElement& g, std::uint64_t n) const;

 private:
  Automorphism() = default;

  AutomorphismKind kind_ = AutomorphismKind::Identity;
  GroupPtr group_;
  IntMatrix psi_;
  GroupElement h_;
};

struct LipschitzCertificate {
  /// max over generators s of l(alpha(s)); bounds l(alpha(g))/l(g) everywhere by subadditivity.
  std::uint64_t constant = 1;
  std::string witness_generator;
  std::uint64_t validation_radius = 0;
  /// max of l(alpha(g))/l(g) over B_R \ {e}
  double max_observed_ratio = 0;
  bool validated = false;
};

/// Throws HorizonExceeded when images escape what the metric can measure.
LipschitzCertificate lipschitz_constant(const Automorphism& alpha, const WordMetric& metric,
                                        std::uint64_t validation_radius);

struct PolynomialBoundReport {
  bool passed = true;
  /// max over samples and 1 <= n <= n_max of l(psi^n v) / l(v)
  double max_ratio = 0;
  /// max of l(psi^n v) / (d n^(d-1) l(v)); <= 1 iff the bound holds
  double max_normalized_ratio = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
};

/// Checks l(psi^n v) <= d n^(d-1) l(v) in Z^d x_-I Z for the generalized
/// Heisenberg matrix psi. `metric` must be the word metric of that group.
PolynomialBoundReport polynomial_length_bound_check(const IntMatrix& psi, const WordMetric& metric,
                                                    std::span<const std::vector<std::int64_t>> samples,
                                                    std::uint64_t n_max);

}  // namespace cqms
