#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqms/checked_int.hpp"
#include "cqms/int_matrix.hpp"

namespace cqms {

/// Canonical normal form of a group element. The interpretation of the
/// coordinate list depends on the owning descriptor:
///   Z^d          the integer vector v
///   F_m          reduced word of signed generator indices (+i = a_i, -i = a_i^-1)
///   Z^d x_phi Z  the vector v followed by the exponent k of t
/// Coordinates live in int64 unless one of them overflows, in which case the
/// whole element is stored with BigInt coordinates.
class GroupElement {
 public:
  GroupElement() = default;
  explicit GroupElement(std::vector<std::int64_t> coords) : small_(std::move(coords)) {}
  /// Canonicalizes: drops to int64 storage when every coordinate fits.
  static GroupElement from_big(const std::vector<BigInt>& coords);

  std::size_t size() const { return wide_ ? wide_->size() : small_.size(); }
  bool is_wide() const { return static_cast<bool>(wide_); }
  /// Only valid when !is_wide().
  std::span<const std::int64_t> coords() const { return small_; }
  std::vector<BigInt> big_coords() const;
  BigInt coord(std::size_t i) const { return wide_ ? (*wide_)[i] : BigInt(small_[i]); }

  friend bool operator==(const GroupElement& a, const GroupElement& b);
  /// Lexicographic on coordinates, shorter prefix first.
  friend std::strong_ordering operator<=>(const GroupElement& a, const GroupElement& b);

  std::size_t hash() const;

 private:
  std::vector<std::int64_t> small_;
  std::shared_ptr<const std::vector<BigInt>> wide_;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const { return g.hash(); }
};

enum class GroupKind { FreeAbelian, Free, Semidirect };

class GroupDescriptor;
using GroupPtr = std::shared_ptr<const GroupDescriptor>;

/// A finitely generated group with solvable word problem in normal form, plus
/// its symmetric generating set. Immutable after construction except for an
/// internal, thread-safe cache of powers of the twisting matrix.
class GroupDescriptor {
 public:
  static GroupPtr free_abelian(std::size_t d);
  static GroupPtr free(std::size_t m);
  /// Z^d x_phi Z; phi must be in GL_d(Z).
  static GroupPtr semidirect(const IntMatrix& phi, std::string name = {});
  static GroupPtr from_json(const nlohmann::json& j);

  GroupKind kind() const { return kind_; }
  /// d for Z^d and Z^d x Z, m for F_m.
  std::size_t rank() const { return rank_; }
  const std::string& name() const { return name_; }
  const IntMatrix& twist() const { return phi_; }
  /// Generators in the fixed order s_1, s_1^-1, s_2, s_2^-1, ...
  const std::vector<GroupElement>& generators() const { return generators_; }
  const std::vector<std::string>& generator_names() const { return generator_names_; }

  GroupElement identity() const;
  GroupElement multiply(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& g) const;
  GroupElement power(const GroupElement& g, std::int64_t n) const;
  bool is_identity(const GroupElement& g) const { return g == identity(); }
  /// Throws StructuralError if g is not a well-formed normal form here.
  void check(const GroupElement& g) const;

  GroupElement vec(std::vector<std::int64_t> v) const;                 // Z^d
  GroupElement word(const std::vector<std::int64_t>& letters) const;   // F_m, reduces
  GroupElement word(const std::string& letters) const;                 // "abA" style
  GroupElement pair(std::vector<std::int64_t> v, std::int64_t k) const;  // semidirect
  /// Generator x_i (Z^d part, 1-based) and t for semidirect products.
  GroupElement x(std::size_t i) const;
  GroupElement t() const;

  /// Exact word length where a closed form is a theorem (Z^d, F_m).
  std::optional<std::uint64_t> closed_form_length(const GroupElement& g) const;
  /// Upper bound ||v||_1 + |k| on the semidirect word length (write (v,k) = (v,0)(0,k)).
  std::uint64_t semidirect_length_upper_bound(const GroupElement& g) const;
  /// True when phi is diagonal with entries +-1; then ||v||_1 + |k| is the
  /// conjectured word length, still subject to BFS validation before use.
  bool has_signed_diagonal_twist() const;

  std::string format(const GroupElement& g) const;
  nlohmann::json element_to_json(const GroupElement& g) const;
  GroupElement element_from_json(const nlohmann::json& j) const;

  nlohmann::json to_json() const;
  /// Hex digest of the canonical JSON, used to key caches.
  std::string fingerprint() const;
  friend bool same_group(const GroupDescriptor& a, const GroupDescriptor& b) {
    return a.fingerprint_ == b.fingerprint_;
  }

 private:
  GroupDescriptor() = default;
  void finish();

  struct TwistPower {
    IntMatrix big;
    std::optional<std::vector<std::int64_t>> small;
  };
  const TwistPower& twist_power(std::int64_t k) const;

  GroupKind kind_ = GroupKind::FreeAbelian;
  std::size_t rank_ = 0;
  std::string name_;
  IntMatrix phi_;
  bool phi_signed_diagonal_ = false;
  std::vector<GroupElement> generators_;
  std::vector<std::string> generator_names_;
  std::string fingerprint_;

  mutable std::mutex power_mutex_;
  mutable std::map<std::int64_t, TwistPower> powers_;
};

inline bool same_group(const GroupPtr& a, const GroupPtr& b) {
  return a == b || (a && b && same_group(*a, *b));
}

}  // namespace cqms

template <>
struct std::hash<cqms::GroupElement> {
  std::size_t operator()(const cqms::GroupElement& g) const { return g.hash(); }
};
