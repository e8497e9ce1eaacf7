#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqms/checked_int.hpp"

namespace cqms {

/// Square integer matrix with arbitrary-precision entries, row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  explicit IntMatrix(std::size_t dim);
  /// Throws ParameterError unless rows form a square matrix.
  static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);
  static IntMatrix identity(std::size_t dim);
  /// Generalized Heisenberg matrix: ones on the diagonal and superdiagonal.
  static IntMatrix heisenberg(std::size_t dim);

  std::size_t dim() const { return dim_; }
  const BigInt& operator()(std::size_t r, std::size_t c) const { return a_[r * dim_ + c]; }
  BigInt& operator()(std::size_t r, std::size_t c) { return a_[r * dim_ + c]; }

  IntMatrix operator*(const IntMatrix& o) const;
  IntMatrix operator-() const;
  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

  BigInt determinant() const;
  bool is_unimodular() const;
  /// Exact inverse; requires |det| = 1.
  IntMatrix inverse() const;
  /// Integer power; negative exponents use the inverse.
  IntMatrix power(std::int64_t k) const;
  bool is_identity() const;

  /// Entries as int64 if every entry fits.
  std::optional<std::vector<std::int64_t>> to_int64() const;
  std::vector<std::vector<std::int64_t>> to_rows() const;  // throws on overflow
  std::string to_string() const;

  template <class T>
  std::vector<T> apply(const std::vector<T>& v) const;

 private:
  std::size_t dim_ = 0;
  std::vector<BigInt> a_;
};

/// y = M x for an int64-valued matrix with checked (or BigInt) accumulation.
template <class T, class Entry>
std::vector<T> mat_vec(const std::vector<Entry>& m, std::size_t dim, const std::vector<T>& x) {
  std::vector<T> y(dim, T(0));
  for (std::size_t r = 0; r < dim; ++r) {
    T acc(0);
    for (std::size_t c = 0; c < dim; ++c) {
      const auto& e = m[r * dim + c];
      if (e == Entry(0) || x[c] == T(0)) continue;
      acc += T(e) * x[c];
    }
    y[r] = acc;
  }
  return y;
}

template <class T>
std::vector<T> IntMatrix::apply(const std::vector<T>& v) const {
  return mat_vec<T>(a_, dim_, v);
}

}  // namespace cqms
