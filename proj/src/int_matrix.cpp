#include "cqms/int_matrix.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <sstream>

#include "cqms/errors.hpp"

namespace cqms {

using Rational = boost::multiprecision::cpp_rational;

IntMatrix::IntMatrix(std::size_t dim) : dim_(dim), a_(dim * dim) {}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  IntMatrix m(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size())
      throw ParameterError("matrix must be square, row " + std::to_string(r) + " has " +
                           std::to_string(rows[r].size()) + " entries");
    for (std::size_t c = 0; c < rows.size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

IntMatrix IntMatrix::identity(std::size_t dim) {
  IntMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::heisenberg(std::size_t dim) {
  IntMatrix m = identity(dim);
  for (std::size_t i = 0; i + 1 < dim; ++i) m(i, i + 1) = 1;
  return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
  if (o.dim_ != dim_) throw StructuralError("matrix dimension mismatch");
  IntMatrix out(dim_);
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = 0; k < dim_; ++k) {
      const BigInt& x = (*this)(r, k);
      if (x == 0) continue;
      for (std::size_t c = 0; c < dim_; ++c) out(r, c) += x * o(k, c);
    }
  return out;
}

IntMatrix IntMatrix::operator-() const {
  IntMatrix out(*this);
  for (auto& x : out.a_) x = -x;
  return out;
}

BigInt IntMatrix::determinant() const {
  // Bareiss fraction-free elimination.
  if (dim_ == 0) return 1;
  std::vector<BigInt> m = a_;
  const std::size_t n = dim_;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k * n + k] == 0) {
      std::size_t p = k + 1;
      while (p < n && m[p * n + k] == 0) ++p;
      if (p == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(m[k * n + c], m[p * n + c]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
    prev = m[k * n + k];
  }
  return sign * m[(n - 1) * n + (n - 1)];
}

bool IntMatrix::is_unimodular() const {
  const BigInt d = determinant();
  return d == 1 || d == -1;
}

bool IntMatrix::is_identity() const { return *this == identity(dim_); }

IntMatrix IntMatrix::inverse() const {
  if (!is_unimodular()) throw ParameterError("matrix is not invertible over the integers");
  const std::size_t n = dim_;
  std::vector<Rational> aug(n * 2 * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug[r * 2 * n + c] = Rational((*this)(r, c));
    aug[r * 2 * n + n + r] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    while (aug[p * 2 * n + col] == 0) ++p;
    if (p != col)
      for (std::size_t c = 0; c < 2 * n; ++c) std::swap(aug[p * 2 * n + c], aug[col * 2 * n + c]);
    const Rational piv = aug[col * 2 * n + col];
    for (std::size_t c = 0; c < 2 * n; ++c) aug[col * 2 * n + c] /= piv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || aug[r * 2 * n + col] == 0) continue;
      const Rational f = aug[r * 2 * n + col];
      for (std::size_t c = 0; c < 2 * n; ++c) aug[r * 2 * n + c] -= f * aug[col * 2 * n + c];
    }
  }
  IntMatrix inv(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const Rational& x = aug[r * 2 * n + n + c];
      inv(r, c) = boost::multiprecision::numerator(x);  // denominator is 1 for unimodular input
    }
  return inv;
}

IntMatrix IntMatrix::power(std::int64_t k) const {
  IntMatrix base = k < 0 ? inverse() : *this;
  std::uint64_t e = k < 0 ? static_cast<std::uint64_t>(-(k + 1)) + 1 : static_cast<std::uint64_t>(k);
  IntMatrix out = identity(dim_);
  while (e) {
    if (e & 1) out = out * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return out;
}

std::optional<std::vector<std::int64_t>> IntMatrix::to_int64() const {
  std::vector<std::int64_t> out;
  out.reserve(a_.size());
  for (const auto& x : a_) {
    if (!fits_int64(x)) return std::nullopt;
    out.push_back(static_cast<std::int64_t>(x));
  }
  return out;
}

std::vector<std::vector<std::int64_t>> IntMatrix::to_rows() const {
  auto flat = to_int64();
  if (!flat) throw StructuralError("matrix entries exceed 64 bits");
  std::vector<std::vector<std::int64_t>> rows(dim_);
  for (std::size_t r = 0; r < dim_; ++r)
    rows[r].assign(flat->begin() + static_cast<std::ptrdiff_t>(r * dim_),
                   flat->begin() + static_cast<std::ptrdiff_t>((r + 1) * dim_));
  return rows;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t r = 0; r < dim_; ++r) {
    os << (r ? "," : "") << '[';
    for (std::size_t c = 0; c < dim_; ++c) os << (c ? "," : "") << (*this)(r, c);
    os << ']';
  }
  os << ']';
  return os.str();
}

}  // namespace cqms
