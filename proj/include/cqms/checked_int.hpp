#pragma once

#include <cstdint>
#include <functional>

#include <boost/multiprecision/cpp_int.hpp>

namespace cqms {

using BigInt = boost::multiprecision::cpp_int;

/// Thrown by CheckedInt when a machine-word operation overflows; callers
/// catch it and redo the computation with BigInt.
struct Overflow {};

/// int64 with trapping arithmetic. Lets one templated kernel serve both the
/// machine-word fast path and the BigInt slow path.
class CheckedInt {
 public:
  constexpr CheckedInt() = default;
  constexpr CheckedInt(std::int64_t v) : v_(v) {}  // NOLINT(implicit)

  constexpr std::int64_t value() const { return v_; }

  friend CheckedInt operator+(CheckedInt a, CheckedInt b) {
    std::int64_t r;
    if (__builtin_add_overflow(a.v_, b.v_, &r)) throw Overflow{};
    return r;
  }
  friend CheckedInt operator-(CheckedInt a, CheckedInt b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a.v_, b.v_, &r)) throw Overflow{};
    return r;
  }
  friend CheckedInt operator*(CheckedInt a, CheckedInt b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a.v_, b.v_, &r)) throw Overflow{};
    return r;
  }
  CheckedInt operator-() const { return CheckedInt(0) - *this; }
  CheckedInt& operator+=(CheckedInt o) { return *this = *this + o; }
  CheckedInt& operator-=(CheckedInt o) { return *this = *this - o; }
  CheckedInt& operator*=(CheckedInt o) { return *this = *this * o; }

  friend constexpr bool operator==(CheckedInt a, CheckedInt b) { return a.v_ == b.v_; }
  friend constexpr auto operator<=>(CheckedInt a, CheckedInt b) { return a.v_ <=> b.v_; }

 private:
  std::int64_t v_ = 0;
};

inline bool fits_int64(const BigInt& x) {
  return x >= BigInt(std::numeric_limits<std::int64_t>::min()) &&
         x <= BigInt(std::numeric_limits<std::int64_t>::max());
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline void hash_combine(std::size_t& seed, std::uint64_t v) {
  seed = static_cast<std::size_t>(splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6))));
}

}  // namespace cqms
