#pragma once

#include <concepts>
#include <cstdint>
#include <ostream>
#include <stdexcept>

namespace codedmm {

// Exact commutative ring scalars. Block arithmetic, peeling and assembly work
// over any of these; interpolation additionally needs `inverse()`.
template <typename T>
concept RingScalar = std::regular<T> && requires(T a, T b) {
  { a + b } -> std::convertible_to<T>;
  { a - b } -> std::convertible_to<T>;
  { a * b } -> std::convertible_to<T>;
};

template <typename T>
concept FieldScalar = RingScalar<T> && requires(T a) {
  { a.inverse() } -> std::convertible_to<T>;
};

// Integers modulo a prime Q < 2^32, so products fit in 64 bits.
template <std::uint64_t Q>
  requires(Q > 2 && Q < (std::uint64_t{1} << 32))
class ModInt {
public:
  static constexpr std::uint64_t modulus = Q;

  constexpr ModInt() = default;
  constexpr ModInt(std::int64_t v) // NOLINT(google-explicit-constructor)
      : value_(reduce(v)) {}

  constexpr std::uint64_t value() const noexcept { return value_; }

  friend constexpr ModInt operator+(ModInt a, ModInt b) {
    return from_raw((a.value_ + b.value_) % Q);
  }
  friend constexpr ModInt operator-(ModInt a, ModInt b) {
    return from_raw((a.value_ + Q - b.value_) % Q);
  }
  friend constexpr ModInt operator*(ModInt a, ModInt b) {
    return from_raw((a.value_ * b.value_) % Q);
  }
  constexpr ModInt operator-() const { return from_raw((Q - value_) % Q); }
  constexpr ModInt &operator+=(ModInt o) { return *this = *this + o; }
  constexpr ModInt &operator-=(ModInt o) { return *this = *this - o; }
  constexpr ModInt &operator*=(ModInt o) { return *this = *this * o; }

  constexpr ModInt pow(std::uint64_t e) const {
    ModInt base = *this;
    ModInt acc{1};
    while (e > 0) {
      if (e & 1U)
        acc *= base;
      base *= base;
      e >>= 1U;
    }
    return acc;
  }

  // Fermat inverse; Q is prime.
  constexpr ModInt inverse() const {
    if (value_ == 0)
      throw std::domain_error("inverse of zero in Z_q");
    return pow(Q - 2);
  }

  friend constexpr bool operator==(ModInt, ModInt) = default;

  friend std::ostream &operator<<(std::ostream &os, ModInt v) {
    return os << v.value_;
  }

private:
  static constexpr std::uint64_t reduce(std::int64_t v) {
    const auto q = static_cast<std::int64_t>(Q);
    std::int64_t r = v % q;
    if (r < 0)
      r += q;
    return static_cast<std::uint64_t>(r);
  }
  static constexpr ModInt from_raw(std::uint64_t raw) {
    ModInt m;
    m.value_ = raw;
    return m;
  }

  std::uint64_t value_ = 0;
};

// 2^31 - 1, the default verification field.
inline constexpr std::uint64_t kMersenne31 = 2147483647ULL;
using Zq = ModInt<kMersenne31>;

} // namespace codedmm
