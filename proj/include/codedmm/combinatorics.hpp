#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace codedmm {

// C(n, r), saturating at uint64 max.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n)
    return 0;
  r = std::min(r, n - r);
  std::uint64_t acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    const std::uint64_t num = n - r + i;
    const std::uint64_t g = std::gcd(acc, i);
    const std::uint64_t a = acc / g;
    // i/g is coprime to a, so it divides num.
    const std::uint64_t factor = num / (i / g);
    if (a > std::numeric_limits<std::uint64_t>::max() / factor)
      return std::numeric_limits<std::uint64_t>::max();
    acc = a * factor;
  }
  return acc;
}

// Calls fn(indices) for every r-subset of {0..n-1} in lexicographic order.
// Stops early when fn returns false; returns whether enumeration finished.
template <typename Fn>
bool for_each_combination(std::size_t n, std::size_t r, Fn &&fn) {
  if (r > n)
    return true;
  std::vector<std::size_t> idx(r);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    if (!fn(static_cast<const std::vector<std::size_t> &>(idx)))
      return false;
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + (i - 1))
      --i;
    if (i == 0)
      return true;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j)
      idx[j] = idx[j - 1] + 1;
  }
}

} // namespace codedmm
