#include "codedmm/comm_cost.hpp"

#include "codedmm/errors.hpp"

#include <cmath>
#include <string>

namespace codedmm::comm {

namespace {

double overhead(std::uint64_t coded, std::uint64_t uncoded) {
  // Integer numerator keeps ratios such as 37/100 exact to one rounding.
  const double diff = coded >= uncoded ? static_cast<double>(coded - uncoded)
                                       : -static_cast<double>(uncoded - coded);
  return diff / static_cast<double>(uncoded);
}

} // namespace

CommCost comm_symbols(Scheme scheme, const LatencyParams &p, std::uint64_t s) {
  if (s == 0)
    throw PreconditionError("comm: s must be >= 1");
  if (p.k == 0 || p.b == 0)
    throw PreconditionError("comm: k and b must be >= 1");
  if (scheme != Scheme::uncoded && p.n < p.k)
    throw PreconditionError("comm: n >= k required (n=" + std::to_string(p.n) +
                            ", k=" + std::to_string(p.k) + ")");
  const std::uint64_t k = p.k, n = p.n, b = p.b, sigma = p.sigma;
  CommCost c;
  c.s = s;
  switch (scheme) {
  case Scheme::uncoded:
    c.ms_per_s = 2 * k * b;
    c.slave_master_symbols = k * b;
    break;
  case Scheme::poly:
    c.ms_per_s = 2 * n * b;
    c.slave_master_symbols = k * b;
    break;
  case Scheme::matdot:
    c.ms_per_s = 2 * n * b;
    c.slave_master_symbols = k * b * (k + b - 1);
    break;
  case Scheme::amds:
    c.ms_per_s = 2 * sigma * n * b;
    c.slave_master_symbols = k * b;
    break;
  case Scheme::asym: {
    if (!(p.epsilon >= 0.0))
      throw PreconditionError("comm: epsilon must be >= 0");
    const auto nodes = latency::node_profile(p);
    if (nodes.sizes.size() != n || nodes.degrees.size() != n)
      throw PreconditionError("comm: node profile needs one entry per node");
    for (std::size_t i = 0; i < n; ++i)
      c.ms_per_s += 2 * static_cast<std::uint64_t>(nodes.sizes[i]) *
                    nodes.degrees[i];
    c.slave_master_symbols = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(k) * nodes.b_prime()));
    break;
  }
  }
  c.normalized_overhead_ms = overhead(c.ms_per_s, 2 * k * b);
  c.normalized_overhead_sm = overhead(c.slave_master_symbols, k * b);
  return c;
}

AsymOverhead normalized_overhead_asym(std::size_t n, std::size_t k,
                                      double epsilon, std::size_t sigma) {
  if (k == 0 || n < k)
    throw PreconditionError("normalized_overhead_asym: n >= k >= 1 required");
  const double r = static_cast<double>(n) / static_cast<double>(k);
  return {r + (r + 1.0) * epsilon - 1.0,
          static_cast<double>(sigma) * r * (1.0 + epsilon) - 1.0};
}

ExtraSymbols extra_symbols_asym(std::size_t n, std::size_t k, std::size_t b,
                                std::size_t sigma, std::uint64_t s,
                                double epsilon) {
  const double eb = epsilon * static_cast<double>(b);
  return {2.0 * static_cast<double>(sigma) * static_cast<double>(s) *
              static_cast<double>(n) * eb,
          static_cast<double>(k) * eb};
}

} // namespace codedmm::comm
