#pragma once

#include "codedmm/latency.hpp"

#include <cstddef>
#include <cstdint>

namespace codedmm::comm {

using latency::LatencyParams;
using latency::Scheme;

// Symbol counts on both links. Master-to-slave traffic is linear in the
// operand length s, so it is kept as ms_per_s * s.
struct CommCost {
  std::uint64_t ms_per_s = 0;
  std::uint64_t s = 1;
  std::uint64_t slave_master_symbols = 0;
  // Each link against its uncoded counterpart (2skb and kb), then summed.
  double normalized_overhead_ms = 0.0;
  double normalized_overhead_sm = 0.0;

  std::uint64_t master_slave_symbols() const { return ms_per_s * s; }
  double total_overhead() const {
    return normalized_overhead_ms + normalized_overhead_sm;
  }
};

// Uses k, n, b, sigma and, for asym, epsilon/node_sizes/node_degrees. Coded
// schemes need n >= k.
CommCost comm_symbols(Scheme scheme, const LatencyParams &params,
                      std::uint64_t s = 1);

struct AsymOverhead {
  double closed_form = 0.0; // n/k + (n/k + 1) eps - 1
  double sigma_form = 0.0;  // sigma n (1 + eps) / k - 1, the master-slave link
};
AsymOverhead normalized_overhead_asym(std::size_t n, std::size_t k,
                                      double epsilon, std::size_t sigma = 1);

struct ExtraSymbols {
  double master_slave = 0.0; // 2 sigma s n eps b
  double slave_master = 0.0; // k eps b
};
// Surplus of the asymptotic scheme over an AMDS code with the same n and b.
ExtraSymbols extra_symbols_asym(std::size_t n, std::size_t k, std::size_t b,
                                std::size_t sigma, std::uint64_t s,
                                double epsilon);

} // namespace codedmm::comm
