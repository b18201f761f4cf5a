#pragma once

#include "codedmm/array_code.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace codedmm::array {

// Asymptotically MDS array BP-XOR code: column i holds b_i coded cells, so the
// code is described by per-column binary generators G_i (kb x b_i) and the
// full generator [G_1 | ... | G_n]. b' is the mean column size.
class AsymArrayCode {
public:
  AsymArrayCode(std::size_t n, std::size_t k, std::size_t b,
                std::vector<std::vector<SourceSet>> columns);

  std::size_t n() const noexcept { return columns_.size(); }
  std::size_t k() const noexcept { return k_; }
  std::size_t b() const noexcept { return b_; }
  // Straggler tolerance n - k (the t of [n,k,t,b,b']).
  std::size_t t() const noexcept { return n() - k_; }
  std::size_t source_count() const noexcept { return k_ * b_; }
  std::size_t column_size(std::size_t i) const { return columns_[i].size(); }
  std::vector<std::size_t> column_sizes() const;
  const std::vector<std::vector<SourceSet>> &columns() const noexcept {
    return columns_;
  }
  std::size_t total_cells() const;
  double b_prime() const;
  // Largest cell degree; plays the role of sigma.
  std::size_t max_degree() const;

  // G_i: entry (s-1, j) is 1 iff source s appears in cell j of column i.
  linalg::DenseMatrix<int> generator_column(std::size_t i) const;
  linalg::DenseMatrix<int> generator() const;

  // Equal column sizes collapse to an ordinary array code.
  std::optional<ArrayCode> to_array_code() const;

  friend bool operator==(const AsymArrayCode &, const AsymArrayCode &) = default;

private:
  std::size_t k_, b_;
  std::vector<std::vector<SourceSet>> columns_;
};

// b'/b - 1.
double coding_overhead(const AsymArrayCode &code);

struct SampledValidation {
  std::size_t checked = 0;
  std::size_t failures = 0;
  bool exhaustive = false; // all C(n,k) subsets were enumerated
  std::vector<std::size_t> witness; // 1-based columns of the first failure
};

inline constexpr std::size_t kDefaultValidationSamples = 1000;

// Peels k-column subsets: all of them when C(n,k) <= samples, otherwise
// `samples` seeded random draws.
SampledValidation validate_sampled(const AsymArrayCode &code,
                                   std::size_t samples, std::uint64_t seed);

struct AsymBuildOptions {
  std::size_t sigma = 3;                          // degree before inflation
  std::size_t samples = kDefaultValidationSamples;
  std::size_t repairs = 5'000;                    // local-search proposals
};

// Randomized construction: round(n b (1+eps)) cells spread evenly over the
// columns, each a source set of degree <= ceil(sigma (1+eps)) drawn from a
// truncated soliton, then local-search repair until every sampled k-subset
// peels. At eps = 0 and desk scale the exact search is tried first. Throws
// PreconditionError when the repair budget runs out.
AsymArrayCode build_asym_code(std::size_t n, std::size_t k, std::size_t b,
                              double epsilon_target, std::uint64_t seed,
                              AsymBuildOptions options = {});

} // namespace codedmm::array
