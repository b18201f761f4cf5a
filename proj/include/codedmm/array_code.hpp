#pragma once

#include "codedmm/partition.hpp"
#include "codedmm/peeling.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace codedmm::array {

// [n, k, b, sigma] array BP-XOR code: n columns (nodes) of b cells
// (processors), each cell a ring sum of at most sigma of the kb sources.
// Construction checks shape, degree and coverage; the MDS property is checked
// separately by validate_mds.
class ArrayCode {
public:
  ArrayCode(std::size_t n, std::size_t k, std::size_t b, std::size_t sigma,
            std::vector<SourceSet> grid);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t b() const noexcept { return b_; }
  std::size_t sigma() const noexcept { return sigma_; }
  std::size_t source_count() const noexcept { return k_ * b_; }
  std::size_t cell_count() const noexcept { return n_ * b_; }

  // 0-based node and processor.
  const SourceSet &cell(std::size_t node, std::size_t proc) const {
    return grid_[node * b_ + proc];
  }
  std::span<const SourceSet> column(std::size_t node) const {
    return {grid_.data() + node * b_, b_};
  }
  const std::vector<SourceSet> &grid() const noexcept { return grid_; }
  std::size_t max_degree() const;

  friend bool operator==(const ArrayCode &, const ArrayCode &) = default;

private:
  std::size_t n_, k_, b_, sigma_;
  std::vector<SourceSet> grid_; // node-major
};

// The [5,2,2,2] code: node1=(v1, v2+v3), node2=(v2, v1+v4), node3=(v3, v2+v4),
// node4=(v4, v1+v3), node5=(v1+v2, v3+v4).
ArrayCode builtin_5222();

// n = k columns of b singleton cells, v_1..v_kb in order.
ArrayCode systematic_code(std::size_t k, std::size_t b);

// Largest n admitted by the blocklength bound for [n,k,b,sigma] codes.
// Requires sigma < k + (k-1)/(b-1).
std::size_t max_blocklength(std::size_t k, std::size_t b, std::size_t sigma);

// Refined bound for asymptotically MDS codes with overhead epsilon, using
// sigma' = sigma (1 + epsilon). Requires 2 < sigma < (bk-1)/(b'-1) with
// b' = (1 + epsilon) b, and sigma' < k.
std::size_t max_blocklength_asym(std::size_t k, std::size_t b,
                                 std::size_t sigma, double epsilon);

// Cells of the given columns, node-major.
std::vector<SourceSet> cells_of_columns(const ArrayCode &code,
                                        std::span<const std::size_t> nodes);

struct MdsCheck {
  bool mds = false;
  std::size_t subsets_checked = 0;
  std::vector<std::size_t> failing_nodes;   // 1-based, empty when mds
  std::vector<std::size_t> unresolved;      // sources stuck for the witness
};

// Exhaustive over all C(n,k) column subsets.
MdsCheck validate_mds(const ArrayCode &code);

struct SubsetScan {
  bool all_decode = true;
  std::size_t runs = 0;
  std::vector<std::size_t> failing_cells; // 0-based cell indices of a witness
};

// Peels every r-subset of the n*b cells; stops at the first failure.
SubsetScan scan_cell_subsets(const ArrayCode &code, std::size_t r);

struct ThresholdResult {
  std::optional<std::size_t> threshold; // empty if even all cells fail
  std::size_t runs = 0;
  std::vector<std::size_t> witness_below; // failing (threshold-1)-subset
};

inline constexpr std::uint64_t kDefaultThresholdLimit = 5'000'000;

// Smallest r such that every r-subset of cells peels. Decodability is
// monotone in the cell set, so r is scanned upward from kb. Throws
// PreconditionError when the enumeration would exceed `limit` peeling runs;
// use sampled validation for larger codes.
ThresholdResult recovery_threshold(const ArrayCode &code,
                                   std::uint64_t limit = kDefaultThresholdLimit);

struct SearchOptions {
  std::uint64_t budget = 2'000'000; // cell placements tried
};

struct SearchResult {
  std::optional<ArrayCode> code;
  std::uint64_t placements = 0;
};

// Seeded backtracking search for an [n,k,b,sigma] code that passes
// validate_mds. Rejects parameters beyond max_blocklength before searching.
// An empty result means the budget ran out, not that no code exists.
SearchResult search_code(std::size_t n, std::size_t k, std::size_t b,
                         std::size_t sigma, std::uint64_t seed,
                         SearchOptions options = {});

// Per-node, per-processor work assignment of a coded cluster.
struct ClusterPlan {
  // assignments[node][proc] lists the source block tasks summed by that
  // processor.
  std::vector<std::vector<SourceSet>> assignments;

  std::size_t nodes() const noexcept { return assignments.size(); }
  std::size_t degree(std::size_t node, std::size_t proc) const {
    return assignments[node][proc].size();
  }
  std::size_t node_load(std::size_t node) const;
  std::size_t total_dot_products() const;
};

// Ragged column form shared with asymptotically MDS codes.
ClusterPlan encode_tasks(std::span<const std::vector<SourceSet>> columns,
                         std::size_t source_count,
                         const linalg::PartitionPlan &partition);
ClusterPlan encode_tasks(const ArrayCode &code,
                         const linalg::PartitionPlan &partition);

// Output of one cluster processor: the ring sum of its block products.
template <RingScalar T>
linalg::DenseMatrix<T>
processor_output(const ClusterPlan &plan, std::size_t node, std::size_t proc,
                 const linalg::DenseMatrix<T> &a,
                 const linalg::DenseMatrix<T> &b,
                 const linalg::PartitionPlan &partition) {
  const auto &tasks = plan.assignments[node][proc];
  const auto &first = partition.tasks[tasks.front() - 1];
  linalg::DenseMatrix<T> acc(first.a_cols, first.b_cols);
  for (std::size_t t : tasks)
    acc += linalg::compute_block(a, b, partition.tasks[t - 1]);
  return acc;
}

// What the sink holds once the listed nodes report all their processors.
template <RingScalar T>
std::vector<KnownCell<T>>
collect_nodes(const ClusterPlan &plan, std::span<const std::size_t> nodes,
              const linalg::DenseMatrix<T> &a, const linalg::DenseMatrix<T> &b,
              const linalg::PartitionPlan &partition) {
  std::vector<KnownCell<T>> cells;
  for (std::size_t node : nodes)
    for (std::size_t proc = 0; proc < plan.assignments[node].size(); ++proc)
      cells.push_back({plan.assignments[node][proc],
                       processor_output(plan, node, proc, a, b, partition)});
  return cells;
}

} // namespace codedmm::array
