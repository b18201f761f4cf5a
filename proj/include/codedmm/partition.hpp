#pragma once

#include "codedmm/dense_matrix.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace codedmm::linalg {

enum class PartitionScheme {
  // A and B each split into m column groups; m^2 block products.
  square,
  // A split into groups of mk/b columns, B into groups of b/m columns;
  // b block products.
  strips,
  // Explicit row_groups x col_groups grid (plumbing for the other two and for
  // one-dot-product-per-source layouts).
  grid,
};

std::string to_string(PartitionScheme scheme);

// One block product A_blk^T B_blk; 1-based `index` matches v_1..v_kb.
struct TaskDescriptor {
  std::size_t index = 0;
  std::size_t a_col_begin = 0;
  std::size_t a_cols = 0;
  std::size_t b_col_begin = 0;
  std::size_t b_cols = 0;
};

struct PartitionPlan {
  PartitionScheme scheme = PartitionScheme::grid;
  std::size_t m = 1;
  std::size_t s = 0; // shared inner dimension
  std::size_t k = 0; // columns of A
  std::size_t b = 0; // columns of B
  std::size_t row_groups = 1;
  std::size_t col_groups = 1;
  std::vector<TaskDescriptor> tasks; // row-group-major order

  std::size_t block_rows() const { return k / row_groups; }
  std::size_t block_cols() const { return b / col_groups; }
  std::size_t task_count() const { return tasks.size(); }
};

PartitionPlan partition_grid(std::size_t s, std::size_t k, std::size_t b,
                             std::size_t row_groups, std::size_t col_groups);

// Throws PreconditionError naming the violated divisibility constraint.
PartitionPlan partition_shape(std::size_t s, std::size_t k, std::size_t b,
                              PartitionScheme scheme, std::size_t m);

template <RingScalar T>
PartitionPlan partition(const DenseMatrix<T> &a, const DenseMatrix<T> &b,
                        PartitionScheme scheme, std::size_t m) {
  if (a.rows() != b.rows())
    throw DimensionError("partition: A and B disagree on inner dimension");
  return partition_shape(a.rows(), a.cols(), b.cols(), scheme, m);
}

template <RingScalar T> struct SourceBlock {
  std::size_t index = 0;
  DenseMatrix<T> value;
};

template <RingScalar T>
DenseMatrix<T> a_block(const DenseMatrix<T> &a, const TaskDescriptor &t) {
  return a.block(0, t.a_col_begin, a.rows(), t.a_cols);
}

template <RingScalar T>
DenseMatrix<T> b_block(const DenseMatrix<T> &b, const TaskDescriptor &t) {
  return b.block(0, t.b_col_begin, b.rows(), t.b_cols);
}

template <RingScalar T>
DenseMatrix<T> compute_block(const DenseMatrix<T> &a, const DenseMatrix<T> &b,
                             const TaskDescriptor &t) {
  return matmul_oracle(a_block(a, t), b_block(b, t));
}

template <RingScalar T>
std::vector<SourceBlock<T>> compute_all_blocks(const DenseMatrix<T> &a,
                                               const DenseMatrix<T> &b,
                                               const PartitionPlan &plan) {
  std::vector<SourceBlock<T>> out;
  out.reserve(plan.tasks.size());
  for (const auto &t : plan.tasks)
    out.push_back({t.index, compute_block(a, b, t)});
  return out;
}

// Places every source block at its task's position in A^T B.
template <RingScalar T>
DenseMatrix<T> assemble(const std::vector<SourceBlock<T>> &blocks,
                        const PartitionPlan &plan) {
  const std::size_t count = plan.tasks.size();
  std::vector<bool> seen(count + 1, false);
  DenseMatrix<T> out(plan.k, plan.b);
  for (const auto &blk : blocks) {
    if (blk.index == 0 || blk.index > count)
      throw PreconditionError("assemble: block index " +
                              std::to_string(blk.index) + " outside 1.." +
                              std::to_string(count));
    if (seen[blk.index])
      throw PreconditionError("assemble: duplicate block index " +
                              std::to_string(blk.index));
    seen[blk.index] = true;
    const auto &t = plan.tasks[blk.index - 1];
    if (blk.value.rows() != t.a_cols || blk.value.cols() != t.b_cols)
      throw DimensionError("assemble: block " + std::to_string(blk.index) +
                           " has wrong shape");
    out.set_block(t.a_col_begin, t.b_col_begin, blk.value);
  }
  for (std::size_t i = 1; i <= count; ++i)
    if (!seen[i])
      throw PreconditionError("assemble: missing block index " +
                              std::to_string(i));
  return out;
}

} // namespace codedmm::linalg
