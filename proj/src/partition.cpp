#include "codedmm/partition.hpp"

namespace codedmm::linalg {

std::string to_string(PartitionScheme scheme) {
  switch (scheme) {
  case PartitionScheme::square:
    return "square";
  case PartitionScheme::strips:
    return "strips";
  case PartitionScheme::grid:
    return "grid";
  }
  return "unknown";
}

PartitionPlan partition_grid(std::size_t s, std::size_t k, std::size_t b,
                             std::size_t row_groups, std::size_t col_groups) {
  if (row_groups == 0 || col_groups == 0)
    throw PreconditionError("partition: group counts must be positive");
  if (k % row_groups != 0)
    throw PreconditionError("partition: row groups " +
                            std::to_string(row_groups) + " must divide k=" +
                            std::to_string(k));
  if (b % col_groups != 0)
    throw PreconditionError("partition: column groups " +
                            std::to_string(col_groups) + " must divide b=" +
                            std::to_string(b));
  PartitionPlan plan;
  plan.s = s;
  plan.k = k;
  plan.b = b;
  plan.row_groups = row_groups;
  plan.col_groups = col_groups;
  const std::size_t br = k / row_groups;
  const std::size_t bc = b / col_groups;
  plan.tasks.reserve(row_groups * col_groups);
  for (std::size_t i = 0; i < row_groups; ++i)
    for (std::size_t j = 0; j < col_groups; ++j)
      plan.tasks.push_back({i * col_groups + j + 1, i * br, br, j * bc, bc});
  return plan;
}

PartitionPlan partition_shape(std::size_t s, std::size_t k, std::size_t b,
                              PartitionScheme scheme, std::size_t m) {
  if (m == 0)
    throw PreconditionError("partition: m must be positive");
  PartitionPlan plan;
  switch (scheme) {
  case PartitionScheme::square:
    if (k % m != 0)
      throw PreconditionError("partition square: m | k violated (m=" +
                              std::to_string(m) + ", k=" + std::to_string(k) +
                              ")");
    if (b % m != 0)
      throw PreconditionError("partition square: m | b violated (m=" +
                              std::to_string(m) + ", b=" + std::to_string(b) +
                              ")");
    plan = partition_grid(s, k, b, m, m);
    break;
  case PartitionScheme::strips:
    if (b % m != 0)
      throw PreconditionError("partition strips: m | b violated (m=" +
                              std::to_string(m) + ", b=" + std::to_string(b) +
                              ")");
    if (k % b != 0)
      throw PreconditionError("partition strips: b | k violated (b=" +
                              std::to_string(b) + ", k=" + std::to_string(k) +
                              ")");
    // A blocks are mk/b wide (b/m of them), B blocks b/m wide (m of them).
    plan = partition_grid(s, k, b, b / m, m);
    break;
  case PartitionScheme::grid:
    throw PreconditionError("partition: use partition_grid for explicit grids");
  }
  plan.scheme = scheme;
  plan.m = m;
  return plan;
}

} // namespace codedmm::linalg
