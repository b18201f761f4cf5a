#pragma once

#include "codedmm/dense_matrix.hpp"
#include "codedmm/errors.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace codedmm::array {

// Sorted, duplicate-free 1-based source indices of one coded cell.
using SourceSet = std::vector<std::size_t>;

struct PeelStep {
  std::size_t equation = 0; // position in the input span
  std::size_t source = 0;   // 1-based source it resolved
};

// Outcome of peeling on the equation structure alone.
struct PeelTrace {
  bool complete = false;
  std::vector<PeelStep> steps;          // in solve order
  std::vector<std::size_t> unresolved;  // 1-based, ascending
  std::vector<bool> used;               // equation solved a source
  std::size_t additions = 0;            // block subtractions the replay costs

  std::size_t resolved_count(std::size_t source_count) const {
    return source_count - unresolved.size();
  }
};

// Iterative degree-one elimination. Among ready equations the one with the
// smallest `priority` (default: its position) is solved first. Sources outside
// 1..source_count are rejected.
PeelTrace peel_structure(std::span<const SourceSet> equations,
                         std::size_t source_count,
                         std::span<const std::size_t> priority = {});

// Cheaper yes/no form used by subset enumeration.
bool peels_completely(std::span<const SourceSet> equations,
                      std::size_t source_count);

template <RingScalar T> struct KnownCell {
  SourceSet sources;
  linalg::DenseMatrix<T> value;
};

template <RingScalar T> struct PeelOutcome {
  bool complete = false;
  // sources[i] holds v_{i+1} once resolved.
  std::vector<std::optional<linalg::DenseMatrix<T>>> sources;
  std::vector<std::size_t> unresolved;
  std::size_t additions = 0;
  std::size_t steps = 0;
};

// Recovers source blocks from coded cells. Cells are ring sums of their
// sources, so solving a cell subtracts the already-known members. Every
// equation left fully determined but unused is re-checked; a mismatch throws
// IntegrityError.
template <RingScalar T>
PeelOutcome<T> peel_decode(std::span<const KnownCell<T>> known,
                           std::size_t source_count,
                           std::span<const std::size_t> priority = {}) {
  std::vector<SourceSet> eqs;
  eqs.reserve(known.size());
  for (const auto &c : known)
    eqs.push_back(c.sources);
  for (std::size_t i = 1; i < known.size(); ++i)
    if (!known[i].value.same_shape(known[0].value))
      throw DimensionError("peel_decode: cell values differ in shape");

  const PeelTrace trace = peel_structure(eqs, source_count, priority);

  PeelOutcome<T> out;
  out.sources.resize(source_count);
  for (const auto &step : trace.steps) {
    const auto &cell = known[step.equation];
    linalg::DenseMatrix<T> v = cell.value;
    for (std::size_t s : cell.sources) {
      if (s == step.source)
        continue;
      v -= *out.sources[s - 1];
      ++out.additions;
    }
    out.sources[step.source - 1] = std::move(v);
  }
  out.steps = trace.steps.size();

  for (std::size_t e = 0; e < known.size(); ++e) {
    if (trace.used[e])
      continue;
    bool determined = true;
    for (std::size_t s : known[e].sources)
      determined = determined && out.sources[s - 1].has_value();
    if (!determined)
      continue;
    linalg::DenseMatrix<T> sum(known[e].value.rows(), known[e].value.cols());
    for (std::size_t s : known[e].sources)
      sum += *out.sources[s - 1];
    if (!(sum == known[e].value))
      throw IntegrityError("peel_decode: redundant cell " + std::to_string(e) +
                           " disagrees with recovered sources");
  }

  out.complete = trace.complete;
  out.unresolved = trace.unresolved;
  return out;
}

} // namespace codedmm::array
