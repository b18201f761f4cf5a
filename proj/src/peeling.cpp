#include "codedmm/peeling.hpp"

#include <functional>
#include <queue>
#include <utility>

namespace codedmm::array {

namespace {

void check_sources(std::span<const SourceSet> equations,
                   std::size_t source_count) {
  for (std::size_t e = 0; e < equations.size(); ++e)
    for (std::size_t s : equations[e])
      if (s == 0 || s > source_count)
        throw PreconditionError("peel: equation " + std::to_string(e) +
                                " references source " + std::to_string(s) +
                                " outside 1.." + std::to_string(source_count));
}

} // namespace

PeelTrace peel_structure(std::span<const SourceSet> equations,
                         std::size_t source_count,
                         std::span<const std::size_t> priority) {
  check_sources(equations, source_count);
  if (!priority.empty() && priority.size() != equations.size())
    throw PreconditionError("peel: priority size must match equation count");

  const std::size_t ne = equations.size();
  std::vector<std::vector<std::size_t>> touching(source_count + 1);
  std::vector<std::size_t> remaining(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    remaining[e] = equations[e].size();
    for (std::size_t s : equations[e])
      touching[s].push_back(e);
  }

  auto rank = [&](std::size_t e) { return priority.empty() ? e : priority[e]; };
  using Entry = std::pair<std::size_t, std::size_t>; // (rank, equation)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (std::size_t e = 0; e < ne; ++e)
    if (remaining[e] == 1)
      ready.emplace(rank(e), e);

  std::vector<bool> resolved(source_count + 1, false);
  PeelTrace trace;
  trace.used.assign(ne, false);
  std::size_t resolved_count = 0;

  while (!ready.empty() && resolved_count < source_count) {
    const std::size_t e = ready.top().second;
    ready.pop();
    if (remaining[e] != 1)
      continue;
    std::size_t target = 0;
    for (std::size_t s : equations[e])
      if (!resolved[s]) {
        target = s;
        break;
      }
    resolved[target] = true;
    ++resolved_count;
    trace.used[e] = true;
    trace.steps.push_back({e, target});
    trace.additions += equations[e].size() - 1;
    for (std::size_t f : touching[target]) {
      --remaining[f];
      if (remaining[f] == 1)
        ready.emplace(rank(f), f);
    }
  }

  for (std::size_t s = 1; s <= source_count; ++s)
    if (!resolved[s])
      trace.unresolved.push_back(s);
  trace.complete = trace.unresolved.empty();
  return trace;
}

bool peels_completely(std::span<const SourceSet> equations,
                      std::size_t source_count) {
  return peel_structure(equations, source_count).complete;
}

} // namespace codedmm::array
