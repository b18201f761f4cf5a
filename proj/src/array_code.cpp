#include "codedmm/array_code.hpp"
#include "codedmm/combinatorics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace codedmm::array {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

void normalize_cell(SourceSet &cell, std::size_t source_count,
                    std::size_t where) {
  std::sort(cell.begin(), cell.end());
  if (cell.empty())
    throw PreconditionError("cell " + str(where) + " has no sources");
  if (std::adjacent_find(cell.begin(), cell.end()) != cell.end())
    throw PreconditionError("cell " + str(where) + " repeats a source");
  if (cell.front() == 0 || cell.back() > source_count)
    throw PreconditionError("cell " + str(where) + " references a source outside 1.." +
                            str(source_count));
}

} // namespace

ArrayCode::ArrayCode(std::size_t n, std::size_t k, std::size_t b,
                     std::size_t sigma, std::vector<SourceSet> grid)
    : n_(n), k_(k), b_(b), sigma_(sigma), grid_(std::move(grid)) {
  if (k_ == 0 || b_ == 0 || sigma_ == 0)
    throw PreconditionError("ArrayCode: k, b and sigma must be positive");
  if (n_ < k_)
    throw PreconditionError("ArrayCode: n=" + str(n_) + " < k=" + str(k_));
  if (grid_.size() != n_ * b_)
    throw PreconditionError("ArrayCode: grid has " + str(grid_.size()) +
                            " cells, expected n*b=" + str(n_ * b_));
  std::vector<bool> covered(source_count() + 1, false);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    normalize_cell(grid_[i], source_count(), i);
    if (grid_[i].size() > sigma_)
      throw PreconditionError("ArrayCode: cell " + str(i) + " has degree " +
                              str(grid_[i].size()) + " > sigma=" + str(sigma_));
    for (std::size_t s : grid_[i])
      covered[s] = true;
  }
  for (std::size_t s = 1; s <= source_count(); ++s)
    if (!covered[s])
      throw PreconditionError("ArrayCode: source " + str(s) +
                              " appears in no cell");
}

std::size_t ArrayCode::max_degree() const {
  std::size_t d = 0;
  for (const auto &c : grid_)
    d = std::max(d, c.size());
  return d;
}

ArrayCode builtin_5222() {
  return ArrayCode(5, 2, 2, 2,
                   {{1}, {2, 3},  // node 1
                    {2}, {1, 4},  // node 2
                    {3}, {2, 4},  // node 3
                    {4}, {1, 3},  // node 4
                    {1, 2}, {3, 4}}); // node 5
}

ArrayCode systematic_code(std::size_t k, std::size_t b) {
  std::vector<SourceSet> grid;
  for (std::size_t i = 1; i <= k * b; ++i)
    grid.push_back({i});
  return ArrayCode(k, k, b, 1, std::move(grid));
}

std::size_t max_blocklength(std::size_t k, std::size_t b, std::size_t sigma) {
  if (k == 0 || b == 0 || sigma == 0)
    throw PreconditionError("max_blocklength: k, b, sigma must be positive");
  if (b == 1)
    return k + sigma - 1;
  // sigma < k + (k-1)/(b-1)  <=>  (k - sigma) b + sigma - 1 > 0
  const auto kk = static_cast<long long>(k);
  const auto bb = static_cast<long long>(b);
  const auto ss = static_cast<long long>(sigma);
  const long long den = (kk - ss) * bb + ss - 1;
  if (den <= 0)
    throw PreconditionError("max_blocklength: degree condition sigma < k + "
                            "(k-1)/(b-1) violated (k=" + str(k) + ", b=" +
                            str(b) + ", sigma=" + str(sigma) + ")");
  const long long num = ss * (ss - 1) * (bb - 1);
  return k + sigma - 1 + static_cast<std::size_t>(num / den);
}

std::size_t max_blocklength_asym(std::size_t k, std::size_t b,
                                 std::size_t sigma, double epsilon) {
  if (k == 0 || b == 0)
    throw PreconditionError("max_blocklength_asym: k and b must be positive");
  if (!(epsilon >= 0.0))
    throw PreconditionError("max_blocklength_asym: epsilon must be >= 0");
  if (sigma <= 2)
    throw PreconditionError("max_blocklength_asym: requires sigma > 2");
  const long double kk = k;
  const long double bb = b;
  const long double ss = sigma;
  const long double eps = epsilon;
  const long double b_prime = (1 + eps) * bb;
  if (b_prime <= 1)
    throw PreconditionError("max_blocklength_asym: requires b' = (1+eps) b > 1");
  if (!(ss < (bb * kk - 1) / (b_prime - 1)))
    throw PreconditionError("max_blocklength_asym: requires sigma < (bk-1)/(b'-1)");
  const long double sp = ss * (1 + eps); // sigma'
  if (!(sp < kk))
    throw PreconditionError("max_blocklength_asym: requires sigma(1+eps) < k");
  const long double num =
      bb * (kk * (sp - ss) + (ss - 1) * sp) - (ss - 1) * (1.5L * ss - 1);
  const long double den = bb * (kk - sp) + ss - 1;
  const long double extra = std::floor(num / den + 1e-12L);
  const long double n = kk + ss - 1 + extra;
  return static_cast<std::size_t>(std::max(n, kk));
}

std::vector<SourceSet> cells_of_columns(const ArrayCode &code,
                                        std::span<const std::size_t> nodes) {
  std::vector<SourceSet> cells;
  cells.reserve(nodes.size() * code.b());
  for (std::size_t node : nodes) {
    const auto col = code.column(node);
    cells.insert(cells.end(), col.begin(), col.end());
  }
  return cells;
}

MdsCheck validate_mds(const ArrayCode &code) {
  MdsCheck out;
  out.mds = true;
  for_each_combination(code.n(), code.k(), [&](const auto &nodes) {
    ++out.subsets_checked;
    const auto trace =
        peel_structure(cells_of_columns(code, nodes), code.source_count());
    if (trace.complete)
      return true;
    out.mds = false;
    for (std::size_t v : nodes)
      out.failing_nodes.push_back(v + 1);
    out.unresolved = trace.unresolved;
    return false;
  });
  return out;
}

SubsetScan scan_cell_subsets(const ArrayCode &code, std::size_t r) {
  SubsetScan out;
  const auto &grid = code.grid();
  std::vector<SourceSet> cells;
  for_each_combination(code.cell_count(), r, [&](const auto &idx) {
    ++out.runs;
    cells.clear();
    for (std::size_t i : idx)
      cells.push_back(grid[i]);
    if (peels_completely(cells, code.source_count()))
      return true;
    out.all_decode = false;
    out.failing_cells = idx;
    return false;
  });
  return out;
}

ThresholdResult recovery_threshold(const ArrayCode &code, std::uint64_t limit) {
  ThresholdResult out;
  const std::size_t total = code.cell_count();
  std::uint64_t budget_used = 0;
  std::vector<std::size_t> last_failure;
  for (std::size_t r = code.source_count(); r <= total; ++r) {
    const std::uint64_t cost = binomial(total, r);
    if (cost > limit || budget_used > limit - cost)
      throw PreconditionError(
          "recovery_threshold: exhaustive enumeration exceeds " +
          std::to_string(limit) + " peeling runs at r=" + str(r) +
          "; use sampled validation instead");
    const SubsetScan scan = scan_cell_subsets(code, r);
    budget_used += scan.runs;
    out.runs += scan.runs;
    if (scan.all_decode) {
      out.threshold = r;
      out.witness_below = last_failure;
      return out;
    }
    last_failure = scan.failing_cells;
  }
  return out;
}

// --- search -----------------------------------------------------------------

namespace {

using Mask = std::uint64_t;

// GF(2) independence of a set of masks.
bool independent(std::span<const Mask> vectors) {
  Mask basis[64] = {};
  for (Mask v : vectors) {
    while (v != 0) {
      const int top = 63 - std::countl_zero(v);
      if (basis[top] == 0) {
        basis[top] = v;
        break;
      }
      v ^= basis[top];
    }
    if (v == 0)
      return false;
  }
  return true;
}

bool mask_peels(std::span<const Mask> eqs, Mask all) {
  Mask resolved = 0;
  bool progress = true;
  while (progress && resolved != all) {
    progress = false;
    for (Mask e : eqs) {
      const Mask open = e & ~resolved;
      if (open != 0 && (open & (open - 1)) == 0) {
        resolved |= open;
        progress = true;
      }
    }
  }
  return resolved == all;
}

SourceSet to_sources(Mask m) {
  SourceSet s;
  for (std::size_t i = 0; i < 64; ++i)
    if (m >> i & 1U)
      s.push_back(i + 1);
  return s;
}

class Searcher {
public:
  Searcher(std::size_t n, std::size_t k, std::size_t b, std::size_t sigma,
           std::uint64_t seed, std::uint64_t budget)
      : n_(n), k_(k), b_(b), kb_(k * b), budget_(budget), grid_(n * b, 0) {
    std::vector<Mask> candidates;
    for (std::size_t d = 1; d <= std::min(sigma, kb_); ++d)
      for_each_combination(kb_, d, [&](const auto &idx) {
        Mask m = 0;
        for (std::size_t i : idx)
          m |= Mask{1} << i;
        candidates.push_back(m);
        return true;
      });
    std::mt19937_64 rng(seed);
    order_.resize(n * b);
    for (std::size_t cell = 0; cell < n * b; ++cell) {
      order_[cell] = candidates;
      std::shuffle(order_[cell].begin(), order_[cell].end(), rng);
      const std::size_t node = cell / b;
      if (node < k) {
        // Try the systematic assignment first in the first k columns.
        const Mask sys = Mask{1} << cell;
        auto it = std::find(order_[cell].begin(), order_[cell].end(), sys);
        std::rotate(order_[cell].begin(), it, it + 1);
      }
    }
    all_ = kb_ == 64 ? ~Mask{0} : (Mask{1} << kb_) - 1;
  }

  bool run() { return place(0); }
  std::uint64_t placements() const { return placements_; }
  const std::vector<Mask> &grid() const { return grid_; }

private:
  bool place(std::size_t cell) {
    if (cell == grid_.size())
      return true;
    const std::size_t node = cell / b_;
    const std::size_t proc = cell % b_;
    for (Mask m : order_[cell]) {
      if (exhausted_)
        return false;
      if (proc > 0 && m <= grid_[cell - 1])
        continue; // cells within a column kept in increasing order
      if (++placements_ > budget_) {
        exhausted_ = true;
        return false;
      }
      grid_[cell] = m;
      if (!partial_independent(node, proc))
        continue;
      if (proc + 1 == b_ && node + 1 >= k_ && !column_peels(node))
        continue;
      if (place(cell + 1))
        return true;
    }
    grid_[cell] = 0;
    return false;
  }

  void append_column(std::vector<Mask> &out, std::size_t node,
                     std::size_t upto) const {
    for (std::size_t p = 0; p < upto; ++p)
      out.push_back(grid_[node * b_ + p]);
  }

  // Any k columns must be independent over GF(2) for peeling to finish, so
  // every partial selection of at most k columns must be too.
  bool partial_independent(std::size_t node, std::size_t proc) const {
    std::vector<Mask> sel;
    if (node < k_) {
      for (std::size_t c = 0; c < node; ++c)
        append_column(sel, c, b_);
      append_column(sel, node, proc + 1);
      return independent(sel);
    }
    return for_each_combination(node, k_ - 1, [&](const auto &others) {
      sel.clear();
      for (std::size_t c : others)
        append_column(sel, c, b_);
      append_column(sel, node, proc + 1);
      return independent(sel);
    });
  }

  bool column_peels(std::size_t node) const {
    std::vector<Mask> sel;
    return for_each_combination(node, k_ - 1, [&](const auto &others) {
      sel.clear();
      for (std::size_t c : others)
        append_column(sel, c, b_);
      append_column(sel, node, b_);
      return mask_peels(sel, all_);
    });
  }

  std::size_t n_, k_, b_, kb_;
  std::uint64_t budget_;
  std::uint64_t placements_ = 0;
  bool exhausted_ = false;
  Mask all_ = 0;
  std::vector<Mask> grid_;
  std::vector<std::vector<Mask>> order_;
};

} // namespace

SearchResult search_code(std::size_t n, std::size_t k, std::size_t b,
                         std::size_t sigma, std::uint64_t seed,
                         SearchOptions options) {
  if (k == 0 || b == 0 || sigma == 0)
    throw PreconditionError("search_code: k, b, sigma must be positive");
  if (n < k)
    throw PreconditionError("search_code: n < k");
  if (k * b > 64)
    throw PreconditionError("search_code: kb > 64 is beyond desk scale");
  if (n > k) {
    const std::size_t bound = max_blocklength(k, b, sigma);
    if (n > bound)
      throw PreconditionError("search_code: n=" + str(n) +
                              " exceeds the blocklength bound " + str(bound));
  }
  if (binomial(k * b, std::min(sigma, k * b)) > 200'000)
    throw PreconditionError("search_code: candidate cell set too large");

  Searcher searcher(n, k, b, sigma, seed, options.budget);
  SearchResult out;
  const bool found = searcher.run();
  out.placements = searcher.placements();
  if (!found)
    return out;
  std::vector<SourceSet> grid;
  for (Mask m : searcher.grid())
    grid.push_back(to_sources(m));
  out.code.emplace(n, k, b, sigma, std::move(grid));
  return out;
}

// --- cluster plans ------------------------------------------------------------

std::size_t ClusterPlan::node_load(std::size_t node) const {
  std::size_t load = 0;
  for (const auto &cell : assignments[node])
    load += cell.size();
  return load;
}

std::size_t ClusterPlan::total_dot_products() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < nodes(); ++i)
    total += node_load(i);
  return total;
}

ClusterPlan encode_tasks(std::span<const std::vector<SourceSet>> columns,
                         std::size_t source_count,
                         const linalg::PartitionPlan &partition) {
  if (partition.task_count() != source_count)
    throw PreconditionError("encode_tasks: code covers " + str(source_count) +
                            " sources but partition supplies " +
                            str(partition.task_count()) + " block tasks");
  ClusterPlan plan;
  plan.assignments.assign(columns.begin(), columns.end());
  return plan;
}

ClusterPlan encode_tasks(const ArrayCode &code,
                         const linalg::PartitionPlan &partition) {
  std::vector<std::vector<SourceSet>> columns;
  for (std::size_t i = 0; i < code.n(); ++i) {
    const auto col = code.column(i);
    columns.emplace_back(col.begin(), col.end());
  }
  return encode_tasks(columns, code.source_count(), partition);
}

} // namespace codedmm::array
