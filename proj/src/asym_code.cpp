#include "codedmm/asym_code.hpp"
#include "codedmm/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace codedmm::array {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

std::vector<SourceSet> cells_of(const std::vector<std::vector<SourceSet>> &cols,
                                std::span<const std::size_t> nodes) {
  std::vector<SourceSet> cells;
  for (std::size_t node : nodes)
    cells.insert(cells.end(), cols[node].begin(), cols[node].end());
  return cells;
}

std::vector<std::size_t> random_subset(std::size_t n, std::size_t k,
                                       std::mt19937_64 &rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

// Calls fn(subset) over the subsets a validation pass examines.
template <typename Fn>
bool for_each_validation_subset(std::size_t n, std::size_t k,
                                std::size_t samples, std::uint64_t seed,
                                bool &exhaustive, Fn &&fn) {
  exhaustive = binomial(n, k) <= samples;
  if (exhaustive)
    return for_each_combination(n, k, fn);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < samples; ++i)
    if (!fn(random_subset(n, k, rng)))
      return false;
  return true;
}

// Equal column sizes at desk scale: the exact search already yields an MDS
// array code, which random repair rarely reaches.
std::optional<AsymArrayCode> search_small(std::size_t n, std::size_t k,
                                          std::size_t b, std::size_t sigma,
                                          std::uint64_t seed) {
  std::optional<ArrayCode> code;
  try {
    code = search_code(n, k, b, sigma, seed).code;
  } catch (const PreconditionError &) {
    return std::nullopt;
  }
  if (!code)
    return std::nullopt;
  std::vector<std::vector<SourceSet>> cols(n);
  for (std::size_t i = 0; i < n; ++i)
    cols[i].assign(code->column(i).begin(), code->column(i).end());
  return AsymArrayCode(n, k, b, std::move(cols));
}

constexpr std::size_t kValidationRounds = 8;

// Peeling over the cells of selected columns without materializing them.
// Keeps per-equation unknown counts and XOR of unknown ids, so a degree-one
// equation names its source directly.
class ColumnPeeler {
public:
  explicit ColumnPeeler(std::size_t source_count) : kb_(source_count) {}

  // Fills used(node, j) flags when `used` is non-null.
  bool run(const std::vector<std::vector<SourceSet>> &cols,
           std::span<const std::size_t> nodes,
           std::vector<std::vector<char>> *used = nullptr) {
    eq_node_.clear();
    eq_cell_.clear();
    for (std::size_t node : nodes)
      for (std::size_t j = 0; j < cols[node].size(); ++j) {
        eq_node_.push_back(node);
        eq_cell_.push_back(j);
      }
    const std::size_t ne = eq_node_.size();
    offset_.assign(kb_ + 2, 0);
    count_.resize(ne);
    xor_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto &cell = cols[eq_node_[e]][eq_cell_[e]];
      count_[e] = cell.size();
      std::size_t x = 0;
      for (std::size_t s : cell) {
        ++offset_[s + 1];
        x ^= s;
      }
      xor_[e] = x;
    }
    for (std::size_t s = 1; s <= kb_ + 1; ++s)
      offset_[s] += offset_[s - 1];
    incidence_.resize(offset_[kb_ + 1]);
    fill_ = offset_;
    for (std::size_t e = 0; e < ne; ++e)
      for (std::size_t s : cols[eq_node_[e]][eq_cell_[e]])
        incidence_[fill_[s]++] = e;

    resolved_.assign(kb_ + 1, 0);
    stack_.clear();
    for (std::size_t e = 0; e < ne; ++e)
      if (count_[e] == 1)
        stack_.push_back(e);
    std::size_t done = 0;
    while (!stack_.empty() && done < kb_) {
      const std::size_t e = stack_.back();
      stack_.pop_back();
      if (count_[e] != 1)
        continue;
      const std::size_t s = xor_[e];
      resolved_[s] = 1;
      ++done;
      if (used != nullptr)
        (*used)[eq_node_[e]][eq_cell_[e]] = 1;
      for (std::size_t i = offset_[s]; i < offset_[s + 1]; ++i) {
        const std::size_t f = incidence_[i];
        --count_[f];
        xor_[f] ^= s;
        if (count_[f] == 1)
          stack_.push_back(f);
      }
    }
    return done == kb_;
  }

private:
  std::size_t kb_;
  std::vector<std::size_t> eq_node_, eq_cell_, count_, xor_, offset_, fill_,
      incidence_, stack_;
  std::vector<char> resolved_;
};

} // namespace

AsymArrayCode::AsymArrayCode(std::size_t n, std::size_t k, std::size_t b,
                             std::vector<std::vector<SourceSet>> columns)
    : k_(k), b_(b), columns_(std::move(columns)) {
  if (k_ == 0 || b_ == 0)
    throw PreconditionError("AsymArrayCode: k and b must be positive");
  if (columns_.size() != n)
    throw PreconditionError("AsymArrayCode: expected " + str(n) +
                            " columns, got " + str(columns_.size()));
  if (n < k_)
    throw PreconditionError("AsymArrayCode: n < k");
  std::vector<bool> covered(source_count() + 1, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (columns_[i].empty())
      throw PreconditionError("AsymArrayCode: column " + str(i + 1) +
                              " is empty");
    for (auto &cell : columns_[i]) {
      std::sort(cell.begin(), cell.end());
      if (cell.empty() || cell.front() == 0 || cell.back() > source_count() ||
          std::adjacent_find(cell.begin(), cell.end()) != cell.end())
        throw PreconditionError("AsymArrayCode: malformed cell in column " +
                                str(i + 1));
      for (std::size_t s : cell)
        covered[s] = true;
    }
  }
  for (std::size_t s = 1; s <= source_count(); ++s)
    if (!covered[s])
      throw PreconditionError("AsymArrayCode: source " + str(s) +
                              " appears in no cell");
}

std::vector<std::size_t> AsymArrayCode::column_sizes() const {
  std::vector<std::size_t> sizes;
  for (const auto &c : columns_)
    sizes.push_back(c.size());
  return sizes;
}

std::size_t AsymArrayCode::total_cells() const {
  std::size_t total = 0;
  for (const auto &c : columns_)
    total += c.size();
  return total;
}

double AsymArrayCode::b_prime() const {
  return static_cast<double>(total_cells()) / static_cast<double>(n());
}

std::size_t AsymArrayCode::max_degree() const {
  std::size_t d = 0;
  for (const auto &col : columns_)
    for (const auto &cell : col)
      d = std::max(d, cell.size());
  return d;
}

linalg::DenseMatrix<int> AsymArrayCode::generator_column(std::size_t i) const {
  const auto &col = columns_.at(i);
  linalg::DenseMatrix<int> g(source_count(), col.size());
  for (std::size_t j = 0; j < col.size(); ++j)
    for (std::size_t s : col[j])
      g(s - 1, j) = 1;
  return g;
}

linalg::DenseMatrix<int> AsymArrayCode::generator() const {
  linalg::DenseMatrix<int> g(source_count(), total_cells());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n(); ++i) {
    g.set_block(0, offset, generator_column(i));
    offset += columns_[i].size();
  }
  return g;
}

std::optional<ArrayCode> AsymArrayCode::to_array_code() const {
  for (const auto &col : columns_)
    if (col.size() != b_)
      return std::nullopt;
  std::vector<SourceSet> grid;
  for (const auto &col : columns_)
    grid.insert(grid.end(), col.begin(), col.end());
  return ArrayCode(n(), k_, b_, max_degree(), std::move(grid));
}

double coding_overhead(const AsymArrayCode &code) {
  return code.b_prime() / static_cast<double>(code.b()) - 1.0;
}

SampledValidation validate_sampled(const AsymArrayCode &code,
                                   std::size_t samples, std::uint64_t seed) {
  SampledValidation out;
  for_each_validation_subset(
      code.n(), code.k(), samples, seed, out.exhaustive,
      [&](const std::vector<std::size_t> &nodes) {
        ++out.checked;
        if (!peels_completely(cells_of(code.columns(), nodes),
                              code.source_count())) {
          if (out.failures == 0)
            for (std::size_t v : nodes)
              out.witness.push_back(v + 1);
          ++out.failures;
        }
        return true;
      });
  return out;
}

AsymArrayCode build_asym_code(std::size_t n, std::size_t k, std::size_t b,
                              double epsilon_target, std::uint64_t seed,
                              AsymBuildOptions options) {
  if (n == 0 || k == 0 || b == 0)
    throw PreconditionError("build_asym_code: n, k, b must be >= 1");
  if (n < k)
    throw PreconditionError("build_asym_code: n < k");
  if (!(epsilon_target >= 0.0))
    throw PreconditionError("build_asym_code: epsilon_target must be >= 0");
  if (options.sigma == 0)
    throw PreconditionError("build_asym_code: sigma must be >= 1");

  const std::size_t kb = k * b;
  const auto total = static_cast<std::size_t>(
      std::llround(static_cast<double>(n * b) * (1.0 + epsilon_target)));
  const std::size_t max_deg = std::min<std::size_t>(
      kb, static_cast<std::size_t>(std::ceil(
              static_cast<double>(options.sigma) * (1.0 + epsilon_target) -
              1e-9)));

  if (total == n * b) {
    if (auto found = search_small(n, k, b, options.sigma, seed))
      return *found;
  }

  std::mt19937_64 rng(seed);
  std::vector<std::vector<SourceSet>> cols(n);

  // Truncated soliton over 1..max_deg with extra weight on degree one, the
  // usual shape for peeling decoders.
  std::vector<double> weights(max_deg + 1, 0.0);
  weights[1] = 2.0 / static_cast<double>(max_deg);
  for (std::size_t d = 2; d <= max_deg; ++d)
    weights[d] = 1.0 / static_cast<double>(d * (d - 1));
  std::discrete_distribution<std::size_t> degree(weights.begin(),
                                                 weights.end());

  // Sources are dealt from a reshuffled deck so coverage stays even.
  std::vector<std::size_t> deck;
  std::size_t dealt = 0;
  auto next_source = [&] {
    if (dealt == deck.size()) {
      deck.resize(kb);
      std::iota(deck.begin(), deck.end(), std::size_t{1});
      std::shuffle(deck.begin(), deck.end(), rng);
      dealt = 0;
    }
    return deck[dealt++];
  };
  auto random_cell = [&] {
    const std::size_t d = degree(rng);
    SourceSet cell;
    while (cell.size() < d) {
      const std::size_t s = next_source();
      if (std::find(cell.begin(), cell.end(), s) == cell.end())
        cell.push_back(s);
    }
    std::sort(cell.begin(), cell.end());
    return cell;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t size = std::max<std::size_t>(1, total / n + (i < total % n));
    for (std::size_t j = 0; j < size; ++j)
      cols[i].push_back(random_cell());
  }

  auto pick_index = [&](std::size_t bound) {
    std::uniform_int_distribution<std::size_t> d(0, bound - 1);
    return d(rng);
  };
  ColumnPeeler peeler(kb);

  // Each round fixes a validation set (every k-subset, or a fresh sample) and
  // runs a local search on it: rewrite one cell of a failing subset so that
  // subset advances, keep the change unless the failure count grows. A round
  // that starts with zero failures ends the build.
  std::size_t proposals = 0;
  for (std::size_t round = 0; round < kValidationRounds; ++round) {
    std::vector<std::vector<std::size_t>> subsets;
    bool exhaustive = false;
    for_each_validation_subset(
        n, k, options.samples, seed ^ (0x9e3779b97f4a7c15ULL * (round + 1)),
        exhaustive, [&](const std::vector<std::size_t> &nodes) {
          subsets.push_back(nodes);
          return true;
        });
    // A decoding subset can only break when a cell it used is rewritten, so
    // each subset remembers which cells its peel consumed.
    auto fresh_used = [&] {
      std::vector<std::vector<char>> used(n);
      for (std::size_t i = 0; i < n; ++i)
        used[i].assign(cols[i].size(), 0);
      return used;
    };
    std::vector<std::vector<std::vector<char>>> used(subsets.size());
    std::vector<std::vector<std::size_t>> containing(n);
    std::vector<char> failing(subsets.size(), 0);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      for (std::size_t node : subsets[i])
        containing[node].push_back(i);
      used[i] = fresh_used();
      failing[i] = !peeler.run(cols, subsets[i], &used[i]);
      failures += failing[i];
    }
    if (failures == 0)
      return AsymArrayCode(n, k, b, std::move(cols));

    while (failures > 0 && proposals < options.repairs) {
      ++proposals;
      std::size_t f = pick_index(subsets.size());
      while (!failing[f])
        f = (f + 1) % subsets.size();
      const auto &nodes = subsets[f];
      const auto trace = peel_structure(cells_of(cols, nodes), kb);

      std::vector<std::pair<std::size_t, std::size_t>> idle;
      std::size_t eq = 0;
      for (std::size_t node : nodes)
        for (std::size_t j = 0; j < cols[node].size(); ++j, ++eq)
          if (!trace.used[eq])
            idle.emplace_back(node, j);
      if (idle.empty())
        for (std::size_t node : nodes)
          for (std::size_t j = 0; j < cols[node].size(); ++j)
            idle.emplace_back(node, j);
      const auto [node, j] = idle[pick_index(idle.size())];

      // One unresolved source plus sources this subset already knows, so the
      // new cell is immediately solvable here.
      SourceSet cell{trace.unresolved[pick_index(trace.unresolved.size())]};
      std::vector<std::size_t> known;
      for (const auto &step : trace.steps)
        known.push_back(step.source);
      const std::size_t d = std::min(degree(rng), known.size() + 1);
      std::shuffle(known.begin(), known.end(), rng);
      cell.insert(cell.end(), known.begin(),
                  known.begin() + static_cast<std::ptrdiff_t>(d - 1));
      std::sort(cell.begin(), cell.end());

      std::swap(cols[node][j], cell);
      std::size_t after = failures;
      struct Recheck {
        std::size_t subset;
        char failing;
        std::vector<std::vector<char>> used;
      };
      std::vector<Recheck> changed;
      for (std::size_t i : containing[node]) {
        if (!failing[i] && !used[i][node][j])
          continue;
        Recheck r{i, 0, fresh_used()};
        r.failing = !peeler.run(cols, subsets[i], &r.used);
        after = after + r.failing - failing[i];
        changed.push_back(std::move(r));
      }
      if (after <= failures) {
        for (auto &r : changed) {
          failing[r.subset] = r.failing;
          used[r.subset] = std::move(r.used);
        }
        failures = after;
      } else {
        std::swap(cols[node][j], cell);
      }
    }
    if (failures > 0)
      break;
  }
  throw PreconditionError("build_asym_code: sampled validation still failing "
                          "after " + str(options.repairs) + " repair proposals");
}

} // namespace codedmm::array
