#include "codedmm/array_code.hpp"
#include "codedmm/asym_code.hpp"
#include "codedmm/baseline_codes.hpp"
#include "codedmm/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace codedmm::experiments {

namespace {

using linalg::DenseMatrix;

// 1-based straggler ids, sorted.
std::vector<std::size_t> pick_stragglers(std::size_t units, std::size_t count,
                                         std::mt19937_64 &rng) {
  std::vector<std::size_t> ids(units);
  std::iota(ids.begin(), ids.end(), 1);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool is_straggler(const std::vector<std::size_t> &ids, std::size_t unit) {
  return std::binary_search(ids.begin(), ids.end(), unit + 1);
}

void compare(SelftestReport &rep, const DenseMatrix<Zq> &got,
             const DenseMatrix<Zq> &truth) {
  for (std::size_t r = 0; r < truth.rows(); ++r)
    for (std::size_t c = 0; c < truth.cols(); ++c)
      if (!(got(r, c) == truth(r, c))) {
        rep.status = SelftestStatus::mismatch;
        rep.detail = fmt::format("decoded product differs at ({}, {})", r, c);
        return;
      }
  rep.status = SelftestStatus::pass;
  rep.detail = "decoded product matches the direct product";
}

std::size_t resolve_stragglers(const SelftestOptions &o, SelftestReport &rep,
                               std::size_t units) {
  const std::size_t count = o.stragglers.value_or(rep.tolerated);
  if (count > units)
    throw PreconditionError(fmt::format(
        "selftest: {} stragglers requested but only {} units", count, units));
  rep.units = units;
  return count;
}

template <class Columns>
void run_array(const SelftestOptions &o, SelftestReport &rep,
               const Columns &columns, std::size_t k, std::size_t b,
               std::mt19937_64 &rng) {
  const std::size_t n = columns.size();
  rep.tolerated = n - k;
  const std::size_t count = resolve_stragglers(o, rep, n);
  const std::size_t sources = k * b;
  const auto A = linalg::random_matrix<Zq>(o.s, sources, rng);
  const auto B = linalg::random_matrix<Zq>(o.s, 3, rng);
  const auto part = linalg::partition_grid(o.s, sources, 3, sources, 1);
  const auto plan = array::encode_tasks(
      std::span<const std::vector<array::SourceSet>>(columns), sources, part);
  rep.stragglers = pick_stragglers(n, count, rng);
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < n; ++i)
    if (!is_straggler(rep.stragglers, i))
      survivors.push_back(i);
  const auto cells = array::collect_nodes(plan, survivors, A, B, part);
  const auto out = array::peel_decode<Zq>(cells, sources);
  rep.peel_steps = out.steps;
  if (!out.complete) {
    rep.status = SelftestStatus::unrecoverable;
    rep.detail = fmt::format("peeling stalled with {} of {} sources unresolved",
                             out.unresolved.size(), sources);
    return;
  }
  std::vector<linalg::SourceBlock<Zq>> blocks;
  for (std::size_t i = 0; i < out.sources.size(); ++i)
    blocks.push_back({i + 1, *out.sources[i]});
  compare(rep, linalg::assemble(blocks, part), linalg::matmul_oracle(A, B));
}

} // namespace

std::string to_string(SelftestStatus s) {
  switch (s) {
  case SelftestStatus::pass:
    return "pass";
  case SelftestStatus::unrecoverable:
    return "unrecoverable";
  case SelftestStatus::mismatch:
    return "mismatch";
  }
  return "?";
}

SelftestReport selftest(const SelftestOptions &o) {
  if (o.s == 0)
    throw PreconditionError("selftest: s must be >= 1");
  std::mt19937_64 rng(o.seed);
  SelftestReport rep;
  switch (o.scheme) {
  case Scheme::amds: {
    const std::size_t n = o.n.value_or(5), k = o.k.value_or(2),
                      b = o.b.value_or(2), sigma = o.sigma.value_or(2);
    std::optional<array::ArrayCode> code;
    if (n == 5 && k == 2 && b == 2 && sigma == 2) {
      code = array::builtin_5222();
    } else {
      code = array::search_code(n, k, b, sigma, o.seed).code;
      if (!code)
        throw PreconditionError(fmt::format(
            "selftest: no [{},{},{},{}] code found within the search budget", n,
            k, b, sigma));
    }
    rep.code = fmt::format("[{},{},{},{}] array code", n, k, b, sigma);
    std::vector<std::vector<array::SourceSet>> columns;
    for (std::size_t i = 0; i < n; ++i) {
      const auto col = code->column(i);
      columns.emplace_back(col.begin(), col.end());
    }
    run_array(o, rep, columns, k, b, rng);
    break;
  }
  case Scheme::asym: {
    const std::size_t n = o.n.value_or(12), k = o.k.value_or(6),
                      b = o.b.value_or(10);
    const auto code = array::build_asym_code(n, k, b, o.epsilon, o.seed);
    rep.code = fmt::format("asymptotic [{},{},{}] code, b' = {:.4g}", n, k, b,
                           code.b_prime());
    run_array(o, rep, code.columns(), k, b, rng);
    break;
  }
  case Scheme::poly: {
    const std::size_t m = o.m, workers = o.n.value_or(10);
    const auto spec = baseline::make_poly_spec<Zq>(m, workers);
    rep.code = fmt::format("polynomial code, m = {}, {} workers", m, workers);
    rep.tolerated = workers - spec.recovery_threshold();
    const std::size_t count = resolve_stragglers(o, rep, workers);
    const auto A = linalg::random_matrix<Zq>(o.s, 2 * m, rng);
    const auto B = linalg::random_matrix<Zq>(o.s, 2 * m, rng);
    const auto enc = baseline::poly_encode(A, B, spec);
    rep.stragglers = pick_stragglers(workers, count, rng);
    std::vector<baseline::WorkerResult<Zq>> results;
    for (std::size_t w = 0; w < workers; ++w)
      if (!is_straggler(rep.stragglers, w))
        results.push_back(baseline::poly_worker(enc.tasks[w]));
    std::shuffle(results.begin(), results.end(), rng);
    try {
      const auto dec = baseline::poly_decode<Zq>(results, spec, enc.layout);
      compare(rep, dec.product, linalg::matmul_oracle(A, B));
    } catch (const InsufficientResults &e) {
      rep.status = SelftestStatus::unrecoverable;
      rep.detail = e.what();
    }
    break;
  }
  case Scheme::matdot: {
    const std::size_t m = o.m, workers = o.n.value_or(5);
    const auto spec = baseline::make_matdot_spec<Zq>(m, workers);
    rep.code = fmt::format("MatDot code, m = {}, {} workers", m, workers);
    rep.tolerated = workers - spec.recovery_threshold();
    const std::size_t count = resolve_stragglers(o, rep, workers);
    const std::size_t rows = o.s * m;
    const auto A = linalg::random_matrix<Zq>(rows, 4, rng);
    const auto B = linalg::random_matrix<Zq>(rows, 3, rng);
    const auto enc = baseline::matdot_encode(A, B, spec);
    rep.stragglers = pick_stragglers(workers, count, rng);
    std::vector<baseline::WorkerResult<Zq>> results;
    for (std::size_t w = 0; w < workers; ++w)
      if (!is_straggler(rep.stragglers, w))
        results.push_back(baseline::matdot_worker(enc.tasks[w]));
    std::shuffle(results.begin(), results.end(), rng);
    try {
      const auto dec = baseline::matdot_decode<Zq>(results, spec);
      compare(rep, dec.product, linalg::matmul_oracle(A, B));
    } catch (const InsufficientResults &e) {
      rep.status = SelftestStatus::unrecoverable;
      rep.detail = e.what();
    }
    break;
  }
  case Scheme::uncoded: {
    const std::size_t k = o.k.value_or(2), b = o.b.value_or(2);
    rep.code = fmt::format("uncoded, {} x {} dot products", k, b);
    rep.tolerated = 0;
    const std::size_t count = resolve_stragglers(o, rep, k * b);
    const auto A = linalg::random_matrix<Zq>(o.s, k, rng);
    const auto B = linalg::random_matrix<Zq>(o.s, b, rng);
    const auto plan = baseline::uncoded_plan(A, B);
    rep.stragglers = pick_stragglers(k * b, count, rng);
    auto blocks = linalg::compute_all_blocks(A, B, plan);
    std::vector<linalg::SourceBlock<Zq>> kept;
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (!is_straggler(rep.stragglers, i))
        kept.push_back(std::move(blocks[i]));
    try {
      compare(rep, baseline::uncoded_assemble(kept, plan),
              linalg::matmul_oracle(A, B));
    } catch (const InsufficientResults &e) {
      rep.status = SelftestStatus::unrecoverable;
      rep.detail = e.what();
    }
    break;
  }
  }
  return rep;
}

} // namespace codedmm::experiments
