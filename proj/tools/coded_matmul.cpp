#include "codedmm/catalog.hpp"
#include "codedmm/errors.hpp"
#include "codedmm/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace ex = codedmm::experiments;
namespace arr = codedmm::array;

namespace {

constexpr int kFailure = 1;
constexpr int kInputError = 2;
constexpr int kUnrecoverable = 3;

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << text;
}

struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_run_flags(CLI::App *cmd, RunFlags &f) {
  cmd->add_option("--seed", f.seed, "RNG seed (default: config, then CODED_MATMUL_SEED, then 1)");
  cmd->add_option("--trials", f.trials, "Monte Carlo trials per point")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "CSV output file (default stdout)");
  cmd->add_option("--threads", f.threads, "worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
}

std::string run_all(std::vector<ex::Scenario> scenarios, const RunFlags &f) {
  std::vector<ex::Row> rows;
  for (auto &sc : scenarios) {
    if (f.trials)
      sc.trials = *f.trials;
    auto part = ex::run_scenario(sc, ex::resolve_seed(f.seed, sc.seed), f.threads);
    rows.insert(rows.end(), std::make_move_iterator(part.begin()),
                std::make_move_iterator(part.end()));
  }
  return ex::to_csv(rows);
}

int validate_catalog(const std::string &path, std::size_t samples,
                     std::uint64_t seed) {
  const auto entries = arr::load_catalog(path);
  bool all_ok = true;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (const auto *code = std::get_if<arr::ArrayCode>(&entries[i])) {
      const auto check = arr::validate_mds(*code);
      all_ok = all_ok && check.mds;
      fmt::print("entry {}: [{},{},{},{}] array code: {} ({} subsets)", i + 1,
                 code->n(), code->k(), code->b(), code->sigma(),
                 check.mds ? "MDS" : "not MDS", check.subsets_checked);
      if (!check.mds)
        fmt::print(", nodes {} leave sources {} unresolved",
                   fmt::join(check.failing_nodes, " "),
                   fmt::join(check.unresolved, " "));
      fmt::print("\n");
    } else {
      const auto &asym = std::get<arr::AsymArrayCode>(entries[i]);
      const auto check = arr::validate_sampled(asym, samples, seed);
      all_ok = all_ok && check.failures == 0;
      fmt::print("entry {}: asymptotic [{},{},{}] code, b' = {:.4g}: {}/{} {} "
                 "subsets fail",
                 i + 1, asym.n(), asym.k(), asym.b(), asym.b_prime(),
                 check.failures, check.checked,
                 check.exhaustive ? "exhaustive" : "sampled");
      if (!check.witness.empty())
        fmt::print(", e.g. nodes {}", fmt::join(check.witness, " "));
      fmt::print("\n");
    }
  }
  if (entries.empty())
    fmt::print("no entries\n");
  return all_ok ? 0 : kFailure;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Coded distributed matrix multiplication: latency and "
               "communication experiments, code validation, self tests"};
  app.require_subcommand(1);

  RunFlags run_flags;
  std::string config_path;
  auto *run = app.add_subcommand("run", "run the scenarios of a config file");
  run->add_option("config", config_path, "scenario config")->required();
  add_run_flags(run, run_flags);

  RunFlags preset_flags;
  std::string preset_name;
  auto *preset = app.add_subcommand("preset", "run a built-in experiment");
  preset->add_option("name", preset_name, "preset")
      ->required()
      ->check(CLI::IsMember(ex::preset_names()));
  add_run_flags(preset, preset_flags);
  bool show_config = false;
  preset->add_flag("--show-config", show_config, "print the preset's config and exit");

  std::string scheme_name;
  ex::SelftestOptions st;
  std::optional<std::uint64_t> st_seed;
  auto *selftest = app.add_subcommand("selftest", "encode, drop stragglers, decode, compare");
  selftest->add_option("scheme", scheme_name, "uncoded | poly | matdot | amds | asym")
      ->required();
  selftest->add_option("--n", st.n, "nodes (array codes) or workers (poly, matdot)");
  selftest->add_option("--k", st.k);
  selftest->add_option("--b", st.b);
  selftest->add_option("--sigma", st.sigma);
  selftest->add_option("--m", st.m, "poly/MatDot split factor")->check(CLI::PositiveNumber);
  selftest->add_option("--epsilon", st.epsilon, "asym coding overhead");
  selftest->add_option("--stragglers", st.stragglers, "default: the most the code tolerates");
  selftest->add_option("--s", st.s, "inner dimension of the operands")->check(CLI::PositiveNumber);
  selftest->add_option("--seed", st_seed);

  auto *code = app.add_subcommand("code", "array code catalogs");
  code->require_subcommand(1);
  std::string catalog_path;
  std::size_t samples = arr::kDefaultValidationSamples;
  std::uint64_t validate_seed = 1;
  auto *validate = code->add_subcommand("validate", "check every catalog entry");
  validate->add_option("catalog", catalog_path)->required();
  validate->add_option("--samples", samples, "k-subsets sampled for asymptotic codes");
  validate->add_option("--seed", validate_seed);

  std::string csv_path, plot_dir = ".";
  auto *plot = app.add_subcommand("plotdata", "split a result CSV into gnuplot series");
  plot->add_option("csv", csv_path)->required();
  plot->add_option("--dir", plot_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      write_output(run_flags.out,
                   run_all(ex::parse_scenarios(read_file(config_path)), run_flags));
    } else if (*preset) {
      if (show_config) {
        std::cout << ex::preset_config(preset_name);
        return 0;
      }
      write_output(preset_flags.out, run_all({ex::preset(preset_name)}, preset_flags));
    } else if (*selftest) {
      const auto scheme = codedmm::latency::parse_scheme(scheme_name);
      if (!scheme) {
        fmt::print(stderr, "unknown scheme '{}'\n", scheme_name);
        return kInputError;
      }
      st.scheme = *scheme;
      st.seed = ex::resolve_seed(st_seed, std::nullopt);
      const auto rep = ex::selftest(st);
      fmt::print("{}: {} stragglers of {} (tolerates {}): {{{}}}\n", rep.code,
                 rep.stragglers.size(), rep.units, rep.tolerated,
                 fmt::join(rep.stragglers, ", "));
      if (st.scheme == codedmm::latency::Scheme::amds ||
          st.scheme == codedmm::latency::Scheme::asym)
        fmt::print("peeling steps: {}\n", rep.peel_steps);
      fmt::print("{}: {}\n", ex::to_string(rep.status), rep.detail);
      switch (rep.status) {
      case ex::SelftestStatus::pass:
        return 0;
      case ex::SelftestStatus::mismatch:
        return kFailure;
      case ex::SelftestStatus::unrecoverable:
        return kUnrecoverable;
      }
    } else if (*validate) {
      return validate_catalog(catalog_path, samples, validate_seed);
    } else if (*plot) {
      const auto series = ex::emit_plotdata(read_file(csv_path));
      std::filesystem::create_directories(plot_dir);
      for (const auto &s : series) {
        const auto path = std::filesystem::path(plot_dir) / s.filename;
        write_output(path.string(), s.content);
        fmt::print("{}\n", path.string());
      }
    }
  } catch (const codedmm::ParseError &e) {
    fmt::print(stderr, "parse error: {}\n", e.what());
    return kInputError;
  } catch (const codedmm::PreconditionError &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  }
  return 0;
}
