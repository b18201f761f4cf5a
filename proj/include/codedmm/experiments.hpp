#pragma once

#include "codedmm/latency.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codedmm::experiments {

using latency::LatencyParams;
using latency::Scheme;

enum class Sweep { k, p_equals_c, epsilon, comm_cost };

std::string to_string(Sweep s);
std::optional<Sweep> parse_sweep(std::string_view name);

// How many nodes a coded scheme gets at a sweep point.
struct StragglerRule {
  enum class Kind { eq2, eq4, ratio, fixed };
  Kind kind = Kind::eq2;
  double value = 0.0; // ratio: fraction of k; fixed: t = n - k

  // n for the given point; throws PreconditionError when the blocklength bound
  // does not apply.
  std::size_t blocklength(const LatencyParams &params) const;
  std::string describe() const;
};

// eq2 | eq4 | ratio:X | fixed:T
std::optional<StragglerRule> parse_straggler_rule(std::string_view text);

// A sweep over `values` for each scheme and each (b, epsilon) pair.
// For Sweep::comm_cost the values are k and the reported sweep value is the
// scheme's total normalized communication overhead.
struct Scenario {
  std::string name = "scenario";
  std::vector<Scheme> schemes;
  Sweep sweep = Sweep::k;
  std::vector<double> values;
  LatencyParams base; // k, c, p, sigma, mu
  std::vector<std::size_t> b_values{20};
  std::vector<double> epsilon_values{0.0};
  std::size_t trials = 10'000;
  std::optional<std::uint64_t> seed;
  StragglerRule stragglers;
  std::map<Scheme, StragglerRule> overrides;

  const StragglerRule &rule_for(Scheme s) const;
};

// Flat key = value text, one or more [scenario] sections, '#' comments.
// Throws ParseError carrying the line of the offending key.
std::vector<Scenario> parse_scenarios(std::string_view text);

// fig1, fig2, fig4, fig5, table4.
const std::vector<std::string> &preset_names();
std::string preset_config(std::string_view name);
Scenario preset(std::string_view name);

// CODED_MATMUL_SEED, when set and numeric.
std::optional<std::uint64_t> seed_from_env();
// Command line, then config, then environment, then 1.
std::uint64_t resolve_seed(std::optional<std::uint64_t> cli,
                           std::optional<std::uint64_t> config);

struct Row {
  std::string scenario;
  Scheme scheme = Scheme::uncoded;
  Sweep sweep = Sweep::k;
  double sweep_value = 0.0;
  LatencyParams params;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double pred_harmonic = 0.0;
  double pred_natural = 0.0;
  double mc_encode = 0.0;
  double mc_parallel = 0.0;
  double mc_decode = 0.0;
  double overhead_ms = 0.0;
  double overhead_sm = 0.0;
  std::string error; // precondition violation at this point, else empty

  std::size_t t() const;
  double comm_cost() const { return overhead_ms + overhead_sm; }
};

// Rows ordered by b, epsilon, scheme, then sweep value. Points that violate a
// scheme's preconditions produce a row with only `error` filled.
std::vector<Row> run_scenario(const Scenario &scenario, std::uint64_t seed,
                              std::size_t threads = 1);

inline constexpr std::string_view kCsvSchema = "# coded_matmul csv v1";

std::string csv_header();
std::string csv_row(const Row &row);
// Schema comment, header, rows.
std::string to_csv(const std::vector<Row> &rows);

struct PlotSeries {
  std::string filename; // <scenario>_<scheme>[_b<b>][_eps<e>].dat
  std::string content;
};

// One gnuplot-ready file per series: sweep value, MC mean, harmonic closed
// form, log10 of the MC mean. Error rows are skipped. Throws ParseError on
// malformed input; empty input gives no series.
std::vector<PlotSeries> emit_plotdata(std::string_view csv);

// --- end-to-end self test ------------------------------------------------------

struct SelftestOptions {
  Scheme scheme = Scheme::amds;
  std::optional<std::size_t> n;
  std::optional<std::size_t> k;
  std::optional<std::size_t> b;
  std::optional<std::size_t> sigma;
  std::size_t m = 2;        // poly and MatDot split factor
  double epsilon = 1.0;     // asym
  std::optional<std::size_t> stragglers; // default: the most tolerated
  std::size_t s = 8;
  std::uint64_t seed = 1;
};

enum class SelftestStatus { pass, unrecoverable, mismatch };
std::string to_string(SelftestStatus s);

struct SelftestReport {
  SelftestStatus status = SelftestStatus::pass;
  std::string code; // e.g. "[5,2,2,2] array code"
  std::size_t units = 0;       // nodes or workers
  std::size_t tolerated = 0;   // stragglers the code is designed for
  std::vector<std::size_t> stragglers; // 1-based
  std::size_t peel_steps = 0;  // array codes only
  std::string detail;
};

// Encodes random Z_q operands, drops a random straggler set, decodes from the
// rest and compares with the direct product.
SelftestReport selftest(const SelftestOptions &options);

} // namespace codedmm::experiments
