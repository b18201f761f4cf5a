#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace codedmm::latency {

enum class Scheme { uncoded, poly, matdot, amds, asym };

std::string to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view name);
inline constexpr Scheme kAllSchemes[] = {Scheme::uncoded, Scheme::poly,
                                         Scheme::matdot, Scheme::amds,
                                         Scheme::asym};

// natural: every log is ln, and the log(p) factor is max(1, ln p).
// harmonic: the exact expectations of the Monte Carlo model. log(p) -> H_p,
// location terms become order-statistic harmonic differences, and the encode
// work uses the exact 2(b-1)(nb-1) counter.
enum class LogMode { natural, harmonic };

// Dispersion of the AMDS/asym order-statistic term: `corrected` uses the
// sigma-scaled density (V = sigma/mu), `printed` keeps b^(sigma-1)/mu.
enum class Dispersion { corrected, printed };

std::string to_string(LogMode m);
std::string to_string(Dispersion d);

struct LatencyParams {
  double mu = 1.0;    // dot-product completion rate
  double c = 50.0;    // master speedup over a cluster processor
  std::size_t p = 50; // master processors
  std::size_t k = 0;
  std::size_t n = 0;
  std::size_t b = 20;
  std::size_t sigma = 7;
  // Asymptotic codes: per-node processor counts and degrees. When empty every
  // node gets round((1 + epsilon) b) processors of degree sigma.
  double epsilon = 0.0;
  std::vector<std::size_t> node_sizes;
  std::vector<std::size_t> node_degrees;
};

// Throws PreconditionError naming the violated condition. Coded schemes need
// n > k so the straggler terms stay finite.
void validate(Scheme scheme, const LatencyParams &params);

struct PhaseTimes {
  double encode = 0.0;
  double parallel = 0.0;
  double decode = 0.0;
  double total() const { return encode + parallel + decode; }
};

// --- order statistics ----------------------------------------------------------

// H_n for integer n (H_0 = 0).
double harmonic(std::size_t n);
// H_x = digamma(x + 1) + gamma for real x >= 0.
double harmonic(double x);

// sigma_scale (H_b - H_{b-l}) / mu: mean of the l-th smallest of b
// exponentials of rate mu / sigma_scale.
double exp_order_stat_mean(std::size_t l, std::size_t b, double mu,
                           double sigma_scale = 1.0);

// sqrt(2 log(1/(1-y))), the large-argument inverse of the normal cdf.
double phi_inv_approx(double y);

// Mean of max(1, log p) or H_p: the expected max of p equal master shares,
// in units of one share's mean.
double master_factor(std::size_t p, LogMode mode);

// --- scheme accounting -----------------------------------------------------------

// What the latency and comm models need from a scheme.
struct SchemeModel {
  Scheme scheme = Scheme::uncoded;
  double encode_work = 0.0;      // dot-product equivalents at the master
  double decode_work = 0.0;
  std::size_t workers = 0;       // parallel units (processors or nodes)
  std::size_t needed = 0;        // completions required
  bool node_granular = false;    // units are whole nodes (array codes)
  double task_units = 1.0;       // dot products per processor (sigma)
};

SchemeModel scheme_model(Scheme scheme, const LatencyParams &params,
                         LogMode mode = LogMode::harmonic);

// Per-node processor counts and degrees of an asymptotic code.
struct NodeProfile {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> degrees;
  double b_prime() const;
  std::size_t sigma_max() const;
};
NodeProfile node_profile(const LatencyParams &params);

// --- closed forms ------------------------------------------------------------------

PhaseTimes expected_T_uncoded(const LatencyParams &params, LogMode mode);
PhaseTimes expected_T_poly(const LatencyParams &params, LogMode mode);
PhaseTimes expected_T_matdot(const LatencyParams &params, LogMode mode);
PhaseTimes expected_T_amds(const LatencyParams &params, LogMode mode,
                           Dispersion dispersion = Dispersion::corrected);
// Upper bound form with delta = (n - k)/k.
PhaseTimes expected_T_asym(const LatencyParams &params, LogMode mode,
                           Dispersion dispersion = Dispersion::corrected);

PhaseTimes expected_T(Scheme scheme, const LatencyParams &params, LogMode mode,
                      Dispersion dispersion = Dispersion::corrected);

// Exact location/scale of the node-completion order statistic for asymptotic
// codes, before the Jensen and range bounds.
struct NodeMoments {
  double mu_b = 0.0;
  double sigma_b = 0.0;
};
NodeMoments node_moments(const NodeProfile &nodes, double mu,
                         Dispersion dispersion = Dispersion::corrected);
// The bounded dispersion coefficient; the result already carries 1/mu once
// (corrected) or twice (printed).
double sigma_b_bar(const NodeProfile &nodes, double mu, Dispersion dispersion);

// --- Monte Carlo -------------------------------------------------------------------

// l-th smallest of count unit exponentials.
double sample_exp_order_stat(std::size_t l, std::size_t count,
                             std::mt19937_64 &rng);
// Largest of count unit exponentials, by inversion.
double sample_exp_max(std::size_t count, std::mt19937_64 &rng);

// Independent stream for trial `trial` of a run seeded with `seed`.
std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double std_error(std::size_t trials) const;
};

struct SimOutcome {
  Scheme scheme = Scheme::uncoded;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  Moments encode, parallel, decode, total;
  PhaseTimes predicted; // harmonic-mode closed form, corrected dispersion
};

// One trial: master phases are max over p processors of equal shares, each an
// exponential of mean share/(c mu); cluster units follow the scheme's
// completion rule. Results are identical for any `threads` value.
PhaseTimes simulate_trial(const SchemeModel &model, const LatencyParams &params,
                          const NodeProfile &nodes, std::mt19937_64 &rng);

SimOutcome mc_simulate(Scheme scheme, const LatencyParams &params,
                       std::size_t trials, std::uint64_t seed,
                       std::size_t threads = 1);

// Mean of the l-th order statistic of b rate-mu exponentials by sampling.
Moments mc_order_stat(std::size_t l, std::size_t b, double mu,
                      std::size_t trials, std::uint64_t seed);

} // namespace codedmm::latency
