#include "codedmm/latency.hpp"
#include "codedmm/baseline_codes.hpp"
#include "codedmm/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace codedmm::latency {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

double sz(std::size_t v) { return static_cast<double>(v); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

double unit_open(std::mt19937_64 &rng) {
  double u = 0.0;
  while (u <= 0.0)
    u = std::generate_canonical<double, 64>(rng);
  return u;
}

double master_time(double work, const LatencyParams &p, LogMode mode) {
  return work / (p.c * sz(p.p) * p.mu) * master_factor(p.p, mode);
}

double straggler_term(double n, double k) {
  return std::sqrt(2.0 * std::log(n / (n - k)));
}

struct Welford {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  Moments moments() const {
    return {mean, count > 1 ? m2 / static_cast<double>(count - 1) : 0.0};
  }
};

} // namespace

std::string to_string(Scheme s) {
  switch (s) {
  case Scheme::uncoded:
    return "uncoded";
  case Scheme::poly:
    return "poly";
  case Scheme::matdot:
    return "matdot";
  case Scheme::amds:
    return "amds";
  case Scheme::asym:
    return "asym";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes)
    if (name == to_string(s))
      return s;
  if (name == "asymamds")
    return Scheme::asym;
  return std::nullopt;
}

std::string to_string(LogMode m) {
  return m == LogMode::natural ? "natural" : "harmonic";
}

std::string to_string(Dispersion d) {
  return d == Dispersion::corrected ? "corrected" : "printed";
}

void validate(Scheme scheme, const LatencyParams &p) {
  if (!(p.mu > 0.0) || !std::isfinite(p.mu))
    throw PreconditionError("mu must be positive");
  if (!(p.c >= 1.0) || !std::isfinite(p.c))
    throw PreconditionError("compute factor c must be >= 1");
  if (p.p == 0)
    throw PreconditionError("p must be >= 1");
  if (p.k == 0 || p.b == 0)
    throw PreconditionError("k and b must be >= 1");
  if (scheme == Scheme::uncoded)
    return;
  if (p.n <= p.k)
    throw PreconditionError(to_string(scheme) + ": n > k required (n=" +
                            str(p.n) + ", k=" + str(p.k) + ")");
  if (p.sigma == 0)
    throw PreconditionError("sigma must be >= 1");
  if (scheme == Scheme::matdot && p.n * p.b <= p.k + p.b - 1)
    throw PreconditionError("matdot: nb > k + b - 1 required");
  if (scheme == Scheme::amds && p.b < 2)
    throw PreconditionError("amds: b >= 2 required");
  if (scheme == Scheme::asym) {
    if (!(p.epsilon >= 0.0))
      throw PreconditionError("asym: epsilon must be >= 0");
    if (!p.node_sizes.empty() && p.node_sizes.size() != p.n)
      throw PreconditionError("asym: node_sizes needs one entry per node");
    if (!p.node_degrees.empty() && p.node_degrees.size() != p.n)
      throw PreconditionError("asym: node_degrees needs one entry per node");
    const auto nodes = node_profile(p);
    for (std::size_t s : nodes.sizes)
      if (s < 2)
        throw PreconditionError("asym: every b_i must be >= 2");
    for (std::size_t d : nodes.degrees)
      if (d == 0)
        throw PreconditionError("asym: every sigma_i must be >= 1");
  }
}

double harmonic(std::size_t n) {
  // Direct summation below the cutoff, digamma above it.
  if (n > 4096)
    return harmonic(static_cast<double>(n));
  double h = 0.0;
  for (std::size_t j = n; j >= 1; --j)
    h += 1.0 / static_cast<double>(j);
  return h;
}

double harmonic(double x) {
  if (x < 0.0)
    throw PreconditionError("harmonic: argument must be >= 0");
  return boost::math::digamma(x + 1.0) +
         boost::math::constants::euler<double>();
}

double exp_order_stat_mean(std::size_t l, std::size_t b, double mu,
                           double sigma_scale) {
  if (l == 0 || l > b)
    throw PreconditionError("order statistic needs 1 <= l <= b");
  return sigma_scale * (harmonic(b) - harmonic(b - l)) / mu;
}

double phi_inv_approx(double y) {
  if (!(y > 0.0 && y < 1.0))
    throw PreconditionError("phi_inv_approx: y must lie in (0, 1)");
  return std::sqrt(-2.0 * std::log1p(-y));
}

double master_factor(std::size_t p, LogMode mode) {
  if (mode == LogMode::harmonic)
    return harmonic(p);
  return std::max(1.0, std::log(sz(p)));
}

double NodeProfile::b_prime() const {
  return std::accumulate(sizes.begin(), sizes.end(), 0.0) / sz(sizes.size());
}

std::size_t NodeProfile::sigma_max() const {
  return *std::max_element(degrees.begin(), degrees.end());
}

NodeProfile node_profile(const LatencyParams &p) {
  NodeProfile nodes;
  nodes.sizes = p.node_sizes;
  nodes.degrees = p.node_degrees;
  if (nodes.sizes.empty())
    nodes.sizes.assign(p.n, static_cast<std::size_t>(std::llround(
                                sz(p.b) * (1.0 + p.epsilon))));
  if (nodes.degrees.empty())
    nodes.degrees.assign(p.n, p.sigma);
  return nodes;
}

SchemeModel scheme_model(Scheme scheme, const LatencyParams &p, LogMode mode) {
  SchemeModel m;
  m.scheme = scheme;
  const double poly_encode =
      mode == LogMode::harmonic ? baseline::poly_encode_work(p.n, p.b)
                                : 2.0 * sz(p.n) * sz(p.b) * sz(p.b);
  switch (scheme) {
  case Scheme::uncoded:
    m.workers = p.k * p.b;
    m.needed = m.workers;
    break;
  case Scheme::poly:
    m.encode_work = poly_encode;
    m.decode_work = baseline::poly_decode_work(p.k, p.b);
    m.workers = p.n * p.b;
    m.needed = p.k * p.b;
    break;
  case Scheme::matdot:
    m.encode_work = poly_encode;
    m.decode_work = baseline::matdot_decode_work(p.k, p.b);
    m.workers = p.n * p.b;
    m.needed = p.k + p.b - 1;
    break;
  case Scheme::amds:
    m.decode_work = sz(p.sigma) * sz(p.k) * sz(p.b);
    m.workers = p.n;
    m.needed = p.k;
    m.node_granular = true;
    m.task_units = sz(p.sigma);
    break;
  case Scheme::asym: {
    const auto nodes = node_profile(p);
    m.decode_work = sz(nodes.sigma_max()) * sz(p.k) * nodes.b_prime();
    m.workers = p.n;
    m.needed = p.k;
    m.node_granular = true;
    m.task_units = sz(nodes.sigma_max());
    break;
  }
  }
  return m;
}

PhaseTimes expected_T_uncoded(const LatencyParams &p, LogMode mode) {
  validate(Scheme::uncoded, p);
  const std::size_t kb = p.k * p.b;
  PhaseTimes t;
  t.parallel =
      (mode == LogMode::harmonic ? harmonic(kb) : std::log(sz(kb))) / p.mu;
  return t;
}

PhaseTimes expected_T_poly(const LatencyParams &p, LogMode mode) {
  validate(Scheme::poly, p);
  const auto m = scheme_model(Scheme::poly, p, mode);
  PhaseTimes t;
  t.encode = master_time(m.encode_work, p, mode);
  t.decode = master_time(m.decode_work, p, mode);
  t.parallel = mode == LogMode::harmonic
                   ? exp_order_stat_mean(m.needed, m.workers, p.mu)
                   : std::log(sz(p.n) / sz(p.n - p.k)) / p.mu;
  return t;
}

PhaseTimes expected_T_matdot(const LatencyParams &p, LogMode mode) {
  validate(Scheme::matdot, p);
  const auto m = scheme_model(Scheme::matdot, p, mode);
  PhaseTimes t;
  t.encode = master_time(m.encode_work, p, mode);
  t.decode = master_time(m.decode_work, p, mode);
  const double n = sz(p.n);
  t.parallel = mode == LogMode::harmonic
                   ? exp_order_stat_mean(m.needed, m.workers, p.mu)
                   : std::log(n / (n - sz(p.k) / sz(p.b))) / p.mu;
  return t;
}

PhaseTimes expected_T_amds(const LatencyParams &p, LogMode mode,
                           Dispersion dispersion) {
  validate(Scheme::amds, p);
  const auto m = scheme_model(Scheme::amds, p, mode);
  const double sigma = sz(p.sigma);
  const double spread = dispersion == Dispersion::corrected
                            ? sigma / p.mu
                            : std::pow(sz(p.b), sigma - 1.0) / p.mu;
  const double location =
      mode == LogMode::harmonic ? harmonic(p.b) : std::log(sz(p.b));
  PhaseTimes t;
  t.decode = master_time(m.decode_work, p, mode);
  t.parallel =
      sigma * location / p.mu + spread * straggler_term(sz(p.n), sz(p.k));
  return t;
}

double sigma_b_bar(const NodeProfile &nodes, double mu, Dispersion dispersion) {
  const double n = sz(nodes.sizes.size());
  double lo = INFINITY, hi = -INFINITY, tail = 0.0;
  for (std::size_t i = 0; i < nodes.sizes.size(); ++i) {
    const double s = sz(nodes.degrees[i]);
    const double x = s * std::log(sz(nodes.sizes[i]));
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    tail += dispersion == Dispersion::corrected
                ? s * s
                : std::pow(sz(nodes.sizes[i]), 2.0 * (s - 1.0));
  }
  const double root = std::sqrt(n * (hi - lo) * (hi - lo) / 4.0 + tail / n);
  return dispersion == Dispersion::corrected ? root / mu : root / (mu * mu);
}

NodeMoments node_moments(const NodeProfile &nodes, double mu,
                         Dispersion dispersion) {
  const double n = sz(nodes.sizes.size());
  NodeMoments out;
  for (std::size_t i = 0; i < nodes.sizes.size(); ++i)
    out.mu_b += sz(nodes.degrees[i]) * std::log(sz(nodes.sizes[i]));
  out.mu_b /= n * mu;
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.sizes.size(); ++i) {
    const double s = sz(nodes.degrees[i]);
    const double b = sz(nodes.sizes[i]);
    // 1 / (b f(sigma log(b) / mu)) for the chosen density.
    const double inv_bf = dispersion == Dispersion::corrected
                              ? s / mu
                              : std::pow(b, s - 1.0) / mu;
    const double dev = s * std::log(b) / mu - out.mu_b;
    acc += inv_bf * inv_bf + dev * dev;
  }
  out.sigma_b = std::sqrt(acc / n);
  return out;
}

PhaseTimes expected_T_asym(const LatencyParams &p, LogMode mode,
                           Dispersion dispersion) {
  validate(Scheme::asym, p);
  const auto m = scheme_model(Scheme::asym, p, mode);
  const auto nodes = node_profile(p);
  const double sigma = sz(nodes.sigma_max());
  const double bp = nodes.b_prime();
  const double delta = sz(p.n - p.k) / sz(p.k);
  const double location =
      mode == LogMode::harmonic ? harmonic(bp) : std::log(bp);
  PhaseTimes t;
  t.decode = master_time(m.decode_work, p, mode);
  t.parallel = sigma * location / p.mu +
               sigma_b_bar(nodes, p.mu, dispersion) *
                   std::sqrt(2.0 * std::log((1.0 + delta) / delta));
  return t;
}

PhaseTimes expected_T(Scheme scheme, const LatencyParams &p, LogMode mode,
                      Dispersion dispersion) {
  switch (scheme) {
  case Scheme::uncoded:
    return expected_T_uncoded(p, mode);
  case Scheme::poly:
    return expected_T_poly(p, mode);
  case Scheme::matdot:
    return expected_T_matdot(p, mode);
  case Scheme::amds:
    return expected_T_amds(p, mode, dispersion);
  case Scheme::asym:
    return expected_T_asym(p, mode, dispersion);
  }
  return {};
}

double sample_exp_max(std::size_t count, std::mt19937_64 &rng) {
  // P(max <= t) = (1 - e^-t)^count.
  const double u = unit_open(rng);
  return -std::log(-std::expm1(std::log(u) / sz(count)));
}

double sample_exp_order_stat(std::size_t l, std::size_t count,
                             std::mt19937_64 &rng) {
  if (l == 0 || l > count)
    throw PreconditionError("order statistic needs 1 <= l <= count");
  if (l == count)
    return sample_exp_max(count, rng);
  if (l == 1)
    return -std::log(unit_open(rng)) / sz(count);
  // e^{-T} of the l-th smallest is Beta(count - l + 1, l).
  std::gamma_distribution<double> upper(sz(count - l + 1), 1.0);
  std::gamma_distribution<double> lower(sz(l), 1.0);
  const double x = upper(rng);
  const double y = lower(rng);
  return std::log1p(y / x);
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(trial)));
}

double Moments::std_error(std::size_t trials) const {
  return std::sqrt(variance / static_cast<double>(trials));
}

PhaseTimes simulate_trial(const SchemeModel &model, const LatencyParams &p,
                          const NodeProfile &nodes, std::mt19937_64 &rng) {
  PhaseTimes t;
  const double share = 1.0 / (sz(p.p) * p.c * p.mu);
  if (model.encode_work > 0.0)
    t.encode = model.encode_work * share * sample_exp_max(p.p, rng);
  if (model.node_granular) {
    std::vector<double> node_time(model.workers);
    for (std::size_t i = 0; i < model.workers; ++i)
      node_time[i] = sz(nodes.degrees[i]) *
                     sample_exp_max(nodes.sizes[i], rng) / p.mu;
    std::nth_element(node_time.begin(),
                     node_time.begin() +
                         static_cast<std::ptrdiff_t>(model.needed - 1),
                     node_time.end());
    t.parallel = node_time[model.needed - 1];
  } else {
    t.parallel = sample_exp_order_stat(model.needed, model.workers, rng) / p.mu;
  }
  if (model.decode_work > 0.0)
    t.decode = model.decode_work * share * sample_exp_max(p.p, rng);
  return t;
}

SimOutcome mc_simulate(Scheme scheme, const LatencyParams &p,
                       std::size_t trials, std::uint64_t seed,
                       std::size_t threads) {
  if (trials == 0)
    throw PreconditionError("mc_simulate: trials must be >= 1");
  validate(scheme, p);
  const auto model = scheme_model(scheme, p, LogMode::harmonic);
  NodeProfile nodes;
  if (scheme == Scheme::amds) {
    nodes.sizes.assign(p.n, p.b);
    nodes.degrees.assign(p.n, p.sigma);
  } else if (scheme == Scheme::asym) {
    nodes = node_profile(p);
  }

  std::vector<PhaseTimes> results(trials);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto rng = trial_rng(seed, i);
      results[i] = simulate_trial(model, p, nodes, rng);
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, trials);
  if (threads == 1) {
    run(0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (trials + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(trials, begin + chunk);
      if (begin < end)
        pool.emplace_back(run, begin, end);
    }
    for (auto &th : pool)
      th.join();
  }

  Welford enc, par, dec, tot;
  for (const auto &r : results) {
    enc.add(r.encode);
    par.add(r.parallel);
    dec.add(r.decode);
    tot.add(r.total());
  }
  SimOutcome out;
  out.scheme = scheme;
  out.trials = trials;
  out.seed = seed;
  out.encode = enc.moments();
  out.parallel = par.moments();
  out.decode = dec.moments();
  out.total = tot.moments();
  out.predicted = expected_T(scheme, p, LogMode::harmonic);
  return out;
}

Moments mc_order_stat(std::size_t l, std::size_t b, double mu,
                      std::size_t trials, std::uint64_t seed) {
  Welford w;
  for (std::size_t i = 0; i < trials; ++i) {
    auto rng = trial_rng(seed, i);
    w.add(sample_exp_order_stat(l, b, rng) / mu);
  }
  return w.moments();
}

} // namespace codedmm::latency
