#include "doctest.h"

#include "codedmm/errors.hpp"
#include "codedmm/latency.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace codedmm;
using namespace codedmm::latency;

namespace {

// Normal quantile by bisection on erfc, independent of the library.
double phi_inv_oracle(double y) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double upper_tail = 0.5 * std::erfc(mid / std::sqrt(2.0));
    (1.0 - upper_tail < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// l-th smallest of b exponentials by sorting explicit draws.
double brute_order_stat_mean(std::size_t l, std::size_t b, double mu,
                             std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(mu);
  std::vector<double> xs(b);
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto &x : xs)
      x = e(rng);
    std::nth_element(xs.begin(), xs.begin() + static_cast<long>(l - 1), xs.end());
    sum += xs[l - 1];
  }
  return sum / static_cast<double>(trials);
}

LatencyParams table1(std::size_t k, std::size_t n) {
  LatencyParams p;
  p.k = k;
  p.n = n;
  return p;
}

} // namespace

TEST_CASE("harmonic numbers") {
  CHECK(harmonic(std::size_t{0}) == 0.0);
  CHECK(harmonic(std::size_t{1}) == 1.0);
  CHECK(harmonic(std::size_t{4}) == doctest::Approx(25.0 / 12.0));
  for (std::size_t b = 10; b <= 100000; b *= 3)
    CHECK(std::abs(harmonic(b) - std::log(static_cast<double>(b)) - 0.5772156649) <
          1.0 / (2.0 * static_cast<double>(b)));
  for (std::size_t b : {1, 7, 50, 4096, 4097, 20000})
    CHECK(harmonic(static_cast<double>(b)) ==
          doctest::Approx(harmonic(b)).epsilon(1e-12));
  CHECK(harmonic(0.5) == doctest::Approx(2.0 - 2.0 * std::log(2.0)));
}

TEST_CASE("exponential order statistic means") {
  CHECK(exp_order_stat_mean(5, 5, 2.0) == doctest::Approx(harmonic(std::size_t{5}) / 2.0));
  CHECK(exp_order_stat_mean(1, 1, 4.0) == doctest::Approx(0.25));
  CHECK(exp_order_stat_mean(2, 3, 1.0, 7.0) == doctest::Approx(7.0 * (1.0 / 3 + 1.0 / 2)));
  CHECK_THROWS_AS(exp_order_stat_mean(0, 3, 1.0), PreconditionError);
  CHECK_THROWS_AS(exp_order_stat_mean(4, 3, 1.0), PreconditionError);
  const double brute = brute_order_stat_mean(3, 5, 1.0, 100000, 9);
  CHECK(std::abs(brute / exp_order_stat_mean(3, 5, 1.0) - 1.0) < 0.01);
}

TEST_CASE("property: samplers agree with exact order statistic means") {
  std::mt19937_64 pick(12);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t count = std::uniform_int_distribution<std::size_t>(1, 300)(pick);
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, count)(pick);
    CAPTURE(count);
    CAPTURE(l);
    const auto m = mc_order_stat(l, count, 1.0, 100000, 100 + trial);
    const double exact = exp_order_stat_mean(l, count, 1.0);
    CHECK(std::abs(m.mean - exact) < 3.0 * m.std_error(100000) + 1e-12);
  }
}

TEST_CASE("normal quantile approximation") {
  CHECK(phi_inv_approx(1.0 - std::exp(-2.0)) == doctest::Approx(2.0));
  const double k = 1000, n = 1006, alpha = 0.375;
  const double royston = phi_inv_approx((k - alpha) / (n - 2 * alpha + 1));
  const double simplified = std::sqrt(2.0 * std::log(n / (n - k)));
  CHECK(std::abs(royston / simplified - 1.0) < 0.02);
  CHECK_THROWS_AS(phi_inv_approx(1.0), PreconditionError);

  // Measured relative error against the exact quantile: about 30% at 0.99,
  // shrinking as y -> 1 and below 15% from 1 - 1e-5 on.
  double previous = 1.0;
  for (double tail : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8, 1e-10}) {
    const double y = 1.0 - tail;
    const double err = phi_inv_approx(y) / phi_inv_oracle(y) - 1.0;
    CAPTURE(tail);
    CHECK(err > 0.0);
    CHECK(err < previous);
    previous = err;
    if (tail <= 1e-5)
      CHECK(err < 0.15);
  }
  const double at99 = phi_inv_approx(0.99) / phi_inv_oracle(0.99) - 1.0;
  CHECK(at99 == doctest::Approx(0.305).epsilon(0.01));
}

TEST_CASE("uncoded expectation") {
  auto p = table1(1, 0);
  p.b = 1;
  CHECK(expected_T_uncoded(p, LogMode::harmonic).total() == doctest::Approx(1.0));
  p.mu = 2.0;
  CHECK(expected_T_uncoded(p, LogMode::harmonic).total() == doctest::Approx(0.5));
  auto q = table1(1000, 0);
  CHECK(expected_T_uncoded(q, LogMode::harmonic).total() == doctest::Approx(10.48).epsilon(0.001));
  CHECK(expected_T_uncoded(q, LogMode::natural).total() == doctest::Approx(std::log(20000.0)));
  const auto mc = mc_simulate(Scheme::uncoded, q, 10000, 3);
  CHECK(std::abs(mc.total.mean / 10.48 - 1.0) < 0.02);
  const auto one = mc_simulate(Scheme::uncoded, p, 10000, 4);
  CHECK(std::abs(one.total.mean - 0.5) < 3 * one.total.std_error(10000));
}

TEST_CASE("polynomial expectation") {
  auto p = table1(100, 137);
  p.b = 100;
  // (2nb^2 + kb ln^2 kb) ln(p) / (c p mu) + ln(n/(n-k)) / mu
  const double kb = 10000;
  const double expect = (2.0 * 137 * 100 * 100 + kb * std::pow(std::log(kb), 2)) *
                            std::log(50.0) / 2500.0 +
                        std::log(137.0 / 37.0);
  CHECK(expected_T_poly(p, LogMode::natural).total() == doctest::Approx(expect));
  p.p = 1;
  p.c = 1;
  const auto at1 = expected_T_poly(p, LogMode::natural);
  CHECK(at1.encode == doctest::Approx(2.0 * 137 * 100 * 100));
  CHECK(master_factor(1, LogMode::natural) == 1.0);
  CHECK(master_factor(1, LogMode::harmonic) == 1.0);
  CHECK(master_factor(2, LogMode::natural) == 1.0);
  CHECK(master_factor(50, LogMode::natural) == doctest::Approx(std::log(50.0)));
  p.n = 100;
  CHECK_THROWS_AS(expected_T_poly(p, LogMode::natural), PreconditionError);

  auto small = table1(100, 137);
  const auto mc = mc_simulate(Scheme::poly, small, 10000, 5);
  CHECK(std::abs(mc.total.mean / mc.predicted.total() - 1.0) < 0.05);
}

TEST_CASE("MatDot expectation") {
  auto p = table1(100, 137);
  p.b = 100;
  const double expect = (2.0 * 137 * 100 * 100 + 100.0 * 100 * 100 * std::pow(std::log(100.0), 2)) *
                            std::log(50.0) / 2500.0 +
                        std::log(137.0 / 136.0);
  CHECK(expected_T_matdot(p, LogMode::natural).total() == doctest::Approx(expect));
  CHECK(expected_T_matdot(p, LogMode::natural).total() >
        expected_T_poly(p, LogMode::natural).total());
  auto bad = table1(100, 1);
  bad.b = 1;
  CHECK_THROWS_AS(expected_T_matdot(bad, LogMode::natural), PreconditionError);
  const auto mc = mc_simulate(Scheme::matdot, table1(100, 137), 10000, 6);
  CHECK(std::abs(mc.total.mean / mc.predicted.total() - 1.0) < 0.05);
}

TEST_CASE("AMDS expectation") {
  auto p = table1(100, 106);
  p.b = 100;
  const double term = std::sqrt(2.0 * std::log(106.0 / 6.0));
  const auto nat = expected_T_amds(p, LogMode::natural);
  CHECK(nat.decode == doctest::Approx(7.0 * 100 * 100 * std::log(50.0) / 2500.0));
  CHECK(nat.parallel == doctest::Approx(7.0 * std::log(100.0) + 7.0 * term));
  const auto printed = expected_T_amds(p, LogMode::natural, Dispersion::printed);
  CHECK(printed.parallel == doctest::Approx(7.0 * std::log(100.0) + 1e12 * term));
  CHECK(nat.total() == doctest::Approx(158.5).epsilon(0.002));

  auto s1 = table1(10, 12);
  s1.sigma = 1;
  s1.b = 2;
  const auto one = expected_T_amds(s1, LogMode::natural);
  CHECK(one.parallel - std::log(2.0) == doctest::Approx(std::sqrt(2.0 * std::log(6.0))));
  s1.b = 1;
  CHECK_THROWS_AS(expected_T_amds(s1, LogMode::natural), PreconditionError);
}

TEST_CASE("asymptotic bound collapses to AMDS with uniform nodes") {
  for (double mu : {1.0, 2.5})
    for (auto mode : {LogMode::natural, LogMode::harmonic}) {
      auto p = table1(100, 125);
      p.mu = mu;
      const auto amds = expected_T_amds(p, mode);
      const auto asym = expected_T_asym(p, mode);
      CHECK(asym.total() == doctest::Approx(amds.total()));
    }
  auto p = table1(100, 125);
  CHECK(expected_T_asym(p, LogMode::natural, Dispersion::printed).total() ==
        doctest::Approx(expected_T_amds(p, LogMode::natural, Dispersion::printed).total()));
  const auto nodes = node_profile(p);
  const auto m = node_moments(nodes, 2.0);
  CHECK(m.mu_b == doctest::Approx(7.0 * std::log(20.0) / 2.0));
  CHECK(m.sigma_b == doctest::Approx(3.5));
}

TEST_CASE("property: Jensen sandwich on random node profiles") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    NodeProfile nodes;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 60)(rng);
    for (std::size_t i = 0; i < n; ++i) {
      nodes.sizes.push_back(std::uniform_int_distribution<std::size_t>(2, 500)(rng));
      nodes.degrees.push_back(std::uniform_int_distribution<std::size_t>(1, 9)(rng));
    }
    const double mu = std::uniform_real_distribution<double>(0.2, 3.0)(rng);
    const auto m = node_moments(nodes, mu);
    double mean_log = 0.0;
    for (std::size_t s : nodes.sizes)
      mean_log += std::log(static_cast<double>(s));
    mean_log /= static_cast<double>(n);
    const double smin = static_cast<double>(*std::min_element(nodes.degrees.begin(), nodes.degrees.end()));
    const double smax = static_cast<double>(nodes.sigma_max());
    CHECK(smax * std::log(nodes.b_prime()) / mu >= m.mu_b - 1e-12);
    CHECK(m.mu_b >= smin * mean_log / mu - 1e-12);
    CHECK(sigma_b_bar(nodes, mu, Dispersion::corrected) >= m.sigma_b - 1e-12);
  }
}

TEST_CASE("parameter validation") {
  auto p = table1(10, 12);
  p.mu = 0;
  CHECK_THROWS_AS(validate(Scheme::poly, p), PreconditionError);
  p = table1(10, 12);
  p.c = 0.5;
  CHECK_THROWS_AS(validate(Scheme::poly, p), PreconditionError);
  p = table1(10, 12);
  p.p = 0;
  CHECK_THROWS_AS(validate(Scheme::amds, p), PreconditionError);
  p = table1(10, 10);
  for (Scheme s : {Scheme::poly, Scheme::matdot, Scheme::amds, Scheme::asym}) {
    CHECK_THROWS_AS(expected_T(s, p, LogMode::natural), PreconditionError);
    CHECK_THROWS_AS(mc_simulate(s, p, 10, 1), PreconditionError);
  }
  CHECK_NOTHROW(validate(Scheme::uncoded, p));
  p = table1(10, 12);
  p.node_sizes = {5, 5};
  CHECK_THROWS_AS(validate(Scheme::asym, p), PreconditionError);
  p.node_sizes.assign(12, 1);
  CHECK_THROWS_AS(validate(Scheme::asym, p), PreconditionError);
  CHECK_THROWS_AS(mc_simulate(Scheme::uncoded, table1(3, 0), 0, 1), PreconditionError);
}

TEST_CASE("scheme names round trip") {
  for (Scheme s : kAllSchemes)
    CHECK(parse_scheme(to_string(s)) == s);
  CHECK(parse_scheme("asymamds") == Scheme::asym);
  CHECK_FALSE(parse_scheme("lt").has_value());
}

TEST_CASE("property: Monte Carlo is identical for any thread count") {
  auto p = table1(60, 67);
  p.epsilon = 1.0;
  for (Scheme s : kAllSchemes) {
    const auto one = mc_simulate(s, p, 2000, 77, 1);
    for (std::size_t threads : {2, 3, 8}) {
      const auto many = mc_simulate(s, p, 2000, 77, threads);
      CHECK(many.total.mean == one.total.mean);
      CHECK(many.total.variance == one.total.variance);
      CHECK(many.encode.mean == one.encode.mean);
      CHECK(many.decode.mean == one.decode.mean);
    }
    CHECK(mc_simulate(s, p, 2000, 78).total.mean != one.total.mean);
  }
}

TEST_CASE("property: more master power never hurts") {
  for (Scheme s : {Scheme::poly, Scheme::matdot, Scheme::amds, Scheme::asym}) {
    auto p = table1(50, 56);
    p.epsilon = 1.0;
    double previous_c = INFINITY;
    for (double c : {1.0, 2.0, 5.0, 20.0, 100.0}) {
      p.c = c;
      const double mean = mc_simulate(s, p, 2000, 31).total.mean;
      CHECK(mean <= previous_c);
      previous_c = mean;
    }
    p.c = 50;
    double previous_p = INFINITY;
    for (std::size_t procs : {1, 2, 3, 8, 30, 100}) {
      p.p = procs;
      const double mean = mc_simulate(s, p, 2000, 32).total.mean;
      CHECK(mean <= previous_p);
      previous_p = mean;
    }
  }
}

TEST_CASE("property: closed forms match their Monte Carlo model") {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 10; ++trial) {
    LatencyParams p;
    p.k = std::uniform_int_distribution<std::size_t>(20, 200)(rng);
    p.b = std::uniform_int_distribution<std::size_t>(2, 40)(rng);
    p.n = p.k + std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    p.c = std::uniform_real_distribution<double>(1, 80)(rng);
    p.p = std::uniform_int_distribution<std::size_t>(1, 80)(rng);
    p.sigma = std::uniform_int_distribution<std::size_t>(1, 7)(rng);
    for (Scheme s : {Scheme::uncoded, Scheme::poly, Scheme::matdot}) {
      const auto mc = mc_simulate(s, p, 4000, 41 + trial);
      CAPTURE(to_string(s));
      CHECK(std::abs(mc.encode.mean - mc.predicted.encode) <= 4 * mc.encode.std_error(4000) + 1e-9);
      CHECK(std::abs(mc.decode.mean - mc.predicted.decode) <= 4 * mc.decode.std_error(4000) + 1e-9);
      CHECK(std::abs(mc.parallel.mean - mc.predicted.parallel) <= 4 * mc.parallel.std_error(4000) + 1e-9);
    }
  }
}
