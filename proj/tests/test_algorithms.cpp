#include <doctest.h>

#include <cmath>

#include "salab/algorithms.hpp"
#include "salab/rng.hpp"
#include "salab/sequence.hpp"

using namespace salab;
using namespace salab::algorithms;

namespace {

RootFindingProblem linear_problem(double k, double c, double sigma) {
  RootFindingProblem p;
  p.M = [k, c](double x) { return k * x + c; };
  p.b = 0.0;
  p.noise = sigma > 0 ? process::NoiseModel::gaussian(seqs::constant(sigma))
                      : process::NoiseModel::none();
  p.A = std::fabs(k);
  p.B = std::fabs(c);
  p.M_inverse = [k, c](double u) { return (u - c) / k; };
  p.inverse_radius = 1e6;
  p.x_star = -c / k;
  p.x0 = 0.0;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("algorithms");

TEST_CASE("slln: constant and alternating streams") {
  const std::vector<double> c(10, 3.25);
  const auto it = slln_estimator(c);
  REQUIRE(it.size() == 11);
  CHECK(it[0] == 0.0);
  for (std::size_t k = 1; k < it.size(); ++k) CHECK(it[k] == 3.25);

  std::vector<double> alt(100);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK(slln_estimator(alt).back() == doctest::Approx(0.0));

  CHECK_THROWS_AS(slln_estimator(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("slln iterates equal the running mean to 1e-12") {
  rng::SplitMix64 g(31);
  std::vector<double> ys(10000);
  for (double& y : ys) y = g.next_u01();
  const auto it = slln_estimator(ys);
  double sum = 0.0, comp = 0.0;
  for (std::size_t k = 1; k <= ys.size(); ++k) {
    const double t = ys[k - 1] - comp;
    const double s = sum + t;
    comp = (s - sum) - t;
    sum = s;
    const double mean = sum / static_cast<double>(k);
    REQUIRE(std::fabs(it[k] - mean) < 1e-12);
  }
}

TEST_CASE("robbins_monro: noiseless telescoping and dual-form consistency") {
  auto p = linear_problem(1.0, 0.0, 0.0);  // M(x) = x, root 0
  p.x0 = 2.0;
  const auto tr = robbins_monro(p, seqs::harmonic1(), 0, 1000);
  CHECK(tr.xs.back() == doctest::Approx(2.0 / 1000.0).epsilon(1e-12));
  // a == 0: constant trajectory.
  const auto frozen = robbins_monro(p, seqs::zero(), 0, 100);
  for (double x : frozen.xs) CHECK(x == 2.0);
}

TEST_CASE("robbins_monro satisfies Eq-8 and the Dvoretzky decomposition at once") {
  auto p = linear_problem(2.0, 1.0, 1.0);
  const auto a = seqs::harmonic1();
  const auto tr = robbins_monro(p, a, 11, 2000);
  for (std::size_t i = 0; i + 1 < tr.xs.size(); ++i) {
    const std::uint64_t n = i + 1;
    // ts[n] = x_n + a_n (b - M(x_n))
    const double expect_t = tr.xs[i] + a.at(n) * (0.0 - (2.0 * tr.xs[i] + 1.0));
    REQUIRE(std::fabs(tr.ts[i] - expect_t) < 1e-12);
    // xs[n+1] - ts[n] = ws[n], exactly as stored
    REQUIRE(tr.xs[i + 1] == tr.ts[i] + tr.ws[i]);
  }
}

TEST_CASE("rm dvoretzky package simulates bit-identically to robbins_monro") {
  auto p = linear_problem(2.0, 1.0, 1.0);
  const auto a = seqs::harmonic1();
  const auto pkg = as_dvoretzky(p, a, 10000);
  for (std::uint64_t seed : {0ull, 7ull, 123ull}) {
    const auto direct = robbins_monro(p, a, seed, 500);
    const auto packaged = process::simulate(pkg.spec, seed, 500);
    CHECK(direct.xs == packaged.xs);
    CHECK(direct.ts == packaged.ts);
    CHECK(direct.ws == packaged.ws);
  }
}

TEST_CASE("kiefer_wolfowitz: noiseless quadratic matches gradient ascent exactly") {
  RootFindingProblem p;
  p.M = [](double x) { return -x * x; };  // maximizer at 0
  p.noise = process::NoiseModel::none();
  p.x0 = 1.0;
  const auto a = seqs::harmonic1();
  const auto c = seqs::power(-1.0 / 3.0);
  const auto tr = kiefer_wolfowitz(p, a, c, 0, 100000);
  CHECK(std::fabs(tr.xs.back()) < 0.05);

  // Oracle: deterministic ascent x + a_n M'(x); the symmetric difference
  // of a quadratic is exact, so the iterates coincide.
  double x = 1.0;
  for (std::uint64_t n = 1; n < 100000; ++n) x += a.at(n) * (-2.0 * x);
  CHECK(tr.xs.back() == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("kiefer_wolfowitz: linear objective drifts at the slope") {
  RootFindingProblem p;
  p.M = [](double x) { return 3.0 * x; };
  p.noise = process::NoiseModel::none();
  p.x0 = 0.0;
  const auto tr = kiefer_wolfowitz(p, seqs::constant(0.125), seqs::constant(0.5), 0, 9);
  // (M(x+c) - M(x-c)) / (2c) = 3 regardless of x: steps of a * 3.
  for (std::size_t i = 0; i + 1 < tr.xs.size(); ++i)
    CHECK(tr.xs[i + 1] - tr.xs[i] == doctest::Approx(0.375));
}

TEST_CASE("kiefer_wolfowitz: constant c keeps the bias floor O(c)") {
  RootFindingProblem p;
  p.M = [](double x) { return -x * x; };
  p.noise = process::NoiseModel::none();
  p.x0 = 2.0;
  const double c0 = 0.25;
  const auto tr = kiefer_wolfowitz(p, seqs::harmonic(), seqs::constant(c0), 0, 20000);
  CHECK(std::fabs(tr.xs.back()) <= c0);
  CHECK_THROWS_AS(kiefer_wolfowitz(p, seqs::harmonic(), seqs::zero(), 0, 10),
                  std::invalid_argument);
}

TEST_CASE("sgd: quadratic loss, noiseless cases") {
  MinimizationProblem p;
  p.grad = [](double x) { return x - 2.0; };  // L = (x-2)^2/2
  p.noise = process::NoiseModel::none();
  p.x0 = 5.0;
  p.curvature = 1.0;
  p.theta = 2.0;

  // a = 1, L = x^2/2 form: one exact Newton step to the minimizer.
  MinimizationProblem origin = p;
  origin.grad = [](double x) { return x; };
  origin.theta = 0.0;
  origin.x0 = 4.0;
  const auto one = sgd(origin, seqs::one(), 0, 3);
  CHECK(one.xs[1] == 0.0);
  CHECK(one.xs[2] == 0.0);

  // a_n = 1/(n+1): identical to noiseless RM with M(x) = x - theta.
  const auto tr = sgd(p, seqs::harmonic1(), 0, 500);
  auto rm = linear_problem(1.0, -2.0, 0.0);
  rm.x0 = 5.0;
  const auto rmtr = robbins_monro(rm, seqs::harmonic1(), 0, 500);
  for (std::size_t i = 0; i < tr.xs.size(); ++i)
    CHECK(tr.xs[i] == doctest::Approx(rmtr.xs[i]).epsilon(1e-14));
}

TEST_CASE("noiseless sgd error obeys the contraction product bound") {
  MinimizationProblem p;
  p.grad = [](double x) { return 0.7 * (x - 1.0); };
  p.noise = process::NoiseModel::none();
  p.x0 = 9.0;
  p.curvature = 0.7;
  p.theta = 1.0;
  const auto a = seqs::harmonic1();
  const auto tr = sgd(p, a, 0, 2000);
  double prod = 1.0;
  for (std::uint64_t n = 1; n < 2000; ++n) prod *= (1.0 - a.at(n) * 0.7);
  CHECK(std::fabs(tr.xs.back() - 1.0) ==
        doctest::Approx(std::fabs(9.0 - 1.0) * prod).epsilon(1e-9));
}

TEST_CASE("banach iterate: pure iteration, schedule damping, fixed start") {
  ContractionProblem p;
  p.g = [](double x) { return 0.9 * x; };
  p.gamma_contr = 0.9;
  p.fixed_point = 0.0;
  const auto xs = banach_iterate(p, seqs::one(), 4.0, 30);
  for (std::size_t n = 0; n < xs.size(); ++n)
    CHECK(xs[n] == doctest::Approx(4.0 * std::pow(0.9, static_cast<double>(n))));

  ContractionProblem q;
  q.g = [](double x) { return 0.5 * x + 1.0; };
  q.gamma_contr = 0.5;
  q.fixed_point = 2.0;
  // With a_n = 1/(n+1) the error contracts by (1 - a_n/2) per step, i.e.
  // Theta(1/sqrt(N)): ~2.3e-2 at 1e4. Check the exact product form.
  const auto ys = banach_iterate(q, seqs::harmonic1(), 0.0, 10001);
  double prod = 2.0;
  for (std::uint64_t n = 1; n <= 10000; ++n) prod *= 1.0 - 0.5 / (n + 1.0);
  CHECK(std::fabs(ys.back() - 2.0) == doctest::Approx(prod).epsilon(1e-9));
  CHECK(std::fabs(ys.back() - 2.0) < 0.025);
  // Oracle: doubling the horizon keeps shrinking the error.
  const auto zs = banach_iterate(q, seqs::harmonic1(), 0.0, 20001);
  CHECK(std::fabs(zs.back() - 2.0) < std::fabs(ys.back() - 2.0));

  const auto frozen = banach_iterate(q, seqs::harmonic1(), 2.0, 50);
  for (double x : frozen) CHECK(x == 2.0);
}

TEST_CASE("banach error is monotone for a_n in [0,1] and rejects a_n > 1") {
  ContractionProblem p;
  p.g = [](double x) { return 0.5 * x + 1.0; };
  p.gamma_contr = 0.5;
  p.fixed_point = 2.0;
  rng::SplitMix64 g(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> avals(200);
    for (double& a : avals) a = g.next_u01();
    const auto xs = banach_iterate(p, seqs::from_values("a", avals), g.next_in(-9, 9), 200);
    for (std::size_t n = 0; n + 1 < xs.size(); ++n)
      REQUIRE(std::fabs(xs[n + 1] - 2.0) <= std::fabs(xs[n] - 2.0) + 1e-12);
  }
  CHECK_THROWS_AS(banach_iterate(p, seqs::constant(1.5), 0.0, 10), std::invalid_argument);
}

TEST_CASE("contraction spot check accepts contractions and rejects expansions") {
  ContractionProblem p;
  p.g = [](double x) { return 0.5 * x + 1.0; };
  p.gamma_contr = 0.5;
  p.fixed_point = 2.0;
  CHECK_NOTHROW(p.spot_check({-10.0, -1.0, 0.0, 1.0, 10.0}));
  p.gamma_contr = 0.25;
  CHECK_THROWS_AS(p.spot_check({-10.0, 10.0}), std::invalid_argument);
}

TEST_CASE("as_dvoretzky(contraction): zero noise, H8 trivially summable") {
  ContractionProblem p;
  p.g = [](double x) { return 0.5 * x + 1.0; };
  p.gamma_contr = 0.5;
  p.fixed_point = 2.0;
  const auto pkg = as_dvoretzky(p, seqs::harmonic1(), 0.0, dvoretzky::BoundMode::weak);
  CHECK(pkg.spec.noise.variance(3) == 0.0);
  CHECK(pkg.params.mode == dvoretzky::BoundMode::weak);
  CHECK(pkg.params.gamma.eval(1, 0) == doctest::Approx(0.25));  // a_1 (1 - q)

  dvoretzky::NoiseCheckConfig ncfg;
  ncfg.horizon = 1000;
  ncfg.exact_steps = 6;
  const auto noise_ledger = dvoretzky::check_noise_hypotheses(pkg.spec, ncfg);
  CHECK(noise_ledger.at("H8").status == dvoretzky::CheckStatus::pass);
  CHECK(noise_ledger.at("H8").evidence_value == 0.0);

  // Weak-mode bound holds on the full grid.
  dvoretzky::TBoundConfig tcfg;
  tcfg.n_hi = 200;
  tcfg.history_seeds = 5;
  const auto entry = dvoretzky::check_t_bound(pkg.spec, pkg.params, 2.0, tcfg);
  CHECK(entry.status == dvoretzky::CheckStatus::pass);

  // Original-mode variant certifies only d >= d_floor, exactly as built.
  const auto orig = as_dvoretzky(p, seqs::harmonic1(), 0.0,
                                 dvoretzky::BoundMode::original, 1e-3);
  const auto entry2 = dvoretzky::check_t_bound(orig.spec, orig.params, 2.0, tcfg);
  CHECK(entry2.status == dvoretzky::CheckStatus::pass);
}

TEST_CASE("as_dvoretzky(sgd): quadratic declaration gives the RM-style transform") {
  MinimizationProblem p;
  p.grad = [](double x) { return 2.0 * (x - 1.0); };
  p.noise = process::NoiseModel::gaussian(seqs::one());
  p.x0 = 0.0;
  p.curvature = 2.0;
  p.theta = 1.0;
  const auto pkg = as_dvoretzky(p, seqs::harmonic1(), 10000);
  CHECK(pkg.spec.x_star == 1.0);
  // T_n = x_n - a_n E[grad] at the last history coordinate.
  const std::vector<double> hist{0.5};
  const double t = pkg.spec.transform(1, std::span<const double>(hist.data(), 1));
  CHECK(t == doctest::Approx(0.5 - 0.5 * (2.0 * (0.5 - 1.0))));

  MinimizationProblem undeclared = p;
  undeclared.curvature.reset();
  CHECK_THROWS_AS(as_dvoretzky(undeclared, seqs::harmonic1(), 1000),
                  std::invalid_argument);
}

TEST_SUITE_END();
