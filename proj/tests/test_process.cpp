#include <doctest.h>

#include <cmath>

#include "salab/exact_process.hpp"
#include "salab/finprob.hpp"
#include "salab/process.hpp"
#include "salab/rng.hpp"
#include "salab/sequence.hpp"

using namespace salab;
using namespace salab::process;

namespace {

ProcessSpec identity_spec(double x0, NoiseModel noise) {
  ProcessSpec spec;
  spec.id = "identity";
  spec.transform = [](std::uint64_t, std::span<const double> h) { return h.back(); };
  spec.noise = std::move(noise);
  spec.x0 = x0;
  return spec;
}

// Robbins-Monro with M(x) = x, b = 0: T_n = x_n (1 - a_n).
ProcessSpec rm_identity_spec(double x0, NoiseModel noise) {
  ProcessSpec spec;
  spec.id = "rm-identity";
  spec.transform = [](std::uint64_t n, std::span<const double> h) {
    return h.back() * (1.0 - 1.0 / static_cast<double>(n + 1));
  };
  spec.noise = std::move(noise);
  spec.x0 = x0;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("process");

TEST_CASE("noise model closed-form variances") {
  const auto g = NoiseModel::gaussian(seqs::constant(2.0));
  CHECK(g.variance(7) == doctest::Approx(4.0));

  const auto u = NoiseModel::uniform(seqs::constant(3.0));
  CHECK(u.variance(1) == doctest::Approx(3.0));  // h^2/3

  const auto d = NoiseModel::discrete({0.0, 2.0}, {0.5, 0.5}, seqs::one());
  CHECK(d.variance(1) == doctest::Approx(1.0));  // centered to -1/+1

  const auto rescaled = g.rescaled("half", [](std::uint64_t) { return -0.5; });
  CHECK(rescaled.variance(3) == doctest::Approx(1.0));
}

TEST_CASE("noise samples are centered and reproducible") {
  const auto m = NoiseModel::uniform(seqs::one());
  CHECK(m.sample(5, 9, 0) == m.sample(5, 9, 0));
  CHECK(m.sample(5, 9, 0) != m.sample(5, 10, 0));
  double mean = 0.0;
  const int n = 100000;
  for (int i = 1; i <= n; ++i) mean += m.sample(3, static_cast<std::uint64_t>(i), 0);
  CHECK(std::fabs(mean / n) < 0.01);

  const auto biased = m.with_bias(0.25);
  double bmean = 0.0;
  for (int i = 1; i <= n; ++i) bmean += biased.sample(3, static_cast<std::uint64_t>(i), 0);
  CHECK(bmean / n == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("simulate: fixed point of the identity transform") {
  const auto tr = simulate(identity_spec(1.25, NoiseModel::none()), 0, 50);
  for (double x : tr.xs) CHECK(x == 1.25);
  for (double w : tr.ws) CHECK(w == 0.0);
}

TEST_CASE("simulate: noiseless RM telescopes to x0/N") {
  const auto tr = simulate(rm_identity_spec(3.0, NoiseModel::none()), 0, 1000);
  CHECK(tr.xs.back() == doctest::Approx(3.0 / 1000.0).epsilon(1e-12));
}

TEST_CASE("simulate is deterministic in (spec, seed) and respects the recurrence") {
  const auto spec = rm_identity_spec(1.0, NoiseModel::gaussian(seqs::harmonic1()));
  const auto a = simulate(spec, 42, 500);
  const auto b = simulate(spec, 42, 500);
  CHECK(a.xs == b.xs);
  CHECK(a.ws == b.ws);
  const auto c = simulate(spec, 43, 500);
  CHECK(a.xs != c.xs);
  for (std::size_t n = 0; n < a.ts.size(); ++n)
    CHECK(a.xs[n + 1] == a.ts[n] + a.ws[n]);  // exact, by construction
}

TEST_CASE("divergence guard flags exploding trajectories") {
  ProcessSpec spec;
  spec.transform = [](std::uint64_t, std::span<const double> h) {
    return h.back() * 10.0;
  };
  spec.noise = NoiseModel::none();
  spec.x0 = 1.0;
  const auto tr = simulate(spec, 0, 100);
  CHECK(tr.diverged);
  CHECK(tr.xs.size() < 100);
  CHECK(std::fabs(tr.xs.back()) > kDivergenceBound);
}

TEST_CASE("build_exact: structure counts and weight normalization") {
  const StepDist coin({-1.0, 1.0}, {0.5, 0.5});
  const auto ident = [](std::uint64_t, std::span<const double> h) { return h.back(); };

  const auto ep2 = build_exact({coin, coin}, ident, 0.0);
  CHECK(ep2.space.size() == 4);
  CHECK(ep2.filtration.depth() == 3);
  CHECK(ep2.level(0).block_count() == 1);
  CHECK(ep2.level(1).block_count() == 2);
  CHECK(ep2.level(2).block_count() == 4);

  const StepDist sure({5.0}, {1.0});
  const auto ep1 = build_exact({sure, sure, sure}, ident, 2.0);
  CHECK(ep1.space.size() == 1);
  for (const auto& x : ep1.xs) CHECK(x.values[0] == 2.0);  // centered noise = 0

  std::vector<StepDist> twelve(12, coin);
  const auto ep12 = build_exact(twelve, ident, 0.0);
  CHECK(ep12.space.size() == 4096);
  double total = 0.0;
  for (double w : ep12.space.weights()) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<StepDist> too_many(21, coin);
  CHECK_THROWS_AS(build_exact(too_many, ident, 0.0), std::invalid_argument);
}

TEST_CASE("decompose reproduces the tabulated T and W") {
  const StepDist coin({-1.0, 1.0}, {0.5, 0.5});
  // RM form with binary noise: T = x (1 - a_n).
  const auto rm = [](std::uint64_t n, std::span<const double> h) {
    return h.back() * (1.0 - 1.0 / static_cast<double>(n + 1));
  };
  const auto ep = build_exact(std::vector<StepDist>(8, coin), rm, 1.0);
  for (std::uint64_t n = 1; n <= ep.steps; ++n) {
    const auto d = decompose(ep, n);
    for (std::size_t o = 0; o < ep.space.size(); ++o) {
      CHECK(std::fabs(d.t_hat.values[o] - ep.ts[n - 1].values[o]) < 1e-12);
      CHECK(std::fabs(d.w_hat.values[o] - ep.ws[n - 1].values[o]) < 1e-12);
    }
  }
  CHECK_THROWS_AS(decompose(ep, 0), std::invalid_argument);
  CHECK_THROWS_AS(decompose(ep, 9), std::invalid_argument);
}

TEST_CASE("decompose on zero noise yields zero w_hat") {
  const StepDist sure({0.0}, {1.0});
  const auto ident = [](std::uint64_t, std::span<const double> h) { return h.back(); };
  const auto ep = build_exact(std::vector<StepDist>(4, sure), ident, 1.0);
  const auto d = decompose(ep, 2);
  for (double w : d.w_hat.values) CHECK(w == doctest::Approx(0.0));
}

TEST_CASE("decompose agrees for random history-dependent transforms") {
  rng::SplitMix64 g(5);
  const StepDist coin({-1.0, 1.0}, {0.5, 0.5});
  for (int trial = 0; trial < 100; ++trial) {
    const double k1 = g.next_in(-1.0, 1.0);
    const double k2 = g.next_in(-0.5, 0.5);
    const double c = g.next_in(-1.0, 1.0);
    // Adapted in the structural sense: reads the whole history.
    auto tf = [k1, k2, c](std::uint64_t n, std::span<const double> h) {
      const double prev = h.size() >= 2 ? h[h.size() - 2] : 0.0;
      return k1 * h.back() + k2 * prev + c / static_cast<double>(n);
    };
    const auto ep = build_exact(std::vector<StepDist>(6, coin), tf, g.next_in(-1, 1));
    for (std::uint64_t n = 1; n <= ep.steps; ++n) {
      const auto d = decompose(ep, n);
      for (std::size_t o = 0; o < ep.space.size(); ++o) {
        REQUIRE(std::fabs(d.t_hat.values[o] - ep.ts[n - 1].values[o]) < 1e-12);
        REQUIRE(std::fabs(d.w_hat.values[o] - ep.ws[n - 1].values[o]) < 1e-12);
      }
    }
  }
}

TEST_CASE("martingale increment: centered, biased, and zero noise") {
  const auto ident = [](std::uint64_t, std::span<const double> h) { return h.back(); };
  const StepDist coin({-1.0, 1.0}, {0.5, 0.5});
  const auto centered = build_exact(std::vector<StepDist>(10, coin), ident, 0.0);
  CHECK(check_martingale_increment(centered) < 1e-12);

  const StepDist biased({-1.0, 1.0}, {0.5, 0.5}, 0.1);
  const auto bad = build_exact(std::vector<StepDist>(6, biased), ident, 0.0);
  CHECK(check_martingale_increment(bad) == doctest::Approx(0.1));

  const StepDist sure({0.0}, {1.0});
  const auto silent = build_exact(std::vector<StepDist>(4, sure), ident, 0.0);
  CHECK(check_martingale_increment(silent) == 0.0);
}

TEST_CASE("loeve orthogonality for unit, transform-sign, and random signs") {
  const StepDist coin({-1.0, 1.0}, {0.5, 0.5});
  const auto rm = [](std::uint64_t n, std::span<const double> h) {
    return h.back() * (1.0 - 1.0 / static_cast<double>(n + 1));
  };
  const auto ep = build_exact(std::vector<StepDist>(10, coin), rm, 1.0);

  std::vector<finprob::RandomVar> unit(
      ep.steps, finprob::RandomVar::constant(ep.space.size(), 1.0));
  CHECK(loeve_orthogonality(ep, unit) < 1e-12);

  CHECK(loeve_orthogonality(ep, sign_of_transform(ep)) < 1e-12);

  // Diagonal E[Z_n^2] = E[W_n^2] > 0 when signs never vanish.
  for (std::uint64_t n = 1; n <= ep.steps; ++n) {
    const auto z = ep.ws[n - 1];  // signs = 1
    CHECK(finprob::expectation(ep.space, z * z) > 0.0);
  }

  // Random level-measurable signs.
  rng::SplitMix64 g(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<finprob::RandomVar> signs;
    for (std::uint64_t n = 1; n <= ep.steps; ++n) {
      const auto& part = ep.level(n - 1);
      std::vector<double> block(part.block_count());
      for (double& b : block) b = g.next_u01() < 0.5 ? -1.0 : 1.0;
      std::vector<double> v(ep.space.size());
      for (std::size_t o = 0; o < v.size(); ++o) v[o] = block[part.block_of(o)];
      signs.emplace_back(std::move(v));
    }
    REQUIRE(loeve_orthogonality(ep, signs) < 1e-12);
  }

  // Non-measurable signs are rejected: W_1 is level-1, not level-0.
  std::vector<finprob::RandomVar> bad = unit;
  bad[0] = ep.ws[0];
  CHECK_THROWS_AS(loeve_orthogonality(ep, bad), std::invalid_argument);
}

TEST_CASE("noise model variance matches the exact-process second moment") {
  const auto noise = NoiseModel::gaussian(seqs::harmonic1());
  const auto alphabet = binary_surrogate_alphabet(noise, 8);
  const auto ident = [](std::uint64_t, std::span<const double> h) { return h.back(); };
  const auto ep = build_exact(alphabet, ident, 0.0);
  for (std::uint64_t n = 1; n <= ep.steps; ++n) {
    const double exact = finprob::expectation(ep.space, ep.ws[n - 1] * ep.ws[n - 1]);
    CHECK(std::fabs(exact - noise.variance(n)) < 1e-12);
  }
}

TEST_CASE("monte carlo: deterministic contraction converges for every seed") {
  ProcessSpec spec;
  spec.id = "contract";
  spec.transform = [](std::uint64_t, std::span<const double> h) {
    return 0.5 * h.back();
  };
  spec.noise = NoiseModel::none();
  spec.x0 = 8.0;
  spec.x_star = 0.0;
  const auto rep = monte_carlo_convergence(spec, 0, 9, 100, 1e-6, {10, 100}, 2);
  CHECK(rep.fraction_converged == 1.0);
  CHECK(rep.diverged_count == 0);
  CHECK(rep.checkpoints.size() == 2);
  CHECK(rep.checkpoints[0].median_err == doctest::Approx(8.0 * std::pow(0.5, 9)));
  CHECK(rep.terminal_errors.size() == 10);
}

TEST_CASE("monte carlo: eps = 1e18 counts everything but diverged runs") {
  ProcessSpec spec;
  spec.transform = [](std::uint64_t, std::span<const double> h) {
    return h.back() * 10.0;  // diverges
  };
  spec.noise = NoiseModel::none();
  spec.x0 = 1.0;
  const auto rep = monte_carlo_convergence(spec, 0, 4, 50, 1e18, {}, 1);
  CHECK(rep.diverged_count == 5);
  CHECK(rep.fraction_converged == 0.0);
}

TEST_CASE("monte carlo report is identical across job counts") {
  const auto spec = rm_identity_spec(1.0, NoiseModel::gaussian(seqs::harmonic1()));
  const auto r1 = monte_carlo_convergence(spec, 0, 40, 300, 0.05, {10, 100, 300}, 1);
  const auto r8 = monte_carlo_convergence(spec, 0, 40, 300, 0.05, {10, 100, 300}, 8);
  CHECK(r1.terminal_errors == r8.terminal_errors);
  CHECK(r1.fraction_converged == r8.fraction_converged);
  for (std::size_t i = 0; i < r1.checkpoints.size(); ++i) {
    CHECK(r1.checkpoints[i].median_err == r8.checkpoints[i].median_err);
    CHECK(r1.checkpoints[i].p90_err == r8.checkpoints[i].p90_err);
  }
}

TEST_CASE("adapted transforms consume the auxiliary channel reproducibly") {
  ProcessSpec spec;
  spec.id = "adapted";
  spec.adapted = true;
  spec.adapted_transform = [](std::uint64_t, std::span<const double> h, double aux) {
    return 0.9 * h.back() + 0.01 * (aux - 0.5);
  };
  spec.noise = NoiseModel::gaussian(seqs::harmonic1());
  spec.x0 = 1.0;
  const auto a = simulate(spec, 7, 200);
  const auto b = simulate(spec, 7, 200);
  CHECK(a.xs == b.xs);

  // The noise draws are identical whether or not the transform consumes
  // auxiliary randomness (counter channels are independent).
  ProcessSpec det = spec;
  det.adapted = false;
  det.adapted_transform = nullptr;
  det.transform = [](std::uint64_t, std::span<const double> h) { return 0.9 * h.back(); };
  const auto c = simulate(det, 7, 200);
  CHECK(a.ws == c.ws);
}

TEST_SUITE_END();
