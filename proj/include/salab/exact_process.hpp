#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "salab/finprob.hpp"
#include "salab/process.hpp"

namespace salab::process {

// Hard cap on the product-space size; beyond it only Monte Carlo mode.
inline constexpr std::uint64_t kExactOutcomeGuard = 1ull << 20;

// Finite noise alphabet for one step. Values are re-centered at
// construction so each step's noise has mean zero (plus an optional bias
// kept for detector tests, mirroring NoiseModel::with_bias).
struct StepDist {
  std::vector<double> values;
  std::vector<double> probs;

  StepDist(std::vector<double> v, std::vector<double> p, double bias = 0.0);
  double variance() const;  // second moment of the centered part
  double mean() const;
};

// The process realized exactly on the product space of per-step noise
// alphabets. Outcomes are digit strings (step 1 = most significant
// digit); filtration level k groups outcomes sharing the first k
// symbols, so level 0 is trivial and X_n, T_n are level-(n-1)
// measurable while W_n is level-n measurable.
struct ExactProcess {
  std::uint64_t steps = 0;  // number of noise steps h; X has h+1 entries
  finprob::FiniteProbSpace space;
  finprob::Filtration filtration;       // levels 0..h
  std::vector<finprob::RandomVar> xs;   // X_1..X_{h+1}
  std::vector<finprob::RandomVar> ts;   // T_1..T_h
  std::vector<finprob::RandomVar> ws;   // W_1..W_h

  const finprob::Partition& level(std::uint64_t k) const { return filtration.level(k); }
};

// Tabulates X, T, W on every outcome of the product space. Throws when
// the outcome count would exceed the 2^20 guard.
ExactProcess build_exact(
    const std::vector<StepDist>& alphabet_per_step,
    const std::function<double(std::uint64_t, std::span<const double>)>& transform,
    double x0);

// Convenience: same binary +-s_n alphabet at every step, with s_n chosen
// to match the given noise model's per-step mean and variance.
std::vector<StepDist> binary_surrogate_alphabet(const NoiseModel& noise,
                                                std::uint64_t steps);

struct Decomposition {
  finprob::RandomVar t_hat;  // E[X_{n+1} | F_n]
  finprob::RandomVar w_hat;  // X_{n+1} - t_hat
};

// The definitional decomposition: conditional expectation of X_{n+1}
// given the first n-1... (level n-1 holds X_n's history; the transform
// value is the level-(n-1) projection of X_{n+1}). Reproduces the
// tabulated T_n, W_n to 1e-12.
Decomposition decompose(const ExactProcess& ep, std::uint64_t n);

// max over steps n and outcomes of |E[W_n | F_n]|; < 1e-12 for centered
// noise by construction.
double check_martingale_increment(const ExactProcess& ep);

// With Z_n = signs[n-1] * W_n for level-(n-1)-measurable sign variables,
// returns max_{i != j} |E[Z_i Z_j]|. The factor-out/tower argument makes
// this exactly zero up to rounding.
double loeve_orthogonality(const ExactProcess& ep,
                           const std::vector<finprob::RandomVar>& signs);

// Signs = sgn(T_n) with sgn(0) = 0; the Derman-Sacks workhorse sequence.
std::vector<finprob::RandomVar> sign_of_transform(const ExactProcess& ep);

}  // namespace salab::process
