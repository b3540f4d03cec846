#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "salab/sequence.hpp"

namespace salab::process {

// Divergence guard: an iterate past this magnitude (or non-finite) flags
// the trajectory and stops the run.
inline constexpr double kDivergenceBound = 1e12;

// Per-step centered noise W_n = scale(n) * base + bias, where base is a
// standard draw of the declared kind (unit gaussian, uniform on [-1,1],
// or a centered discrete table). Scales may carry sign; E[W_n^2] is
// available in closed form. `bias` exists only to exercise the
// martingale-increment detector and is zero in every normal model.
class NoiseModel {
 public:
  enum class Kind { gaussian, uniform, discrete };

  static NoiseModel gaussian(Schedule sigma);
  static NoiseModel uniform(Schedule halfwidth);
  static NoiseModel discrete(std::vector<double> values, std::vector<double> probs,
                             Schedule scale);
  static NoiseModel none();  // zero noise

  Kind kind() const { return kind_; }
  double sample(std::uint64_t seed, std::uint64_t step, std::uint32_t channel = 0) const;
  double scale_at(std::uint64_t step) const { return scale_.at(step); }
  double base_variance() const { return base_variance_; }
  double variance(std::uint64_t step) const {  // E[W_n^2] for the centered part
    const double s = scale_.at(step);
    return s * s * base_variance_;
  }
  double mean(std::uint64_t /*step*/) const { return bias_; }
  double bias() const { return bias_; }
  NoiseModel with_bias(double b) const;
  // Same model with scale multiplied pointwise by f(n); used to fold
  // step-size factors (e.g. W_n = -a_n * noise) into the model.
  NoiseModel rescaled(const std::string& label,
                      std::function<double(std::uint64_t)> factor) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  std::string describe() const;

 private:
  NoiseModel(Kind k, Schedule scale) : kind_(k), scale_(std::move(scale)) {}
  Kind kind_;
  Schedule scale_;
  double base_variance_ = 0.0;
  double bias_ = 0.0;
  std::vector<double> values_;  // discrete only, centered
  std::vector<double> probs_;
  std::vector<double> cum_;  // cumulative probs for inverse-CDF sampling
};

// The generic iterative process X_{n+1} = T_n(X_1..X_n) + W_n. The
// transform sees the full history; adapted transforms additionally
// consume one auxiliary uniform draw per step from a dedicated counter
// channel, so they can never desynchronize the noise stream.
struct ProcessSpec {
  std::string id = "custom";
  std::function<double(std::uint64_t n, std::span<const double> history)> transform;
  std::function<double(std::uint64_t n, std::span<const double> history, double aux)>
      adapted_transform;
  bool adapted = false;
  NoiseModel noise = NoiseModel::none();
  double x_star = 0.0;
  double x0 = 0.0;

  double apply_transform(std::uint64_t n, std::span<const double> history,
                         std::uint64_t seed) const;
};

// Channel layout for the per-step counter streams.
inline constexpr std::uint32_t kChanNoise = 0;
inline constexpr std::uint32_t kChanAux = 1;
inline constexpr std::uint32_t kChanNoise2 = 2;

struct Trajectory {
  std::vector<double> xs;  // X_1..X_len
  std::vector<double> ts;  // T_n, n = 1..len-1
  std::vector<double> ws;  // realized W_n
  std::uint64_t seed = 0;
  bool diverged = false;
  std::uint64_t diverged_at = 0;  // step index of the first flagged value

  double terminal_error(double x_star) const;
  double error_at(std::uint64_t n, double x_star) const;  // 1-based step
};

// Pure function of (spec, seed, horizon); per-step noise comes from a
// counter stream keyed by (seed, step), so steps are independent draws
// and runs reproduce bit-for-bit.
Trajectory simulate(const ProcessSpec& spec, std::uint64_t seed, std::uint64_t horizon);

void write_trajectory_csv(const Trajectory& tr, const std::string& path);

struct CheckpointStat {
  std::uint64_t n = 0;
  double median_err = 0.0;
  double p90_err = 0.0;
};

struct MonteCarloReport {
  std::string spec_id;
  std::uint64_t seed_lo = 0, seed_hi = 0;  // inclusive
  std::uint64_t horizon = 0;
  double eps = 0.0;
  double fraction_converged = 0.0;
  std::uint64_t diverged_count = 0;
  std::vector<CheckpointStat> checkpoints;
  std::vector<double> terminal_errors;  // ordered by ascending seed
};

// Seeds run independently (optionally in parallel); aggregation folds
// results in ascending-seed order so reports are identical for any job
// count.
MonteCarloReport monte_carlo_convergence(const ProcessSpec& spec, std::uint64_t seed_lo,
                                         std::uint64_t seed_hi, std::uint64_t horizon,
                                         double eps,
                                         const std::vector<std::uint64_t>& checkpoints,
                                         unsigned jobs = 1);

}  // namespace salab::process
