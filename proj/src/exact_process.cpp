#include "salab/exact_process.hpp"

#include <cmath>
#include <stdexcept>

namespace salab::process {

StepDist::StepDist(std::vector<double> v, std::vector<double> p, double bias) {
  if (v.empty() || v.size() != p.size())
    throw std::invalid_argument("StepDist: values/probs mismatch");
  double total = 0.0;
  for (double q : p) {
    if (q < 0.0) throw std::invalid_argument("StepDist: negative prob");
    total += q;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("StepDist: probs sum to " + std::to_string(total));
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) m += p[i] * v[i];
  for (double& x : v) x = x - m + bias;
  values = std::move(v);
  probs = std::move(p);
}

double StepDist::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += probs[i] * values[i];
  return m;
}

double StepDist::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    v += probs[i] * (values[i] - m) * (values[i] - m);
  return v;
}

std::vector<StepDist> binary_surrogate_alphabet(const NoiseModel& noise,
                                                std::uint64_t steps) {
  std::vector<StepDist> out;
  out.reserve(steps);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    const double s = std::sqrt(noise.variance(n));
    out.emplace_back(std::vector<double>{-s, s}, std::vector<double>{0.5, 0.5},
                     noise.mean(n));
  }
  return out;
}

ExactProcess build_exact(
    const std::vector<StepDist>& alphabet_per_step,
    const std::function<double(std::uint64_t, std::span<const double>)>& transform,
    double x0) {
  const std::uint64_t h = alphabet_per_step.size();
  if (h == 0) throw std::invalid_argument("build_exact: need at least one step");
  if (!transform) throw std::invalid_argument("build_exact: transform missing");

  std::uint64_t outcomes = 1;
  for (const auto& d : alphabet_per_step) {
    outcomes *= d.values.size();
    if (outcomes > kExactOutcomeGuard)
      throw std::invalid_argument("build_exact: product space exceeds 2^20 outcomes");
  }

  // suffix_size[k] = number of outcomes per level-k block.
  std::vector<std::uint64_t> suffix_size(h + 1, 1);
  for (std::uint64_t k = h; k >= 1; --k)
    suffix_size[k - 1] = suffix_size[k] * alphabet_per_step[k - 1].values.size();
  // suffix_size[0] == outcomes.

  std::vector<double> weights(outcomes, 0.0);
  std::vector<finprob::RandomVar> xs(h + 1), ts(h), ws(h);
  for (auto& rv : xs) rv = finprob::RandomVar::constant(outcomes, 0.0);
  for (auto& rv : ts) rv = finprob::RandomVar::constant(outcomes, 0.0);
  for (auto& rv : ws) rv = finprob::RandomVar::constant(outcomes, 0.0);
  for (std::uint64_t o = 0; o < outcomes; ++o) xs[0].values[o] = x0;

  // Depth-first walk of the prefix tree; each node covers the contiguous
  // outcome range [base, base + suffix_size[depth]). T_n is evaluated
  // once per node, not once per outcome.
  std::vector<double> hist(h + 1, 0.0);
  hist[0] = x0;
  std::function<void(std::uint64_t, std::uint64_t, double)> walk =
      [&](std::uint64_t depth, std::uint64_t base, double prob) {
        // depth = number of symbols fixed so far; next step is depth+1.
        if (depth == h) {
          weights[base] = prob;
          return;
        }
        const std::uint64_t n = depth + 1;  // 1-based step
        const auto& dist = alphabet_per_step[depth];
        const std::span<const double> history(hist.data(), n);
        const double t = transform(n, history);
        for (std::size_t s = 0; s < dist.values.size(); ++s) {
          const double w = dist.values[s];
          const double x_next = t + w;
          const std::uint64_t child = base + s * suffix_size[n];
          for (std::uint64_t o = child; o < child + suffix_size[n]; ++o) {
            ts[depth].values[o] = t;
            ws[depth].values[o] = w;
            xs[n].values[o] = x_next;
          }
          hist[n] = x_next;
          walk(depth + 1, child, prob * dist.probs[s]);
        }
      };
  walk(0, 0, 1.0);

  std::vector<finprob::Partition> levels;
  levels.reserve(h + 1);
  for (std::uint64_t k = 0; k <= h; ++k) {
    std::vector<std::uint32_t> ids(outcomes);
    const std::uint64_t block_size = suffix_size[k];
    for (std::uint64_t o = 0; o < outcomes; ++o)
      ids[o] = static_cast<std::uint32_t>(o / block_size);
    levels.emplace_back(std::move(ids),
                        static_cast<std::uint32_t>(outcomes / block_size));
  }

  return ExactProcess{h, finprob::FiniteProbSpace(std::move(weights)),
                      finprob::Filtration(std::move(levels)), std::move(xs),
                      std::move(ts), std::move(ws)};
}

Decomposition decompose(const ExactProcess& ep, std::uint64_t n) {
  if (n < 1 || n > ep.steps)
    throw std::invalid_argument("decompose: step out of range [1, " +
                                std::to_string(ep.steps) + "]");
  Decomposition d;
  d.t_hat = finprob::cond_expectation(ep.space, ep.level(n - 1), ep.xs[n]);
  d.w_hat = ep.xs[n] - d.t_hat;
  return d;
}

double check_martingale_increment(const ExactProcess& ep) {
  double worst = 0.0;
  for (std::uint64_t n = 1; n <= ep.steps; ++n) {
    const auto ce = finprob::cond_expectation(ep.space, ep.level(n - 1), ep.ws[n - 1]);
    for (double v : ce.values) worst = std::max(worst, std::fabs(v));
  }
  return worst;
}

double loeve_orthogonality(const ExactProcess& ep,
                           const std::vector<finprob::RandomVar>& signs) {
  if (signs.size() != ep.steps)
    throw std::invalid_argument("loeve_orthogonality: need one sign variable per step");
  std::vector<finprob::RandomVar> z;
  z.reserve(ep.steps);
  for (std::uint64_t n = 1; n <= ep.steps; ++n) {
    if (!finprob::is_measurable(signs[n - 1], ep.level(n - 1)))
      throw std::invalid_argument("loeve_orthogonality: signs[" + std::to_string(n - 1) +
                                  "] is not level-" + std::to_string(n - 1) +
                                  " measurable");
    z.push_back(signs[n - 1] * ep.ws[n - 1]);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j)
      worst = std::max(worst, std::fabs(finprob::expectation(ep.space, z[i] * z[j])));
  return worst;
}

std::vector<finprob::RandomVar> sign_of_transform(const ExactProcess& ep) {
  std::vector<finprob::RandomVar> signs;
  signs.reserve(ep.steps);
  for (std::uint64_t n = 1; n <= ep.steps; ++n) {
    signs.push_back(finprob::apply_fn(ep.ts[n - 1], [](double t) {
      return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    }));
  }
  return signs;
}

}  // namespace salab::process
