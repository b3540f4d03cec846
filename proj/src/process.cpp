#include "salab/process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "salab/rng.hpp"

namespace salab::process {

NoiseModel NoiseModel::gaussian(Schedule sigma) {
  NoiseModel m(Kind::gaussian, std::move(sigma));
  m.base_variance_ = 1.0;
  return m;
}

NoiseModel NoiseModel::uniform(Schedule halfwidth) {
  NoiseModel m(Kind::uniform, std::move(halfwidth));
  m.base_variance_ = 1.0 / 3.0;
  return m;
}

NoiseModel NoiseModel::discrete(std::vector<double> values, std::vector<double> probs,
                                Schedule scale) {
  if (values.empty() || values.size() != probs.size())
    throw std::invalid_argument("NoiseModel::discrete: values/probs mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("NoiseModel::discrete: negative prob");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("NoiseModel::discrete: probs sum to " +
                                std::to_string(total));
  // Re-center so every step's noise has mean zero.
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += probs[i] * values[i];
  for (double& v : values) v -= mean;

  NoiseModel m(Kind::discrete, std::move(scale));
  m.values_ = std::move(values);
  m.probs_ = std::move(probs);
  m.cum_.resize(m.probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < m.probs_.size(); ++i) {
    acc += m.probs_[i];
    m.cum_[i] = acc;
  }
  m.cum_.back() = 1.0;
  m.base_variance_ = 0.0;
  for (std::size_t i = 0; i < m.values_.size(); ++i)
    m.base_variance_ += m.probs_[i] * m.values_[i] * m.values_[i];
  return m;
}

NoiseModel NoiseModel::none() { return discrete({0.0}, {1.0}, seqs::one()); }

double NoiseModel::sample(std::uint64_t seed, std::uint64_t step,
                          std::uint32_t channel) const {
  const double u = rng::counter_u01(seed, step, channel);
  double base = 0.0;
  switch (kind_) {
    case Kind::gaussian:
      base = rng::norm_inv_cdf(u);
      break;
    case Kind::uniform:
      base = 2.0 * u - 1.0;
      break;
    case Kind::discrete: {
      const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
      const std::size_t idx = std::min<std::size_t>(
          static_cast<std::size_t>(it - cum_.begin()), values_.size() - 1);
      base = values_[idx];
      break;
    }
  }
  return scale_.at(step) * base + bias_;
}

NoiseModel NoiseModel::with_bias(double b) const {
  NoiseModel m = *this;
  m.bias_ = b;
  return m;
}

NoiseModel NoiseModel::rescaled(const std::string& label,
                                std::function<double(std::uint64_t)> factor) const {
  NoiseModel m = *this;
  Schedule base = scale_;
  m.scale_ = RealSeq(label, RealSeq::Sign::unrestricted,
                     [base, factor](std::uint64_t n) { return factor(n) * base.at(n); });
  return m;
}

std::string NoiseModel::describe() const {
  switch (kind_) {
    case Kind::gaussian: return "gaussian(" + scale_.label() + ")";
    case Kind::uniform: return "uniform(" + scale_.label() + ")";
    default: return "discrete[" + std::to_string(values_.size()) + "](" + scale_.label() + ")";
  }
}

double ProcessSpec::apply_transform(std::uint64_t n, std::span<const double> history,
                                    std::uint64_t seed) const {
  if (adapted) {
    if (!adapted_transform)
      throw std::invalid_argument("ProcessSpec: adapted flag set without adapted_transform");
    return adapted_transform(n, history, rng::counter_u01(seed, n, kChanAux));
  }
  if (!transform) throw std::invalid_argument("ProcessSpec: transform missing");
  return transform(n, history);
}

double Trajectory::terminal_error(double x_star) const {
  if (xs.empty()) return 0.0;
  const double e = std::fabs(xs.back() - x_star);
  return std::isfinite(e) ? e : 1e18;
}

double Trajectory::error_at(std::uint64_t n, double x_star) const {
  if (xs.empty()) return 0.0;
  const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(n), xs.size()) - 1;
  const double e = std::fabs(xs[idx] - x_star);
  return std::isfinite(e) ? e : 1e18;
}

Trajectory simulate(const ProcessSpec& spec, std::uint64_t seed, std::uint64_t horizon) {
  if (horizon == 0) throw std::invalid_argument("simulate: horizon must be >= 1");
  Trajectory tr;
  tr.seed = seed;
  tr.xs.reserve(horizon);
  tr.ts.reserve(horizon - 1);
  tr.ws.reserve(horizon - 1);
  tr.xs.push_back(spec.x0);
  for (std::uint64_t n = 1; n < horizon; ++n) {
    const std::span<const double> hist(tr.xs.data(), static_cast<std::size_t>(n));
    const double t = spec.apply_transform(n, hist, seed);
    const double w = spec.noise.sample(seed, n, kChanNoise);
    const double x_next = t + w;
    tr.ts.push_back(t);
    tr.ws.push_back(w);
    tr.xs.push_back(x_next);
    if (!std::isfinite(x_next) || std::fabs(x_next) > kDivergenceBound) {
      tr.diverged = true;
      tr.diverged_at = n + 1;
      break;
    }
  }
  return tr;
}

void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "n,x,t,w\n";
  char buf[96];
  for (std::size_t i = 0; i < tr.xs.size(); ++i) {
    if (i < tr.ts.size()) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i + 1, tr.xs[i],
                    tr.ts[i], tr.ws[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,,\n", i + 1, tr.xs[i]);
    }
    out << buf;
  }
}

namespace {

// Type-7 quantile (linear interpolation) on a sorted vector.
double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) return 0.0;
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

MonteCarloReport monte_carlo_convergence(const ProcessSpec& spec, std::uint64_t seed_lo,
                                         std::uint64_t seed_hi, std::uint64_t horizon,
                                         double eps,
                                         const std::vector<std::uint64_t>& checkpoints,
                                         unsigned jobs) {
  if (seed_hi < seed_lo) throw std::invalid_argument("monte_carlo: empty seed range");
  if (!(eps > 0.0)) throw std::invalid_argument("monte_carlo: eps must be positive");
  if (horizon == 0) throw std::invalid_argument("monte_carlo: horizon must be >= 1");

  const std::uint64_t count = seed_hi - seed_lo + 1;
  struct PerSeed {
    double terminal = 0.0;
    bool diverged = false;
    std::vector<double> at_checkpoints;
  };
  std::vector<PerSeed> results(count);

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t k = begin; k < end; ++k) {
      const Trajectory tr = simulate(spec, seed_lo + k, horizon);
      PerSeed& r = results[k];
      r.terminal = tr.terminal_error(spec.x_star);
      r.diverged = tr.diverged;
      r.at_checkpoints.reserve(checkpoints.size());
      for (std::uint64_t cp : checkpoints)
        r.at_checkpoints.push_back(tr.error_at(cp, spec.x_star));
    }
  };

  const unsigned workers = std::max(1u, jobs);
  if (workers == 1 || count == 1) {
    run_range(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = static_cast<std::uint64_t>(w) * chunk;
      const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, count);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  MonteCarloReport rep;
  rep.spec_id = spec.id;
  rep.seed_lo = seed_lo;
  rep.seed_hi = seed_hi;
  rep.horizon = horizon;
  rep.eps = eps;
  rep.terminal_errors.reserve(count);
  std::uint64_t converged = 0;
  for (const PerSeed& r : results) {
    rep.terminal_errors.push_back(r.terminal);
    if (r.diverged)
      ++rep.diverged_count;
    else if (r.terminal < eps)
      ++converged;
  }
  rep.fraction_converged = static_cast<double>(converged) / static_cast<double>(count);

  for (std::size_t ci = 0; ci < checkpoints.size(); ++ci) {
    std::vector<double> errs;
    errs.reserve(count);
    for (const PerSeed& r : results) errs.push_back(r.at_checkpoints[ci]);
    std::sort(errs.begin(), errs.end());
    CheckpointStat st;
    st.n = checkpoints[ci];
    st.median_err = quantile_sorted(errs, 0.5);
    st.p90_err = quantile_sorted(errs, 0.9);
    rep.checkpoints.push_back(st);
  }
  return rep;
}

}  // namespace salab::process
