#include "salab/algorithms.hpp"

#include <cmath>
#include <stdexcept>

namespace salab::algorithms {

void RootFindingProblem::spot_check_linear_bound(const std::vector<double>& grid) const {
  if (!M) throw std::invalid_argument("RootFindingProblem: M required");
  for (double x : grid)
    if (std::fabs(M(x)) > A * std::fabs(x) + B + 1e-9)
      throw std::invalid_argument("RootFindingProblem: linear bound violated at x = " +
                                  std::to_string(x));
}

void ContractionProblem::spot_check(const std::vector<double>& grid) const {
  if (!g) throw std::invalid_argument("ContractionProblem: g required");
  if (!(gamma_contr > 0.0 && gamma_contr < 1.0))
    throw std::invalid_argument("ContractionProblem: gamma_contr must be in (0,1)");
  for (double x : grid)
    for (double y : grid) {
      if (x == y) continue;
      if (std::fabs(g(x) - g(y)) > gamma_contr * std::fabs(x - y) + 1e-9)
        throw std::invalid_argument(
            "ContractionProblem: contraction violated on (" + std::to_string(x) + ", " +
            std::to_string(y) + ")");
    }
}

std::vector<double> slln_estimator(std::span<const double> ys) {
  if (ys.empty()) throw std::invalid_argument("slln_estimator: empty stream");
  std::vector<double> iterates;
  iterates.reserve(ys.size() + 1);
  double x = 0.0;
  iterates.push_back(x);
  for (std::size_t k = 1; k <= ys.size(); ++k) {
    x += (ys[k - 1] - x) / static_cast<double>(k);
    iterates.push_back(x);
  }
  return iterates;
}

process::ProcessSpec rm_spec(const RootFindingProblem& p, const Schedule& a) {
  if (!p.M) throw std::invalid_argument("rm_spec: M required");
  process::ProcessSpec spec;
  spec.id = p.name;
  const auto M = p.M;
  const double b = p.b;
  const Schedule sched = a;
  spec.transform = [M, b, sched](std::uint64_t n, std::span<const double> hist) {
    const double x = hist[hist.size() - 1];
    return x + sched.at(n) * (b - M(x));
  };
  // W_n = a_n (M(x_n) - y_n) = -a_n * (observation noise at step n).
  spec.noise = p.noise.rescaled("-a*" + a.label(),
                                [sched](std::uint64_t n) { return -sched.at(n); });
  spec.x_star = p.x_star;
  spec.x0 = p.x0;
  return spec;
}

process::Trajectory robbins_monro(const RootFindingProblem& p, const Schedule& a,
                                  std::uint64_t seed, std::uint64_t horizon) {
  return process::simulate(rm_spec(p, a), seed, horizon);
}

process::Trajectory kiefer_wolfowitz(const RootFindingProblem& p, const Schedule& a,
                                     const Schedule& c, std::uint64_t seed,
                                     std::uint64_t horizon) {
  if (!p.M) throw std::invalid_argument("kiefer_wolfowitz: M required");
  if (horizon == 0) throw std::invalid_argument("kiefer_wolfowitz: horizon must be >= 1");
  process::Trajectory tr;
  tr.seed = seed;
  tr.xs.reserve(horizon);
  tr.xs.push_back(p.x0);
  for (std::uint64_t n = 1; n < horizon; ++n) {
    const double cn = c.at(n);
    if (!(cn > 0.0))
      throw std::invalid_argument("kiefer_wolfowitz: c_n must be positive (n = " +
                                  std::to_string(n) + ")");
    const double an = a.at(n);
    const double x = tr.xs.back();
    const double eps_plus = p.noise.sample(seed, n, process::kChanNoise);
    const double eps_minus = p.noise.sample(seed, n, process::kChanNoise2);
    const double t = x + an * (p.M(x + cn) - p.M(x - cn)) / (2.0 * cn);
    const double w = an * (eps_plus - eps_minus) / (2.0 * cn);
    const double x_next = t + w;
    tr.ts.push_back(t);
    tr.ws.push_back(w);
    tr.xs.push_back(x_next);
    if (!std::isfinite(x_next) || std::fabs(x_next) > process::kDivergenceBound) {
      tr.diverged = true;
      tr.diverged_at = n + 1;
      break;
    }
  }
  return tr;
}

process::ProcessSpec sgd_spec(const MinimizationProblem& p, const Schedule& a) {
  if (!p.grad) throw std::invalid_argument("sgd_spec: grad required");
  process::ProcessSpec spec;
  spec.id = p.name;
  const auto grad = p.grad;
  const Schedule sched = a;
  spec.transform = [grad, sched](std::uint64_t n, std::span<const double> hist) {
    const double x = hist[hist.size() - 1];
    return x - sched.at(n) * grad(x);
  };
  // Sampled gradient = grad(x) + noise, so W_n = -a_n * noise.
  spec.noise = p.noise.rescaled("-a*" + a.label(),
                                [sched](std::uint64_t n) { return -sched.at(n); });
  spec.x0 = p.x0;
  if (p.theta) spec.x_star = *p.theta;
  return spec;
}

process::Trajectory sgd(const MinimizationProblem& p, const Schedule& a,
                        std::uint64_t seed, std::uint64_t horizon) {
  return process::simulate(sgd_spec(p, a), seed, horizon);
}

std::vector<double> banach_iterate(const ContractionProblem& p, const Schedule& a,
                                   double x0, std::uint64_t horizon) {
  if (!p.g) throw std::invalid_argument("banach_iterate: g required");
  if (horizon == 0) throw std::invalid_argument("banach_iterate: horizon must be >= 1");
  std::vector<double> xs;
  xs.reserve(horizon);
  xs.push_back(x0);
  for (std::uint64_t n = 1; n < horizon; ++n) {
    const double an = a.at(n);
    if (an < 0.0 || an > 1.0)
      throw std::invalid_argument("banach_iterate: a_n outside [0,1] at n = " +
                                  std::to_string(n));
    const double x = xs.back();
    xs.push_back(x + an * (p.g(x) - x));
  }
  return xs;
}

process::ProcessSpec banach_spec(const ContractionProblem& p, const Schedule& a,
                                 double x0) {
  if (!p.g) throw std::invalid_argument("banach_spec: g required");
  process::ProcessSpec spec;
  spec.id = p.name;
  const auto g = p.g;
  const Schedule sched = a;
  spec.transform = [g, sched](std::uint64_t n, std::span<const double> hist) {
    const double x = hist[hist.size() - 1];
    return x + sched.at(n) * (g(x) - x);
  };
  spec.noise = process::NoiseModel::none();
  spec.x_star = p.fixed_point;
  spec.x0 = x0;
  return spec;
}

DvoretzkyPackage as_dvoretzky(const RootFindingProblem& p, const Schedule& a,
                              std::uint64_t horizon, std::optional<Schedule> rho) {
  if (!p.M_inverse || !(p.inverse_radius > 0.0))
    throw std::invalid_argument("as_dvoretzky(rm): missing regularity declarations "
                                "(M_inverse and inverse_radius)");
  dvoretzky::BlumProblem bp;
  bp.M = p.M;
  bp.b = p.b;
  bp.M_inverse = p.M_inverse;
  bp.inverse_radius = p.inverse_radius;
  bp.A = p.A;
  bp.B = p.B;
  bp.sigma = std::sqrt(p.noise.variance(1));
  bp.a = a;

  auto derived = dvoretzky::blum_to_dvoretzky(bp, p.x_star, horizon, std::move(rho));
  DvoretzkyPackage pkg{rm_spec(p, a), std::move(derived.params), derived.n0};
  return pkg;
}

DvoretzkyPackage as_dvoretzky(const ContractionProblem& p, const Schedule& a, double x0,
                              dvoretzky::BoundMode mode, double d_floor) {
  const double q = p.gamma_contr;
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("as_dvoretzky(contraction): gamma_contr must be in (0,1)");
  DvoretzkyPackage pkg;
  pkg.spec = banach_spec(p, a, x0);
  pkg.params.alpha = dvoretzky::ParamSeq::schedule(seqs::zero());
  pkg.params.beta = dvoretzky::ParamSeq::schedule(seqs::zero());
  const Schedule sched = a;
  const double factor = (mode == dvoretzky::BoundMode::weak) ? (1.0 - q)
                                                             : (1.0 - q) * d_floor;
  pkg.params.gamma = dvoretzky::ParamSeq::schedule(
      RealSeq("gamma", RealSeq::Sign::nonnegative,
              [sched, factor](std::uint64_t n) { return factor * sched.at(n); }));
  pkg.params.mode = mode;
  pkg.n0 = 1;
  return pkg;
}

DvoretzkyPackage as_dvoretzky(const MinimizationProblem& p, const Schedule& a,
                              std::uint64_t horizon) {
  if (!p.curvature || !p.theta)
    throw std::invalid_argument("as_dvoretzky(sgd): missing regularity declarations "
                                "(curvature and theta)");
  const double kappa = *p.curvature;
  const double theta = *p.theta;
  if (!(kappa > 0.0))
    throw std::invalid_argument("as_dvoretzky(sgd): curvature must be positive");

  // Gradient descent on a declared-quadratic loss is root finding on the
  // gradient: M = grad, target 0, root theta.
  dvoretzky::BlumProblem bp;
  bp.M = p.grad;
  bp.b = 0.0;
  bp.M_inverse = [kappa, theta](double u) { return theta + u / kappa; };
  bp.inverse_radius = 1e6;
  bp.A = kappa;
  bp.B = kappa * std::fabs(theta);
  bp.sigma = std::sqrt(p.noise.variance(1));
  bp.a = a;

  auto derived = dvoretzky::blum_to_dvoretzky(bp, theta, horizon);
  DvoretzkyPackage pkg{sgd_spec(p, a), std::move(derived.params), derived.n0};
  pkg.spec.x_star = theta;
  return pkg;
}

}  // namespace salab::algorithms
