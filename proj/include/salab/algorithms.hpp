#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salab/dvoretzky.hpp"
#include "salab/process.hpp"
#include "salab/sequence.hpp"

namespace salab::algorithms {

// Root finding: solve E[Y](x) = b given a sampling oracle y = M(x) + noise.
struct RootFindingProblem {
  std::string name = "rm";
  std::function<double(double)> M;
  double b = 0.0;
  process::NoiseModel noise = process::NoiseModel::none();
  double A = 0.0, B = 0.0;  // |M(x)| <= A|x| + B

  // Declared regularity near the root, needed for the Blum reduction.
  std::function<double(double)> M_inverse;  // u -> x with M(x) - b = u
  double inverse_radius = 0.0;
  double x_star = 0.0;
  double x0 = 0.0;

  void spot_check_linear_bound(const std::vector<double>& grid) const;
};

struct MinimizationProblem {
  std::string name = "sgd";
  std::function<double(double)> grad;  // gradient of E[L]
  process::NoiseModel noise = process::NoiseModel::none();
  double x0 = 0.0;
  // Declared regularity for packaging as a Dvoretzky process; only
  // quadratic-like declared losses are certifiable.
  std::optional<double> curvature;
  std::optional<double> theta;
};

struct ContractionProblem {
  std::string name = "banach";
  std::function<double(double)> g;
  double gamma_contr = 0.0;  // in (0,1)
  double fixed_point = 0.0;

  // |g(x) - g(x')| <= gamma_contr |x - x'| spot-checked on grid pairs.
  void spot_check(const std::vector<double>& grid) const;
};

// x_{k+1} = x_k + (y_k - x_k)/k from x_1 = 0; returns all iterates
// x_1..x_{n+1}. Equivalent to the running sample mean.
std::vector<double> slln_estimator(std::span<const double> ys);

// The Robbins-Monro process packaged as X_{n+1} = T_n + W_n with
// T_n = x_n + a_n (b - M(x_n)) and W_n = a_n (M(x_n) - y_n).
process::ProcessSpec rm_spec(const RootFindingProblem& p, const Schedule& a);

process::Trajectory robbins_monro(const RootFindingProblem& p, const Schedule& a,
                                  std::uint64_t seed, std::uint64_t horizon);

// Two-point symmetric finite difference ascent on M with independent
// noise per evaluation: x_{n+1} = x_n + a_n (y+ - y-) / (2 c_n).
process::Trajectory kiefer_wolfowitz(const RootFindingProblem& p, const Schedule& a,
                                     const Schedule& c, std::uint64_t seed,
                                     std::uint64_t horizon);

process::ProcessSpec sgd_spec(const MinimizationProblem& p, const Schedule& a);

process::Trajectory sgd(const MinimizationProblem& p, const Schedule& a,
                        std::uint64_t seed, std::uint64_t horizon);

// Deterministic damped fixed-point iteration; requires a_n in [0, 1]
// (the convex-combination regime where the error is monotone).
std::vector<double> banach_iterate(const ContractionProblem& p, const Schedule& a,
                                   double x0, std::uint64_t horizon);

process::ProcessSpec banach_spec(const ContractionProblem& p, const Schedule& a,
                                 double x0);

struct DvoretzkyPackage {
  process::ProcessSpec spec;
  dvoretzky::DvoretzkyParams params;
  std::uint64_t n0 = 1;
};

// Packages a problem so dvoretzky::certify can run on it. The RM variant
// derives parameters via the Blum reduction; its spec simulates
// bit-identically to robbins_monro.
DvoretzkyPackage as_dvoretzky(const RootFindingProblem& p, const Schedule& a,
                              std::uint64_t horizon,
                              std::optional<Schedule> rho = std::nullopt);

// Contraction: alpha = beta = 0. In weak mode gamma_n = a_n (1 - q); in
// original mode the bound is distance-dependent, so gamma_n =
// a_n (1 - q) d_floor certifies only histories with |x_n - x*| >= d_floor.
DvoretzkyPackage as_dvoretzky(const ContractionProblem& p, const Schedule& a, double x0,
                              dvoretzky::BoundMode mode, double d_floor = 1e-3);

// SGD: requires declared curvature and theta (throws otherwise).
DvoretzkyPackage as_dvoretzky(const MinimizationProblem& p, const Schedule& a,
                              std::uint64_t horizon);

}  // namespace salab::algorithms
