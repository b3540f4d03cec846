#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salab/sequence.hpp"

namespace salab::series {

struct MonotonicityViolation : std::runtime_error {
  MonotonicityViolation(const std::string& label, std::uint64_t index)
      : std::runtime_error("sequence '" + label + "' is not non-increasing: first violation at index " +
                           std::to_string(index)),
        index(index) {}
  std::uint64_t index;
};

// Finite-horizon certificate about an infinite series. Never a proof:
// `converges` means the tail-Cauchy residual max_{N/2<=m<n<=N}|S_n - S_m|
// fell below the tolerance, `diverges` means |S_N| exceeded the declared
// threshold, `undetermined` otherwise.
struct SeriesVerdict {
  enum class Kind { converges, diverges, undetermined };
  Kind kind = Kind::undetermined;
  std::uint64_t horizon = 0;
  double partial_sum = 0.0;   // S_N
  double residual = 0.0;      // tail-Cauchy residual over [ceil(N/2), N]
  double tol = 0.0;
  double div_threshold = 0.0;

  bool converges() const { return kind == Kind::converges; }
  bool diverges() const { return kind == Kind::diverges; }
  std::string kind_name() const;
};

inline constexpr double kDefaultTol = 1e-8;
inline constexpr double kDefaultDivThreshold = 10.0;

// Verdict for sum of s(n); compensated accumulation so the residual is
// meaningful at horizons up to ~1e7.
SeriesVerdict series_verdict(const RealSeq& s, std::uint64_t horizon,
                             double tol = kDefaultTol,
                             double div_threshold = kDefaultDivThreshold);

// Prefix sums S_1..S_n by left-to-right accumulation.
std::vector<double> partial_sums(const RealSeq& s, std::uint64_t n);

struct RmScheduleReport {
  bool tends_to_zero = false;
  double tail_max = 0.0;          // max over the last ceil(horizon/10) terms
  SeriesVerdict sum_diverges;     // verdict on sum a_n
  SeriesVerdict sum_sq_converges; // verdict on sum a_n^2
  bool all_pass() const {
    return tends_to_zero && sum_diverges.diverges() && sum_sq_converges.converges();
  }
};

// The three Robbins-Monro step-size conditions, certified at a horizon:
// a_n -> 0, sum a_n = inf, sum a_n^2 < inf.
RmScheduleReport validate_rm_schedule(const RealSeq& a, std::uint64_t horizon,
                                      double tol, double div_threshold);

struct EventuallyPositiveReport {
  bool eventually_zero = false;
  std::optional<std::uint64_t> switch_index;  // first index of the all-zero tail
};

// Finite-horizon surrogate of the classical case split: is the sequence
// zero from some index through the horizon?
EventuallyPositiveReport eventually_positive(const RealSeq& a, std::uint64_t horizon);

// "No worst convergent series": returns b with b_n -> inf while
// sum a_n b_n stays finite. Construction: with tails r_n = sum_{k>n} a_k,
// b_n = 1/sqrt(r_{n-1}); if a is eventually zero by the horizon, b_n = n.
// Tails come from backward accumulation over [1, horizon] unless an
// analytic tail function r(n) is supplied. Guarantee used by tests:
// sum_{n<=N} a_n b_n <= 2 sqrt(r_0) for every N <= horizon.
RealSeq du_bois_reymond_companion(
    const RealSeq& a, std::uint64_t horizon,
    std::optional<std::function<double(std::uint64_t)>> analytic_tail = std::nullopt,
    double tol = kDefaultTol, double div_threshold = kDefaultDivThreshold);

// Abel-Dini: for divergent sum a_n, rho_n = 1/S_n vanishes while
// sum a_n rho_n still diverges. rho_n = 1 before the first positive
// partial sum. Errors if S_horizon = 0.
RealSeq abel_dini_rho(const RealSeq& a, std::uint64_t horizon);

// Abel's descending criterion: a bounded non-increasing, sum b_n
// convergent => sum a_n b_n converges. Monotonicity violations throw;
// if sum b_n cannot be certified Cauchy at tol the verdict is honest
// (undetermined) rather than an error.
SeriesVerdict abel_descending_check(const RealSeq& a, const RealSeq& b,
                                    std::uint64_t horizon, double tol,
                                    double div_threshold = kDefaultDivThreshold);

// Data for the Derman-Sacks auxiliary lemma: nonnegative a, b, c, signed
// delta, start value xi0 at index N0.
struct DsLemmaInput {
  RealSeq a;
  RealSeq b;
  RealSeq c;
  RealSeq delta;
  double xi0 = 0.0;
  std::uint64_t n0 = 1;
  std::uint64_t horizon = 0;

  void validate() const;
};

// Worst-case sequence for the lemma: xi_{N0} = xi0 and
// xi_{n+1} = max(a_n, (1+b_n) xi_n + delta_n - c_n). Any sequence
// satisfying the lemma's inequality with the same data is dominated
// pointwise. Returns xi_{N0}..xi_{horizon}.
std::vector<double> ds_lemma1_envelope(const DsLemmaInput& inp);

// Closed-form bound from unrolling the recursion from n down to N
// (N0 <= N < n <= horizon): the maximum over the last step j at which the
// a-branch could have fired, plus the pure linear path from xi_N. Equals
// the envelope value at n+1 up to floating-point slack.
double ds_1_helper_bound(const DsLemmaInput& inp, std::uint64_t N, std::uint64_t n);

}  // namespace salab::series
