#include "salab/series_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace salab::series {

namespace {

// Compensated (Kahan) accumulator; plain doubles lose ~1e-8 absolute on
// 1e7-term sums, which would drown tolerances like 1e-8.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

std::string SeriesVerdict::kind_name() const {
  switch (kind) {
    case Kind::converges: return "converges";
    case Kind::diverges: return "diverges";
    default: return "undetermined";
  }
}

SeriesVerdict series_verdict(const RealSeq& s, std::uint64_t horizon, double tol,
                             double div_threshold) {
  if (horizon == 0) throw std::invalid_argument("series_verdict: horizon must be >= 1");
  const std::uint64_t window_start = (horizon + 1) / 2;
  Kahan acc;
  double win_min = std::numeric_limits<double>::infinity();
  double win_max = -std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    acc.add(s.at(n));
    if (n >= window_start) {
      win_min = std::min(win_min, acc.sum);
      win_max = std::max(win_max, acc.sum);
    }
  }
  SeriesVerdict v;
  v.horizon = horizon;
  v.partial_sum = acc.sum;
  v.residual = win_max - win_min;
  v.tol = tol;
  v.div_threshold = div_threshold;
  if (v.residual < tol)
    v.kind = SeriesVerdict::Kind::converges;
  else if (std::fabs(v.partial_sum) > div_threshold)
    v.kind = SeriesVerdict::Kind::diverges;
  else
    v.kind = SeriesVerdict::Kind::undetermined;
  return v;
}

std::vector<double> partial_sums(const RealSeq& s, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("partial_sums: n must be >= 1");
  std::vector<double> out;
  out.reserve(n);
  double sum = 0.0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    sum += s.at(i);
    out.push_back(sum);
  }
  return out;
}

RmScheduleReport validate_rm_schedule(const RealSeq& a, std::uint64_t horizon,
                                      double tol, double div_threshold) {
  if (horizon == 0) throw std::invalid_argument("validate_rm_schedule: horizon must be >= 1");
  if (tol <= 0 || div_threshold <= 0)
    throw std::invalid_argument("validate_rm_schedule: tol and div_threshold must be positive");

  RmScheduleReport rep;
  const std::uint64_t tail_len = (horizon + 9) / 10;
  const std::uint64_t tail_start = horizon - tail_len + 1;
  double tail_max = 0.0;
  for (std::uint64_t n = tail_start; n <= horizon; ++n)
    tail_max = std::max(tail_max, a.at(n));
  rep.tail_max = tail_max;
  rep.tends_to_zero = tail_max < tol;

  rep.sum_diverges = series_verdict(a, horizon, tol, div_threshold);

  RealSeq a_sq("(" + a.label() + ")^2", RealSeq::Sign::nonnegative,
               [a](std::uint64_t n) {
                 const double v = a.at(n);
                 return v * v;
               });
  rep.sum_sq_converges = series_verdict(a_sq, horizon, tol, div_threshold);
  return rep;
}

EventuallyPositiveReport eventually_positive(const RealSeq& a, std::uint64_t horizon) {
  if (horizon == 0) throw std::invalid_argument("eventually_positive: horizon must be >= 1");
  // Last index with a positive term, if any.
  std::uint64_t last_pos = 0;
  for (std::uint64_t n = 1; n <= horizon; ++n)
    if (a.at(n) > 0.0) last_pos = n;
  EventuallyPositiveReport rep;
  if (last_pos == horizon) {
    rep.eventually_zero = false;
    return rep;
  }
  rep.eventually_zero = true;
  rep.switch_index = last_pos + 1;
  return rep;
}

RealSeq du_bois_reymond_companion(
    const RealSeq& a, std::uint64_t horizon,
    std::optional<std::function<double(std::uint64_t)>> analytic_tail, double tol,
    double div_threshold) {
  if (horizon == 0)
    throw std::invalid_argument("du_bois_reymond_companion: horizon must be >= 1");

  const auto ev = eventually_positive(a, horizon);
  if (ev.eventually_zero) {
    // Finite support: any divergent multiplier works; b_n = n keeps the
    // product series finite trivially.
    return RealSeq("dubois(" + a.label() + ")", RealSeq::Sign::nonnegative,
                   [](std::uint64_t n) { return static_cast<double>(n); });
  }

  if (!analytic_tail) {
    const auto verdict = series_verdict(a, horizon, tol, div_threshold);
    if (verdict.diverges())
      throw std::invalid_argument(
          "du_bois_reymond_companion: sum diverges at horizon (S_" +
          std::to_string(horizon) + " = " + std::to_string(verdict.partial_sum) + ")");
  }

  // r[n] = sum_{k>n} a_k for n = 0..horizon. Backward accumulation keeps
  // the small tail terms from being cancelled by the large head.
  auto tails = std::make_shared<std::vector<double>>(horizon + 1, 0.0);
  if (analytic_tail) {
    for (std::uint64_t n = 0; n <= horizon; ++n) (*tails)[n] = (*analytic_tail)(n);
  } else {
    Kahan acc;
    for (std::uint64_t n = horizon; n >= 1; --n) {
      acc.add(a.at(n));
      (*tails)[n - 1] = acc.sum;
    }
  }

  const std::string label = "dubois(" + a.label() + ")";
  return RealSeq(label, RealSeq::Sign::nonnegative,
                 [tails, horizon, label](std::uint64_t n) {
                   if (n > horizon)
                     throw std::out_of_range(label + " probed past horizon " +
                                             std::to_string(horizon));
                   const double r = (*tails)[n - 1];
                   if (!(r > 0.0))
                     throw std::runtime_error(
                         label + ": tail underflowed to zero at index " +
                         std::to_string(n) + "; reduce the horizon");
                   return 1.0 / std::sqrt(r);
                 });
}

RealSeq abel_dini_rho(const RealSeq& a, std::uint64_t horizon) {
  if (horizon == 0) throw std::invalid_argument("abel_dini_rho: horizon must be >= 1");
  {
    // Fail fast if the prefix is identically zero.
    Kahan acc;
    for (std::uint64_t n = 1; n <= horizon; ++n) acc.add(a.at(n));
    if (!(acc.sum > 0.0))
      throw std::invalid_argument("abel_dini_rho: S_" + std::to_string(horizon) + " = 0");
  }
  // Stateful generator: the RealSeq memo fills indices once, in order.
  auto acc = std::make_shared<Kahan>();
  return RealSeq("abeldini(" + a.label() + ")", RealSeq::Sign::nonnegative,
                 [a, acc](std::uint64_t n) {
                   acc->add(a.at(n));
                   return acc->sum > 0.0 ? 1.0 / acc->sum : 1.0;
                 });
}

SeriesVerdict abel_descending_check(const RealSeq& a, const RealSeq& b,
                                    std::uint64_t horizon, double tol,
                                    double div_threshold) {
  if (horizon == 0)
    throw std::invalid_argument("abel_descending_check: horizon must be >= 1");
  double prev = a.at(1);
  for (std::uint64_t n = 2; n <= horizon; ++n) {
    const double cur = a.at(n);
    if (cur > prev) throw MonotonicityViolation(a.label(), n);
    prev = cur;
  }
  const auto b_verdict = series_verdict(b, horizon, tol, div_threshold);
  auto product = seqs::product(a, b);
  auto verdict = series_verdict(product, horizon, tol, div_threshold);
  if (!b_verdict.converges() && verdict.converges()) {
    // The criterion's hypotheses were not certified; never claim more
    // than the inputs support.
    verdict.kind = SeriesVerdict::Kind::undetermined;
  }
  return verdict;
}

void DsLemmaInput::validate() const {
  if (!a.valid() || !b.valid() || !c.valid() || !delta.valid())
    throw std::invalid_argument("DsLemmaInput: all four sequences are required");
  if (a.declared_sign() != RealSeq::Sign::nonnegative ||
      b.declared_sign() != RealSeq::Sign::nonnegative ||
      c.declared_sign() != RealSeq::Sign::nonnegative)
    throw std::invalid_argument("DsLemmaInput: a, b, c must be declared nonnegative");
  if (n0 == 0) throw std::invalid_argument("DsLemmaInput: N0 must be >= 1");
  if (horizon <= n0) throw std::invalid_argument("DsLemmaInput: horizon must exceed N0");
}

std::vector<double> ds_lemma1_envelope(const DsLemmaInput& inp) {
  inp.validate();
  std::vector<double> xi;
  xi.reserve(inp.horizon - inp.n0 + 1);
  xi.push_back(inp.xi0);
  double cur = inp.xi0;
  for (std::uint64_t n = inp.n0; n < inp.horizon; ++n) {
    cur = std::max(inp.a.at(n),
                   (1.0 + inp.b.at(n)) * cur + inp.delta.at(n) - inp.c.at(n));
    xi.push_back(cur);
  }
  return xi;
}

double ds_1_helper_bound(const DsLemmaInput& inp, std::uint64_t N, std::uint64_t n) {
  inp.validate();
  if (!(inp.n0 <= N && N < n && n <= inp.horizon))
    throw std::invalid_argument("ds_1_helper_bound: need N0 <= N < n <= horizon");

  const auto envelope = ds_lemma1_envelope(inp);
  const double xi_N = envelope[N - inp.n0];

  // Backward suffix scan. At position j: prod = prod_{k=j+1..n}(1+b_k),
  // dsum = sum_{k=j+1..n} prod_{i=k+1..n}(1+b_i) (delta_k - c_k).
  double prod = 1.0;
  double dsum = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t j = n; j >= N; --j) {
    // a-branch last fired at step j: xi_{j+1} = a_j, linear afterwards.
    best = std::max(best, prod * inp.a.at(j) + dsum);
    dsum += prod * (inp.delta.at(j) - inp.c.at(j));
    prod *= 1.0 + inp.b.at(j);
    if (j == N) break;
  }
  // a-branch never fired in [N, n]: pure linear path from xi_N.
  best = std::max(best, prod * xi_N + dsum);
  return best;
}

}  // namespace salab::series
