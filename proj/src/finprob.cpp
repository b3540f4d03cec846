#include "salab/finprob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "salab/rng.hpp"

namespace salab::finprob {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

FiniteProbSpace::FiniteProbSpace(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty())
    throw std::invalid_argument("FiniteProbSpace: at least one outcome required");
  double total = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw std::invalid_argument("FiniteProbSpace: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > kTol)
    throw std::invalid_argument("FiniteProbSpace: weights sum to " +
                                std::to_string(total) + ", not 1");
}

RandomVar operator+(const RandomVar& x, const RandomVar& y) {
  require_same_size(x.size(), y.size(), "RandomVar+");
  RandomVar out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += y[i];
  return out;
}

RandomVar operator-(const RandomVar& x, const RandomVar& y) {
  require_same_size(x.size(), y.size(), "RandomVar-");
  RandomVar out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= y[i];
  return out;
}

RandomVar operator*(const RandomVar& x, const RandomVar& y) {
  require_same_size(x.size(), y.size(), "RandomVar*");
  RandomVar out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= y[i];
  return out;
}

RandomVar operator*(double c, const RandomVar& x) {
  RandomVar out = x;
  for (double& v : out.values) v *= c;
  return out;
}

RandomVar apply_fn(const RandomVar& x, const std::function<double(double)>& f) {
  RandomVar out = x;
  for (double& v : out.values) v = f(v);
  return out;
}

Partition::Partition(std::vector<std::uint32_t> block_of, std::uint32_t block_count)
    : block_of_(std::move(block_of)), block_count_(block_count) {
  if (block_count_ == 0) throw std::invalid_argument("Partition: block_count must be >= 1");
  std::vector<bool> seen(block_count_, false);
  for (std::uint32_t b : block_of_) {
    if (b >= block_count_)
      throw std::invalid_argument("Partition: block index out of range");
    seen[b] = true;
  }
  for (std::uint32_t b = 0; b < block_count_; ++b)
    if (!seen[b])
      throw std::invalid_argument("Partition: block " + std::to_string(b) + " is empty");
}

Partition Partition::trivial(std::size_t size) {
  return Partition(std::vector<std::uint32_t>(size, 0), 1);
}

Partition Partition::discrete(std::size_t size) {
  std::vector<std::uint32_t> ids(size);
  for (std::size_t i = 0; i < size; ++i) ids[i] = static_cast<std::uint32_t>(i);
  return Partition(std::move(ids), static_cast<std::uint32_t>(size));
}

bool Partition::refines(const Partition& coarser) const {
  if (size() != coarser.size()) return false;
  // Each fine block must map into a single coarse block.
  constexpr std::uint32_t unset = 0xffffffffu;
  std::vector<std::uint32_t> image(block_count_, unset);
  for (std::size_t i = 0; i < size(); ++i) {
    const std::uint32_t fb = block_of_[i];
    const std::uint32_t cb = coarser.block_of(i);
    if (image[fb] == unset)
      image[fb] = cb;
    else if (image[fb] != cb)
      return false;
  }
  return true;
}

Filtration::Filtration(std::vector<Partition> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("Filtration: at least one level");
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k)
    if (!levels_[k + 1].refines(levels_[k]))
      throw std::invalid_argument("Filtration: level " + std::to_string(k + 1) +
                                  " does not refine level " + std::to_string(k));
}

RandomVar indicator(const FiniteProbSpace& sp, const Event& ev) {
  RandomVar out = RandomVar::constant(sp.size(), 0.0);
  for (std::uint32_t i : ev.members) {
    if (i >= sp.size()) throw std::invalid_argument("Event: member out of range");
    out.values[i] = 1.0;
  }
  return out;
}

double probability(const FiniteProbSpace& sp, const Event& ev) {
  double p = 0.0;
  for (std::uint32_t i : ev.members) {
    if (i >= sp.size()) throw std::invalid_argument("Event: member out of range");
    p += sp.weight(i);
  }
  return p;
}

double expectation(const FiniteProbSpace& sp, const RandomVar& x) {
  require_same_size(sp.size(), x.size(), "expectation");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += sp.weight(i) * x[i];
  return sum;
}

RandomVar cond_expectation(const FiniteProbSpace& sp, const Partition& part,
                           const RandomVar& x) {
  require_same_size(sp.size(), x.size(), "cond_expectation");
  require_same_size(sp.size(), part.size(), "cond_expectation(partition)");
  const std::uint32_t nb = part.block_count();
  std::vector<double> wsum(nb, 0.0), wxsum(nb, 0.0), xsum(nb, 0.0);
  std::vector<std::uint32_t> count(nb, 0);
  std::vector<bool> is_const(nb, true);
  std::vector<double> first(nb, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::uint32_t b = part.block_of(i);
    if (count[b] == 0)
      first[b] = x[i];
    else if (x[i] != first[b])
      is_const[b] = false;
    ++count[b];
    wsum[b] += sp.weight(i);
    wxsum[b] += sp.weight(i) * x[i];
    xsum[b] += x[i];
  }
  std::vector<double> block_value(nb, 0.0);
  for (std::uint32_t b = 0; b < nb; ++b) {
    if (is_const[b])
      block_value[b] = first[b];
    else if (wsum[b] > 0.0)
      block_value[b] = wxsum[b] / wsum[b];
    else
      block_value[b] = xsum[b] / static_cast<double>(count[b]);
  }
  RandomVar out = RandomVar::constant(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    out.values[i] = block_value[part.block_of(i)];
  return out;
}

bool is_measurable(const RandomVar& x, const Partition& part) {
  require_same_size(x.size(), part.size(), "is_measurable");
  constexpr std::uint32_t unset = 0xffffffffu;
  std::vector<std::uint32_t> rep(part.block_count(), unset);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::uint32_t b = part.block_of(i);
    if (rep[b] == unset)
      rep[b] = static_cast<std::uint32_t>(i);
    else if (x[i] != x[rep[b]])
      return false;
  }
  return true;
}

double check_universal_property(const FiniteProbSpace& sp, const Partition& part,
                                const RandomVar& x, const RandomVar& ce) {
  require_same_size(sp.size(), x.size(), "check_universal_property");
  if (!is_measurable(ce, part))
    throw std::invalid_argument("check_universal_property: ce is not part-measurable");
  // Indicators of the partition atoms generate the sub sigma-algebra, so
  // testing against them suffices on a finite space.
  const std::uint32_t nb = part.block_count();
  std::vector<double> ex(nb, 0.0), ece(nb, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::uint32_t b = part.block_of(i);
    ex[b] += sp.weight(i) * x[i];
    ece[b] += sp.weight(i) * ce[i];
  }
  double worst = 0.0;
  for (std::uint32_t b = 0; b < nb; ++b)
    worst = std::max(worst, std::fabs(ex[b] - ece[b]));
  return worst;
}

double check_tower(const FiniteProbSpace& sp, const Partition& coarse,
                   const Partition& fine, const RandomVar& x) {
  if (!fine.refines(coarse))
    throw std::invalid_argument("check_tower: fine does not refine coarse");
  const RandomVar inner = cond_expectation(sp, fine, x);
  const RandomVar lhs = cond_expectation(sp, coarse, inner);
  const RandomVar rhs = cond_expectation(sp, coarse, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::fabs(lhs[i] - rhs[i]));
  return worst;
}

double check_factor_out(const FiniteProbSpace& sp, const Partition& part,
                        const RandomVar& xm, const RandomVar& y) {
  if (!is_measurable(xm, part))
    throw std::invalid_argument("check_factor_out: xm is not part-measurable");
  const RandomVar lhs = cond_expectation(sp, part, xm * y);
  const RandomVar rhs = xm * cond_expectation(sp, part, y);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    worst = std::max(worst, std::fabs(lhs[i] - rhs[i]));
  return worst;
}

double jensen_check(const FiniteProbSpace& sp, const Partition& part,
                    const RandomVar& x, const std::function<double(double)>& phi) {
  const RandomVar ce_phi = cond_expectation(sp, part, apply_fn(x, phi));
  const RandomVar phi_ce = apply_fn(cond_expectation(sp, part, x), phi);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i)
    gap = std::min(gap, ce_phi[i] - phi_ce[i]);
  return gap;
}

ChebyshevReport chebyshev_check(const FiniteProbSpace& sp, const RandomVar& x, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("chebyshev_check: a must be positive");
  require_same_size(sp.size(), x.size(), "chebyshev_check");
  ChebyshevReport rep;
  double second = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::fabs(x[i]) >= a) rep.lhs += sp.weight(i);
    second += sp.weight(i) * x[i] * x[i];
  }
  rep.rhs = second / (a * a);
  return rep;
}

double borel_cantelli_tail(const RealSeq& p, std::uint64_t k, std::uint64_t horizon) {
  if (k == 0) throw std::invalid_argument("borel_cantelli_tail: k is 1-based");
  if (horizon < k) throw std::invalid_argument("borel_cantelli_tail: horizon < k");
  double sum = 0.0;
  for (std::uint64_t n = k; n <= horizon; ++n) {
    const double v = p.at(n);
    if (v > 1.0)
      throw std::invalid_argument("borel_cantelli_tail: p_" + std::to_string(n) +
                                  " = " + std::to_string(v) + " > 1");
    sum += v;
  }
  return sum;
}

double lp_norm(const FiniteProbSpace& sp, const RandomVar& x, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  require_same_size(sp.size(), x.size(), "lp_norm");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += sp.weight(i) * std::pow(std::fabs(x[i]), p);
  return std::pow(acc, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Randomized selftest suite.

namespace {

struct Instance {
  FiniteProbSpace sp;
  Partition part;
  RandomVar x;
};

FiniteProbSpace random_space(rng::SplitMix64& g, std::size_t size) {
  std::vector<double> w(size);
  double total = 0.0;
  for (double& v : w) {
    v = g.next_in(0.05, 1.0);  // strictly positive: a.e. == everywhere
    total += v;
  }
  for (double& v : w) v /= total;
  return FiniteProbSpace(std::move(w));
}

Partition random_partition(rng::SplitMix64& g, std::size_t size) {
  const auto nb = static_cast<std::uint32_t>(1 + g.next_below(size));
  std::vector<std::uint32_t> ids(size);
  // Seed each block with one outcome so none is empty, then assign the rest.
  std::vector<std::uint32_t> order(size);
  for (std::size_t i = 0; i < size; ++i) order[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = size; i > 1; --i)
    std::swap(order[i - 1], order[g.next_below(i)]);
  for (std::uint32_t b = 0; b < nb; ++b) ids[order[b]] = b;
  for (std::size_t i = nb; i < size; ++i)
    ids[order[i]] = static_cast<std::uint32_t>(g.next_below(nb));
  return Partition(std::move(ids), nb);
}

// Coarse partition obtained by merging blocks of `fine`.
Partition random_coarsening(rng::SplitMix64& g, const Partition& fine) {
  const std::uint32_t nf = fine.block_count();
  const auto nc = static_cast<std::uint32_t>(1 + g.next_below(nf));
  std::vector<std::uint32_t> merge(nf);
  for (std::uint32_t b = 0; b < nf; ++b)
    merge[b] = (b < nc) ? b : static_cast<std::uint32_t>(g.next_below(nc));
  std::vector<std::uint32_t> ids(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) ids[i] = merge[fine.block_of(i)];
  // Renumber in case some coarse label ended up unused.
  std::vector<std::uint32_t> remap(nc, 0xffffffffu);
  std::uint32_t next = 0;
  for (auto& b : ids) {
    if (remap[b] == 0xffffffffu) remap[b] = next++;
    b = remap[b];
  }
  return Partition(std::move(ids), next);
}

RandomVar random_var(rng::SplitMix64& g, std::size_t size, double lo = -5.0,
                     double hi = 5.0) {
  std::vector<double> v(size);
  for (double& e : v) e = g.next_in(lo, hi);
  return RandomVar(std::move(v));
}

RandomVar random_measurable(rng::SplitMix64& g, const Partition& part, double lo,
                            double hi) {
  std::vector<double> block(part.block_count());
  for (double& e : block) e = g.next_in(lo, hi);
  std::vector<double> v(part.size());
  for (std::size_t i = 0; i < part.size(); ++i) v[i] = block[part.block_of(i)];
  return RandomVar(std::move(v));
}

Instance random_instance(rng::SplitMix64& g, std::size_t max_size) {
  const std::size_t size = 2 + g.next_below(max_size - 1);
  auto sp = random_space(g, size);
  auto part = random_partition(g, size);
  auto x = random_var(g, size);
  return Instance{std::move(sp), std::move(part), std::move(x)};
}

}  // namespace

std::vector<SelftestResult> selftest(std::uint64_t trials, std::uint64_t seed,
                                     std::size_t max_size) {
  if (max_size < 2) throw std::invalid_argument("selftest: max_size must be >= 2");
  if (trials == 0) throw std::invalid_argument("selftest: trials must be >= 1");
  rng::SplitMix64 g(seed);
  std::vector<SelftestResult> out;
  auto record = [&out](const std::string& name, double worst, double tol = kTol) {
    out.push_back(SelftestResult{name, worst, tol, worst <= tol});
  };

  double w_universal = 0, w_tower = 0, w_factor = 0, w_linear = 0, w_mono = 0;
  double w_idem = 0, w_l2min = 0, w_contract = 0, w_cheb = 0;
  double w_meas = 0, w_triangle = 0;
  double w_jensen = std::numeric_limits<double>::infinity();

  for (std::uint64_t t = 0; t < trials; ++t) {
    Instance in = random_instance(g, max_size);
    const std::size_t size = in.sp.size();
    const RandomVar ce = cond_expectation(in.sp, in.part, in.x);

    // universal property of the conditional expectation
    w_universal = std::max(w_universal,
                           check_universal_property(in.sp, in.part, in.x, ce));

    // measurability of the projection output
    w_meas = std::max(w_meas, is_measurable(ce, in.part) ? 0.0 : 1.0);

    // tower law on a random refining pair
    const Partition coarse = random_coarsening(g, in.part);
    w_tower = std::max(w_tower, check_tower(in.sp, coarse, in.part, in.x));

    // factor-out with a random measurable factor
    const RandomVar xm = random_measurable(g, in.part, -3.0, 3.0);
    w_factor = std::max(w_factor, check_factor_out(in.sp, in.part, xm, in.x));

    // linearity: CE(alpha X + Y) = alpha CE(X) + CE(Y)
    {
      const double alpha = g.next_in(-2.0, 2.0);
      const RandomVar y = random_var(g, size);
      const RandomVar lhs = cond_expectation(in.sp, in.part, alpha * in.x + y);
      const RandomVar rhs = alpha * ce + cond_expectation(in.sp, in.part, y);
      for (std::size_t i = 0; i < size; ++i)
        w_linear = std::max(w_linear, std::fabs(lhs[i] - rhs[i]));
    }

    // monotonicity: X <= Y pointwise => CE(X) <= CE(Y)
    {
      RandomVar y = in.x;
      for (double& v : y.values) v += g.next_in(0.0, 2.0);
      const RandomVar cey = cond_expectation(in.sp, in.part, y);
      for (std::size_t i = 0; i < size; ++i)
        w_mono = std::max(w_mono, ce[i] - cey[i]);
    }

    // idempotence, exact
    {
      const RandomVar ce2 = cond_expectation(in.sp, in.part, ce);
      for (std::size_t i = 0; i < size; ++i)
        w_idem = std::max(w_idem, std::fabs(ce2[i] - ce[i]));
    }

    // Jensen for the declared convex suite
    w_jensen = std::min({w_jensen,
                         jensen_check(in.sp, in.part, in.x,
                                      [](double v) { return v * v; }),
                         jensen_check(in.sp, in.part, in.x,
                                      [](double v) { return std::fabs(v); }),
                         jensen_check(in.sp, in.part, in.x,
                                      [](double v) { return std::exp(v); })});

    // Chebyshev
    {
      const auto rep = chebyshev_check(in.sp, in.x, g.next_in(0.5, 4.0));
      w_cheb = std::max(w_cheb, rep.lhs - rep.rhs);
    }

    // Lp contractivity for p in {1, 2}
    for (double p : {1.0, 2.0})
      w_contract = std::max(w_contract,
                            lp_norm(in.sp, ce, p) - lp_norm(in.sp, in.x, p));

    // Lp triangle inequality
    {
      const RandomVar y = random_var(g, size);
      for (double p : {1.0, 2.0})
        w_triangle = std::max(w_triangle, lp_norm(in.sp, in.x + y, p) -
                                              lp_norm(in.sp, in.x, p) -
                                              lp_norm(in.sp, y, p));
    }
  }

  // L2 minimality runs on its own (fewer, heavier trials).
  {
    const std::uint64_t inst = std::min<std::uint64_t>(200, std::max<std::uint64_t>(1, trials / 5));
    for (std::uint64_t t = 0; t < inst; ++t) {
      Instance in = random_instance(g, max_size);
      const RandomVar ce = cond_expectation(in.sp, in.part, in.x);
      const double best = lp_norm(in.sp, in.x - ce, 2.0);
      for (int k = 0; k < 50; ++k) {
        const RandomVar rival = random_measurable(g, in.part, -6.0, 6.0);
        w_l2min = std::max(w_l2min, best - lp_norm(in.sp, in.x - rival, 2.0));
      }
    }
  }

  record("universal_property", w_universal);
  record("tower_law", w_tower);
  record("factor_out", w_factor);
  record("linearity", w_linear);
  record("monotonicity", w_mono);
  record("idempotence_exact", w_idem, 0.0);
  record("jensen", -w_jensen);
  record("chebyshev", w_cheb);
  record("l2_minimality", w_l2min);
  record("lp_contractivity", w_contract);
  record("lp_triangle", w_triangle);
  record("projection_measurable", w_meas, 0.0);
  return out;
}

}  // namespace salab::finprob
