#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "salab/sequence.hpp"

namespace salab::finprob {

// Everything in this module is exact in the sense that sigma-algebras on
// a finite space are partitions and conditional expectation is per-block
// weighted averaging; identities hold to rounding (tolerance 1e-12 for
// spaces up to 2^16 outcomes). All types are immutable after
// construction and all operations are pure.

inline constexpr double kTol = 1e-12;

class FiniteProbSpace {
 public:
  explicit FiniteProbSpace(std::vector<double> weights);
  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

 private:
  std::vector<double> weights_;
};

struct RandomVar {
  std::vector<double> values;

  RandomVar() = default;
  explicit RandomVar(std::vector<double> v) : values(std::move(v)) {}
  static RandomVar constant(std::size_t size, double c) {
    return RandomVar(std::vector<double>(size, c));
  }
  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

RandomVar operator+(const RandomVar& x, const RandomVar& y);
RandomVar operator-(const RandomVar& x, const RandomVar& y);
RandomVar operator*(const RandomVar& x, const RandomVar& y);
RandomVar operator*(double c, const RandomVar& x);
RandomVar apply_fn(const RandomVar& x, const std::function<double(double)>& f);

// A finite sigma-algebra, represented by its atoms: block_of[i] is the
// block index of outcome i. Every block in [0, block_count) is nonempty.
class Partition {
 public:
  Partition(std::vector<std::uint32_t> block_of, std::uint32_t block_count);

  static Partition trivial(std::size_t size);   // one block
  static Partition discrete(std::size_t size);  // every outcome alone

  std::size_t size() const { return block_of_.size(); }
  std::uint32_t block_count() const { return block_count_; }
  std::uint32_t block_of(std::size_t i) const { return block_of_[i]; }
  const std::vector<std::uint32_t>& blocks() const { return block_of_; }

  // True when every block of this partition lies inside one block of
  // `coarser`.
  bool refines(const Partition& coarser) const;

 private:
  std::vector<std::uint32_t> block_of_;
  std::uint32_t block_count_;
};

// Increasing sequence of sigma-algebras: levels[k+1] refines levels[k].
class Filtration {
 public:
  explicit Filtration(std::vector<Partition> levels);
  std::size_t depth() const { return levels_.size(); }
  const Partition& level(std::size_t k) const { return levels_[k]; }

 private:
  std::vector<Partition> levels_;
};

struct Event {
  std::vector<std::uint32_t> members;  // outcome indices, strictly increasing
};

RandomVar indicator(const FiniteProbSpace& sp, const Event& ev);
double probability(const FiniteProbSpace& sp, const Event& ev);

double expectation(const FiniteProbSpace& sp, const RandomVar& x);

// Conditional expectation given the partition: constant on each block,
// equal to the weighted block average. A zero-weight block gets the
// unweighted arithmetic mean (any choice is almost-everywhere
// equivalent; a fixed one keeps the operation deterministic). Constant
// blocks pass through bit-exactly, which makes idempotence exact.
RandomVar cond_expectation(const FiniteProbSpace& sp, const Partition& part,
                           const RandomVar& x);

// Exact-equality measurability: x constant on every block.
bool is_measurable(const RandomVar& x, const Partition& part);

// Universal property residual: max over blocks B of
// |E[x 1_B] - E[ce 1_B]|. Throws when ce is not part-measurable.
double check_universal_property(const FiniteProbSpace& sp, const Partition& part,
                                const RandomVar& x, const RandomVar& ce);

// Tower law residual: fine must refine coarse.
double check_tower(const FiniteProbSpace& sp, const Partition& coarse,
                   const Partition& fine, const RandomVar& x);

// Factor-out residual: xm must be part-measurable.
double check_factor_out(const FiniteProbSpace& sp, const Partition& part,
                        const RandomVar& xm, const RandomVar& y);

// min over outcomes of CE(phi o X) - phi(CE(X)); >= -1e-12 for convex phi.
double jensen_check(const FiniteProbSpace& sp, const Partition& part,
                    const RandomVar& x, const std::function<double(double)>& phi);

struct ChebyshevReport {
  double lhs = 0.0;  // P(|X| >= a)
  double rhs = 0.0;  // E[X^2] / a^2
};
ChebyshevReport chebyshev_check(const FiniteProbSpace& sp, const RandomVar& x, double a);

// Union tail bound sum_{n=k}^{horizon} p_n; the quantity that must vanish
// as k grows for the Borel-Cantelli conclusion. Rejects p_n outside [0,1].
double borel_cantelli_tail(const RealSeq& p, std::uint64_t k, std::uint64_t horizon);

double lp_norm(const FiniteProbSpace& sp, const RandomVar& x, double p);

// Randomized property suite behind `finprob selftest`. Each check reports
// its worst residual over the trials and whether it stayed within the
// module tolerance.
struct SelftestResult {
  std::string name;
  double worst = 0.0;
  double tol = kTol;
  bool pass = false;
};

std::vector<SelftestResult> selftest(std::uint64_t trials, std::uint64_t seed,
                                     std::size_t max_size);

}  // namespace salab::finprob
