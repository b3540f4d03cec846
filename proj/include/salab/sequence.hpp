#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace salab {

struct SignViolation : std::runtime_error {
  SignViolation(const std::string& label, std::uint64_t index, double value)
      : std::runtime_error("sequence '" + label + "' declared nonnegative but " +
                           "term " + std::to_string(index) + " = " +
                           std::to_string(value)),
        index(index),
        value(value) {}
  std::uint64_t index;
  double value;
};

// A lazily evaluated real sequence, 1-based. Values are memoized
// per-instance: the memo fills sequentially under a lock, so a generator
// is invoked exactly once per index, in increasing index order. That
// contract lets derived sequences (partial-sum based ones like the
// Abel-Dini rho) keep an internal accumulator inside their generator.
//
// Reads of already-memoized indices are lock-free: values live in
// fixed-address chunks and the filled count is published with release
// ordering, so Monte Carlo workers probing the same schedule do not
// serialize on the memo lock.
//
// Copies share the memo. Results of at() are pure functions of the
// sequence definition and the index; concurrent probing is safe.
class RealSeq {
 public:
  enum class Sign { nonnegative, unrestricted };
  using Generator = std::function<double(std::uint64_t)>;

  RealSeq() = default;
  RealSeq(std::string label, Sign sign, Generator gen)
      : state_(std::make_shared<State>(std::move(label), sign, std::move(gen))) {}

  bool valid() const { return static_cast<bool>(state_); }
  const std::string& label() const { return state_->label; }
  Sign declared_sign() const { return state_->sign; }

  // n is 1-based. Throws SignViolation when a nonnegative-declared
  // sequence produces a negative term.
  double at(std::uint64_t n) const {
    if (n == 0) throw std::invalid_argument("RealSeq::at: index is 1-based");
    State& s = *state_;
    if (n <= s.filled.load(std::memory_order_acquire)) {
      const auto* table = s.table.load(std::memory_order_acquire);
      return (*table)[(n - 1) >> State::kChunkBits][(n - 1) & State::kChunkMask];
    }
    return s.fill_to(n);
  }

  // Materialized copy of the first n values.
  std::vector<double> prefix(std::uint64_t n) const {
    at(n);
    std::vector<double> out;
    out.reserve(n);
    for (std::uint64_t i = 1; i <= n; ++i) out.push_back(at(i));
    return out;
  }

 private:
  struct State {
    static constexpr unsigned kChunkBits = 12;  // 4096 doubles per chunk
    static constexpr std::uint64_t kChunkMask = (1u << kChunkBits) - 1;

    State(std::string l, Sign sg, Generator g)
        : label(std::move(l)), sign(sg), gen(std::move(g)) {
      auto t = std::make_unique<std::vector<double*>>();
      table.store(t.get(), std::memory_order_release);
      tables.push_back(std::move(t));
    }

    double fill_to(std::uint64_t n) {
      std::lock_guard<std::mutex> lock(mu);
      std::uint64_t count = filled.load(std::memory_order_relaxed);
      while (count < n) {
        const std::uint64_t k = count + 1;
        const double v = gen(k);
        if (sign == Sign::nonnegative && v < 0.0) throw SignViolation(label, k, v);
        const std::uint64_t chunk = count >> kChunkBits;
        const auto* cur = table.load(std::memory_order_relaxed);
        if (chunk >= cur->size()) {
          // Chunk addresses are stable; only the pointer table is copied
          // on growth, and retired tables stay alive for readers.
          storage.push_back(std::make_unique<double[]>(1u << kChunkBits));
          auto grown = std::make_unique<std::vector<double*>>(*cur);
          grown->push_back(storage.back().get());
          table.store(grown.get(), std::memory_order_release);
          tables.push_back(std::move(grown));
        }
        (*table.load(std::memory_order_relaxed))[chunk][count & kChunkMask] = v;
        ++count;
        filled.store(count, std::memory_order_release);
      }
      const auto* t = table.load(std::memory_order_relaxed);
      return (*t)[(n - 1) >> kChunkBits][(n - 1) & kChunkMask];
    }

    std::string label;
    Sign sign;
    Generator gen;
    std::mutex mu;  // writers only
    std::atomic<std::uint64_t> filled{0};
    std::atomic<const std::vector<double*>*> table{nullptr};
    std::vector<std::unique_ptr<std::vector<double*>>> tables;
    std::vector<std::unique_ptr<double[]>> storage;
  };
  std::shared_ptr<State> state_;
};

// Step-size / parameter schedules are plain nonnegative-declared
// sequences, except noise scales which may carry sign.
using Schedule = RealSeq;

namespace seqs {

inline RealSeq from_fn(std::string label, RealSeq::Sign sign,
                       RealSeq::Generator gen) {
  return RealSeq(std::move(label), sign, std::move(gen));
}

inline RealSeq constant(double c) {
  return RealSeq("const:" + std::to_string(c),
                 c >= 0 ? RealSeq::Sign::nonnegative : RealSeq::Sign::unrestricted,
                 [c](std::uint64_t) { return c; });
}

inline RealSeq zero() { return constant(0.0); }
inline RealSeq one() { return constant(1.0); }

inline RealSeq harmonic() {  // 1/n
  return RealSeq("harmonic", RealSeq::Sign::nonnegative,
                 [](std::uint64_t n) { return 1.0 / static_cast<double>(n); });
}

inline RealSeq harmonic1() {  // 1/(n+1)
  return RealSeq("harmonic1", RealSeq::Sign::nonnegative,
                 [](std::uint64_t n) { return 1.0 / static_cast<double>(n + 1); });
}

inline RealSeq inv_square() {  // 1/n^2
  return RealSeq("invsq", RealSeq::Sign::nonnegative, [](std::uint64_t n) {
    const double x = static_cast<double>(n);
    return 1.0 / (x * x);
  });
}

inline RealSeq inv_sqrt() {  // 1/sqrt(n)
  return RealSeq("invsqrt", RealSeq::Sign::nonnegative, [](std::uint64_t n) {
    return 1.0 / std::sqrt(static_cast<double>(n));
  });
}

inline RealSeq power(double p) {  // n^p
  return RealSeq("power:" + std::to_string(p),
                 RealSeq::Sign::nonnegative, [p](std::uint64_t n) {
                   return std::pow(static_cast<double>(n), p);
                 });
}

inline RealSeq geometric(double r) {  // r^n
  return RealSeq("geom:" + std::to_string(r),
                 r >= 0 ? RealSeq::Sign::nonnegative : RealSeq::Sign::unrestricted,
                 [r](std::uint64_t n) {
                   return std::pow(r, static_cast<double>(n));
                 });
}

inline RealSeq log_inv() {  // 1/log(n+1)
  return RealSeq("loginv", RealSeq::Sign::nonnegative, [](std::uint64_t n) {
    return 1.0 / std::log(static_cast<double>(n + 1));
  });
}

inline RealSeq from_values(std::string label, std::vector<double> values,
                           RealSeq::Sign sign = RealSeq::Sign::nonnegative) {
  auto data = std::make_shared<std::vector<double>>(std::move(values));
  return RealSeq(std::move(label), sign, [data](std::uint64_t n) {
    if (n > data->size())
      throw std::out_of_range("sequence probed past its stored horizon (" +
                              std::to_string(data->size()) + " values)");
    return (*data)[n - 1];
  });
}

// Pointwise product. Sign is nonnegative only when both factors are.
inline RealSeq product(const RealSeq& x, const RealSeq& y) {
  const auto sign = (x.declared_sign() == RealSeq::Sign::nonnegative &&
                     y.declared_sign() == RealSeq::Sign::nonnegative)
                        ? RealSeq::Sign::nonnegative
                        : RealSeq::Sign::unrestricted;
  return RealSeq(x.label() + "*" + y.label(), sign,
                 [x, y](std::uint64_t n) { return x.at(n) * y.at(n); });
}

inline RealSeq scaled(const RealSeq& x, double factor) {
  const auto sign = (x.declared_sign() == RealSeq::Sign::nonnegative && factor >= 0)
                        ? RealSeq::Sign::nonnegative
                        : RealSeq::Sign::unrestricted;
  return RealSeq(std::to_string(factor) + "*" + x.label(), sign,
                 [x, factor](std::uint64_t n) { return factor * x.at(n); });
}

// Builtin lookup used by the CLI and config files: "harmonic1",
// "const:0.5", "power:-0.5", "geom:0.9", ...
RealSeq from_name(const std::string& name);

}  // namespace seqs
}  // namespace salab
