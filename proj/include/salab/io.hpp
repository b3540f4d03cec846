#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "salab/algorithms.hpp"
#include "salab/dvoretzky.hpp"
#include "salab/process.hpp"
#include "salab/sequence.hpp"

namespace salab::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One value per line, 1-based index order. Blank lines and lines starting
// with '#' are skipped; a leading "value" header is tolerated.
RealSeq seq_from_csv(const std::string& path,
                     RealSeq::Sign sign = RealSeq::Sign::nonnegative);

// "harmonic1", "const:0.5", ... or "csv:PATH".
RealSeq seq_from_cli(const std::string& spec,
                     RealSeq::Sign sign = RealSeq::Sign::nonnegative);

// {"name":"harmonic1"}, {"name":"const","value":0.5}, {"csv":"path"},
// or a bare string/number.
RealSeq schedule_from_json(const json& j, const std::string& what);

void write_series_csv(const std::string& path, const RealSeq& s, std::uint64_t horizon);

process::NoiseModel noise_from_json(const json& j);

// A problem file plus everything the subcommands need from it.
struct LoadedProblem {
  std::string type;  // rm | kw | sgd | banach | dvoretzky
  std::string id;
  Schedule a;
  std::optional<Schedule> c;  // kw difference widths
  process::ProcessSpec spec;  // runnable process for `run`
  // populated for type == rm (and sgd via its gradient problem)
  std::optional<algorithms::RootFindingProblem> rm;
  std::optional<algorithms::MinimizationProblem> min;
};

LoadedProblem problem_from_json(const json& j);
LoadedProblem load_problem(const std::string& ref);  // path or "builtin:NAME"

// Builtin problem configurations addressable as "builtin:NAME".
json builtin_problem(const std::string& name);
std::vector<std::string> builtin_problem_names();

struct LoadedParams {
  dvoretzky::DvoretzkyParams params;
  std::uint64_t n0 = 1;
  bool from_blum = false;
};

// Params file: explicit alpha/beta/gamma schedules (closed-form names or
// CSV references), or {"blum": {...}} to derive them from the problem's
// declared regularity. `mode_override` comes from the --mode flag.
LoadedParams params_from_json(const json& j, const LoadedProblem& prob,
                              std::uint64_t horizon,
                              std::optional<dvoretzky::BoundMode> mode_override);

json report_to_json(const process::MonteCarloReport& rep, bool timestamp);
json ledger_to_json(const dvoretzky::HypothesisLedger& ledger, bool timestamp);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
json parse_json_file(const std::string& path);

}  // namespace salab::io
