#include "salab/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace salab::io {

namespace {

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RealSeq seq_from_csv(const std::string& path, RealSeq::Sign sign) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read CSV file '" + path + "'");
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (values.empty() && (line == "value" || line == "v")) continue;
    try {
      values.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ConfigError("bad numeric line in '" + path + "': " + line);
    }
  }
  if (values.empty()) throw ConfigError("CSV file '" + path + "' has no values");
  return seqs::from_values("csv:" + path, std::move(values), sign);
}

RealSeq seq_from_cli(const std::string& spec, RealSeq::Sign sign) {
  if (spec.rfind("csv:", 0) == 0) return seq_from_csv(spec.substr(4), sign);
  try {
    return seqs::from_name(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RealSeq schedule_from_json(const json& j, const std::string& what) {
  try {
    if (j.is_string()) return seq_from_cli(j.get<std::string>());
    if (j.is_number()) return seqs::constant(j.get<double>());
    if (j.is_object()) {
      if (j.contains("csv")) return seq_from_csv(j.at("csv").get<std::string>());
      const std::string name = j.at("name").get<std::string>();
      if (name == "const") return seqs::constant(j.at("value").get<double>());
      if (name == "power") return seqs::power(j.at("exponent").get<double>());
      if (name == "geom") return seqs::geometric(j.at("ratio").get<double>());
      return seqs::from_name(name);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
  throw ConfigError(what + ": expected a schedule name, object, or csv reference");
}

void write_series_csv(const std::string& path, const RealSeq& s, std::uint64_t horizon) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "n,value\n";
  for (std::uint64_t n = 1; n <= horizon; ++n)
    out << n << "," << format_double(s.at(n)) << "\n";
}

process::NoiseModel noise_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") return process::NoiseModel::none();
    if (kind == "gaussian")
      return process::NoiseModel::gaussian(schedule_from_json(j.at("sigma"), "noise.sigma"));
    if (kind == "uniform")
      return process::NoiseModel::uniform(
          schedule_from_json(j.at("halfwidth"), "noise.halfwidth"));
    if (kind == "discrete") {
      auto values = j.at("values").get<std::vector<double>>();
      auto probs = j.at("probs").get<std::vector<double>>();
      Schedule scale = j.contains("scale")
                           ? schedule_from_json(j.at("scale"), "noise.scale")
                           : seqs::one();
      return process::NoiseModel::discrete(std::move(values), std::move(probs),
                                           std::move(scale));
    }
    throw ConfigError("unknown noise kind '" + kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
}

namespace {

struct BuiltinMap {
  std::function<double(double)> f;
  std::function<double(double)> inverse_shifted;  // u -> x with f(x) - b = u
  double inverse_radius = 0.0;
  double A = 0.0, B = 0.0;
  double root = 0.0;  // solves f(x) = b
};

// Builtin real maps for M / grad / g.
BuiltinMap map_from_json(const json& j, double b) {
  const std::string name = j.at("name").get<std::string>();
  BuiltinMap m;
  if (name == "linear") {
    const double k = j.at("k").get<double>();
    const double c = number_or(j, "c", 0.0);
    if (k == 0.0) throw ConfigError("linear map: k must be nonzero");
    m.f = [k, c](double x) { return k * x + c; };
    m.inverse_shifted = [k, c, b](double u) { return (u + b - c) / k; };
    m.inverse_radius = 1e9;
    m.A = std::fabs(k);
    m.B = std::fabs(c);
    m.root = (b - c) / k;
    return m;
  }
  if (name == "quadratic") {  // gradient of curv/2 (x - theta)^2
    const double curv = j.at("curv").get<double>();
    const double theta = number_or(j, "theta", 0.0);
    if (!(curv > 0.0)) throw ConfigError("quadratic map: curv must be positive");
    m.f = [curv, theta](double x) { return curv * (x - theta); };
    m.inverse_shifted = [curv, theta, b](double u) { return theta + (u + b) / curv; };
    m.inverse_radius = 1e9;
    m.A = curv;
    m.B = curv * std::fabs(theta);
    m.root = theta + b / curv;
    return m;
  }
  if (name == "neg_quadratic") {  // objective -x^2 for KW demos
    m.f = [](double x) { return -x * x; };
    m.A = 0.0;
    m.B = 0.0;  // unbounded below; linear-bound fields unused for KW
    m.root = 0.0;
    return m;
  }
  if (name == "saturating") {  // scale * tanh(rate * x); bounded-M tests
    const double scale = j.at("scale").get<double>();
    const double rate = number_or(j, "rate", 1.0);
    if (!(scale > 0.0) || !(rate > 0.0))
      throw ConfigError("saturating map: scale and rate must be positive");
    m.f = [scale, rate](double x) { return scale * std::tanh(rate * x); };
    m.inverse_shifted = [scale, rate, b](double u) {
      return std::atanh((u + b) / scale) / rate;
    };
    m.inverse_radius = 0.9 * scale - std::fabs(b);
    if (!(m.inverse_radius > 0.0))
      throw ConfigError("saturating map: |b| too close to the saturation level");
    m.A = 0.0;
    m.B = scale;
    m.root = std::atanh(b / scale) / rate;
    return m;
  }
  if (name == "affine") {  // direct transform for raw dvoretzky specs
    const double k = j.at("k").get<double>();
    const double c = number_or(j, "c", 0.0);
    m.f = [k, c](double x) { return k * x + c; };
    m.root = (k != 1.0) ? c / (1.0 - k) : 0.0;
    return m;
  }
  throw ConfigError("unknown builtin map '" + name + "'");
}

}  // namespace

LoadedProblem problem_from_json(const json& j) {
  LoadedProblem out;
  try {
    out.type = j.at("type").get<std::string>();
    out.id = j.contains("id") ? j.at("id").get<std::string>() : out.type;
    const double x0 = number_or(j, "x0", 0.0);

    if (out.type == "rm" || out.type == "kw") {
      const double b = number_or(j, "b", 0.0);
      BuiltinMap m = map_from_json(j.at("M"), b);
      algorithms::RootFindingProblem p;
      p.name = out.id;
      p.M = m.f;
      p.b = b;
      p.noise = j.contains("noise") ? noise_from_json(j.at("noise"))
                                    : process::NoiseModel::none();
      p.A = number_or(j, "A", m.A);
      p.B = number_or(j, "B", m.B);
      p.M_inverse = m.inverse_shifted;
      p.inverse_radius = number_or(j, "inverse_radius", m.inverse_radius);
      p.x_star = number_or(j, "x_star", m.root);
      p.x0 = x0;
      out.a = schedule_from_json(j.at("schedule"), "schedule");
      if (out.type == "kw")
        out.c = j.contains("c_schedule")
                    ? schedule_from_json(j.at("c_schedule"), "c_schedule")
                    : seqs::power(-1.0 / 3.0);
      out.spec = algorithms::rm_spec(p, out.a);
      out.rm = std::move(p);
      return out;
    }

    if (out.type == "sgd") {
      BuiltinMap m = map_from_json(j.at("grad"), 0.0);
      algorithms::MinimizationProblem p;
      p.name = out.id;
      p.grad = m.f;
      p.noise = j.contains("noise") ? noise_from_json(j.at("noise"))
                                    : process::NoiseModel::none();
      p.x0 = x0;
      if (j.at("grad").at("name") == "quadratic") {
        p.curvature = j.at("grad").at("curv").get<double>();
        p.theta = number_or(j.at("grad"), "theta", 0.0);
      }
      out.a = schedule_from_json(j.at("schedule"), "schedule");
      out.spec = algorithms::sgd_spec(p, out.a);
      out.min = std::move(p);
      return out;
    }

    if (out.type == "banach") {
      BuiltinMap m = map_from_json(j.at("g"), 0.0);
      algorithms::ContractionProblem p;
      p.name = out.id;
      p.g = m.f;
      p.gamma_contr = j.at("gamma_contr").get<double>();
      p.fixed_point = number_or(j, "fixed_point", m.root);
      out.a = schedule_from_json(j.at("schedule"), "schedule");
      out.spec = algorithms::banach_spec(p, out.a, x0);
      return out;
    }

    if (out.type == "dvoretzky") {
      BuiltinMap m = map_from_json(j.at("transform"), 0.0);
      process::ProcessSpec spec;
      spec.id = out.id;
      const auto f = m.f;
      spec.transform = [f](std::uint64_t, std::span<const double> hist) {
        return f(hist[hist.size() - 1]);
      };
      process::NoiseModel noise = j.contains("noise")
                                      ? noise_from_json(j.at("noise"))
                                      : process::NoiseModel::none();
      if (j.contains("noise_scale")) {
        Schedule sc = schedule_from_json(j.at("noise_scale"), "noise_scale");
        noise = noise.rescaled("scaled", [sc](std::uint64_t n) { return sc.at(n); });
      }
      spec.noise = noise;
      spec.x_star = number_or(j, "x_star", 0.0);
      spec.x0 = x0;
      out.a = j.contains("schedule") ? schedule_from_json(j.at("schedule"), "schedule")
                                     : seqs::one();
      out.spec = std::move(spec);
      return out;
    }

    throw ConfigError("unknown problem type '" + out.type + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

json builtin_problem(const std::string& name) {
  if (name == "rm-linear") {
    return json{{"schema_version", kSchemaVersion},
                {"id", "rm-linear"},
                {"type", "rm"},
                {"M", {{"name", "linear"}, {"k", 2.0}, {"c", 1.0}}},
                {"b", 0.0},
                {"A", 2.0},
                {"B", 1.0},
                {"noise", {{"kind", "gaussian"}, {"sigma", 1.0}}},
                {"schedule", {{"name", "harmonic1"}}},
                {"x0", 0.0}};
  }
  if (name == "sgd-quadratic") {
    return json{{"schema_version", kSchemaVersion},
                {"id", "sgd-quadratic"},
                {"type", "sgd"},
                {"grad", {{"name", "quadratic"}, {"curv", 1.0}, {"theta", 1.5}}},
                {"noise", {{"kind", "gaussian"}, {"sigma", 1.0}}},
                {"schedule", {{"name", "harmonic1"}}},
                {"x0", 0.0}};
  }
  if (name == "banach-half") {
    return json{{"schema_version", kSchemaVersion},
                {"id", "banach-half"},
                {"type", "banach"},
                {"g", {{"name", "linear"}, {"k", 0.5}, {"c", 1.0}}},
                {"gamma_contr", 0.5},
                {"fixed_point", 2.0},
                {"schedule", {{"name", "harmonic1"}}},
                {"x0", 0.0}};
  }
  if (name == "kw-negquad") {
    return json{{"schema_version", kSchemaVersion},
                {"id", "kw-negquad"},
                {"type", "kw"},
                {"M", {{"name", "neg_quadratic"}}},
                {"b", 0.0},
                {"noise", {{"kind", "gaussian"}, {"sigma", 0.1}}},
                {"schedule", {{"name", "harmonic"}}},
                {"c_schedule", {{"name", "power"}, {"exponent", -0.3333333333333333}}},
                {"x0", 1.0}};
  }
  throw ConfigError("unknown builtin problem '" + name + "'");
}

std::vector<std::string> builtin_problem_names() {
  return {"rm-linear", "sgd-quadratic", "banach-half", "kw-negquad"};
}

LoadedProblem load_problem(const std::string& ref) {
  if (ref.rfind("builtin:", 0) == 0) return problem_from_json(builtin_problem(ref.substr(8)));
  return problem_from_json(parse_json_file(ref));
}

LoadedParams params_from_json(const json& j, const LoadedProblem& prob,
                              std::uint64_t horizon,
                              std::optional<dvoretzky::BoundMode> mode_override) {
  LoadedParams out;
  try {
    dvoretzky::BoundMode mode = dvoretzky::BoundMode::original;
    if (j.contains("mode")) {
      const std::string m = j.at("mode").get<std::string>();
      if (m == "original")
        mode = dvoretzky::BoundMode::original;
      else if (m == "weak")
        mode = dvoretzky::BoundMode::weak;
      else
        throw ConfigError("params: mode must be 'original' or 'weak'");
    }
    if (mode_override) mode = *mode_override;

    if (j.contains("blum")) {
      if (!prob.rm)
        throw ConfigError("params: blum derivation needs an rm-type problem");
      const json& bj = j.at("blum");
      std::optional<Schedule> rho;
      if (bj.contains("rho") && !(bj.at("rho").is_string() && bj.at("rho") == "auto"))
        rho = schedule_from_json(bj.at("rho"), "blum.rho");
      auto pkg = algorithms::as_dvoretzky(*prob.rm, prob.a, horizon, std::move(rho));
      out.params = std::move(pkg.params);
      out.params.mode = mode;
      out.n0 = pkg.n0;
      out.from_blum = true;
      // Single-parameter substitutions on top of the derivation, for
      // ablation experiments (e.g. gamma zeroed, beta swapped).
      if (j.contains("override")) {
        const json& ov = j.at("override");
        if (ov.contains("alpha"))
          out.params.alpha = dvoretzky::ParamSeq::schedule(
              schedule_from_json(ov.at("alpha"), "override.alpha"));
        if (ov.contains("beta"))
          out.params.beta = dvoretzky::ParamSeq::schedule(
              schedule_from_json(ov.at("beta"), "override.beta"));
        if (ov.contains("gamma"))
          out.params.gamma = dvoretzky::ParamSeq::schedule(
              schedule_from_json(ov.at("gamma"), "override.gamma"));
      }
      return out;
    }

    out.params.alpha =
        dvoretzky::ParamSeq::schedule(schedule_from_json(j.at("alpha"), "alpha"));
    out.params.beta =
        dvoretzky::ParamSeq::schedule(schedule_from_json(j.at("beta"), "beta"));
    out.params.gamma =
        dvoretzky::ParamSeq::schedule(schedule_from_json(j.at("gamma"), "gamma"));
    out.params.mode = mode;
    out.n0 = j.contains("n0") ? j.at("n0").get<std::uint64_t>() : 1;
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json report_to_json(const process::MonteCarloReport& rep, bool timestamp) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["spec_id"] = rep.spec_id;
  j["seeds"] = json{{"lo", rep.seed_lo}, {"hi", rep.seed_hi}};
  j["horizon"] = rep.horizon;
  j["eps"] = rep.eps;
  j["fraction_converged"] = rep.fraction_converged;
  j["diverged_count"] = rep.diverged_count;
  json cps = json::array();
  for (const auto& cp : rep.checkpoints)
    cps.push_back(json{{"n", cp.n}, {"median_err", cp.median_err}, {"p90_err", cp.p90_err}});
  j["checkpoints"] = std::move(cps);
  if (timestamp) j["timestamp"] = utc_timestamp();
  return j;
}

json ledger_to_json(const dvoretzky::HypothesisLedger& ledger, bool timestamp) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["n0"] = ledger.n0;
  j["overall"] = ledger.all_pass() ? "pass" : "fail";
  json hyps;
  for (const auto& tag : dvoretzky::HypothesisLedger::tag_order()) {
    if (!ledger.entries.count(tag)) continue;
    const auto& e = ledger.entries.at(tag);
    json ej;
    ej["status"] = dvoretzky::status_name(e.status);
    ej["evidence"] = json{{"value", e.evidence_value}, {"at", e.evidence_at}};
    ej["horizon"] = e.horizon;
    ej["tol"] = e.tol;
    if (!e.note.empty()) ej["note"] = e.note;
    hyps[tag] = std::move(ej);
  }
  j["hypotheses"] = std::move(hyps);
  if (timestamp) j["timestamp"] = utc_timestamp();
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed JSON in '" + path + "'");
  return j;
}

}  // namespace salab::io
