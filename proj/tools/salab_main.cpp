// salab - stochastic approximation lab
//
// Subcommands:
//   run      simulate a process over a seed range, write a convergence report
//   check    certify the Dvoretzky hypotheses for a process + parameters
//   series   sequence/series utilities (rm-check, dubois, abel-dini)
//   finprob  randomized selftest of the exact finite-probability kernel
//
// Exit codes: 0 success (all checks passed), 1 hypothesis/selftest failure,
// 2 configuration error.

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "salab/algorithms.hpp"
#include "salab/dvoretzky.hpp"
#include "salab/finprob.hpp"
#include "salab/io.hpp"
#include "salab/process.hpp"
#include "salab/series_lab.hpp"

namespace {

using salab::RealSeq;
using salab::Schedule;
namespace io = salab::io;
namespace dv = salab::dvoretzky;
namespace proc = salab::process;

struct SeedRange {
  std::uint64_t lo = 0, hi = 0;
};

SeedRange parse_seed_range(const std::string& s) {
  const auto pos = s.find("..");
  SeedRange r;
  try {
    if (pos == std::string::npos) {
      r.lo = r.hi = std::stoull(s);
    } else {
      r.lo = std::stoull(s.substr(0, pos));
      r.hi = std::stoull(s.substr(pos + 2));
    }
  } catch (const std::exception&) {
    throw io::ConfigError("bad seed range '" + s + "' (expected A..B)");
  }
  if (r.hi < r.lo) throw io::ConfigError("empty seed range '" + s + "'");
  return r;
}

std::vector<std::uint64_t> parse_checkpoints(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      if (!cur.empty()) {
        out.push_back(std::stoull(cur));
        cur.clear();
      }
    } else {
      cur += ch;
    }
  }
  return out;
}

int cmd_run(const std::string& spec_ref, const std::string& seeds_arg,
            std::uint64_t horizon, double eps, const std::string& checkpoints_arg,
            const std::string& out_path, const std::string& traj_dir,
            std::uint64_t seed_base, unsigned jobs, bool no_timestamp) {
  const auto prob = io::load_problem(spec_ref);
  SeedRange seeds = parse_seed_range(seeds_arg);
  seeds.lo += seed_base;
  seeds.hi += seed_base;
  const auto checkpoints = parse_checkpoints(checkpoints_arg);

  const auto report = proc::monte_carlo_convergence(prob.spec, seeds.lo, seeds.hi,
                                                    horizon, eps, checkpoints, jobs);
  const std::string text = io::report_to_json(report, !no_timestamp).dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    io::write_text_file(out_path, text);

  if (!traj_dir.empty()) {
    for (std::uint64_t s = seeds.lo; s <= seeds.hi; ++s) {
      const auto tr = proc::simulate(prob.spec, s, horizon);
      proc::write_trajectory_csv(tr, traj_dir + "/seed_" + std::to_string(s) + ".csv");
    }
  }
  return 0;
}

int cmd_check(const std::string& spec_ref, const std::string& params_path,
              const std::string& mode_arg, std::uint64_t horizon, double seq_tol,
              double div_threshold, std::uint64_t noise_horizon, double noise_tol,
              std::uint64_t tbound_range, const std::string& mc_seeds_arg,
              std::uint64_t mc_horizon, double eps, const std::string& out_path,
              std::uint64_t seed_base, unsigned jobs, bool no_timestamp) {
  const auto prob = io::load_problem(spec_ref);

  std::optional<dv::BoundMode> mode_override;
  if (mode_arg == "original")
    mode_override = dv::BoundMode::original;
  else if (mode_arg == "weak")
    mode_override = dv::BoundMode::weak;
  else if (!mode_arg.empty())
    throw io::ConfigError("--mode must be 'original' or 'weak'");

  const auto params =
      io::params_from_json(io::parse_json_file(params_path), prob, horizon, mode_override);

  dv::CertifyConfig cfg;
  cfg.n0 = params.n0;
  cfg.seq_horizon = horizon;
  cfg.seq_tol = seq_tol;
  cfg.div_threshold = div_threshold;
  cfg.noise.horizon = noise_horizon;
  cfg.noise.tail_tol = noise_tol;
  cfg.tbound.n_lo = params.n0;
  cfg.tbound.n_hi = params.n0 + tbound_range;
  SeedRange mc = parse_seed_range(mc_seeds_arg);
  cfg.mc_seed_lo = mc.lo + seed_base;
  cfg.mc_seed_hi = mc.hi + seed_base;
  cfg.mc_horizon = mc_horizon;
  cfg.eps = eps;
  cfg.jobs = jobs;

  const auto result = dv::certify(prob.spec, params.params, prob.spec.x_star, cfg);

  io::json j = io::ledger_to_json(result.ledger, !no_timestamp);
  j["report"] = io::report_to_json(result.report, false);
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    io::write_text_file(out_path, text);

  for (const auto& tag : dv::HypothesisLedger::tag_order()) {
    const auto& e = result.ledger.at(tag);
    std::fprintf(stderr, "%-4s %-18s %.6g  (%s)\n", tag.c_str(),
                 dv::status_name(e.status).c_str(), e.evidence_value,
                 e.evidence_at.c_str());
  }
  return result.pass ? 0 : 1;
}

int cmd_series_rm_check(const std::string& a_arg, std::uint64_t horizon, double tol,
                        double threshold) {
  const RealSeq a = io::seq_from_cli(a_arg);
  const auto rep = salab::series::validate_rm_schedule(a, horizon, tol, threshold);
  std::printf("tends_to_zero:    %s (last-decile max %.6g, tol %.3g)\n",
              rep.tends_to_zero ? "PASS" : "FAIL", rep.tail_max, tol);
  std::printf("sum_diverges:     %s (%s, S_%" PRIu64 " = %.6g, threshold %.3g)\n",
              rep.sum_diverges.diverges() ? "PASS" : "FAIL",
              rep.sum_diverges.kind_name().c_str(), horizon,
              rep.sum_diverges.partial_sum, threshold);
  std::printf("sum_sq_converges: %s (%s, residual %.6g, tol %.3g)\n",
              rep.sum_sq_converges.converges() ? "PASS" : "FAIL",
              rep.sum_sq_converges.kind_name().c_str(), rep.sum_sq_converges.residual,
              tol);
  return rep.all_pass() ? 0 : 1;
}

int cmd_series_dubois(const std::string& a_arg, std::uint64_t horizon,
                      const std::string& out_path) {
  const RealSeq a = io::seq_from_cli(a_arg);
  const RealSeq b = salab::series::du_bois_reymond_companion(a, horizon);
  const auto ab = salab::seqs::product(a, b);
  const auto sums = salab::series::partial_sums(ab, horizon);
  std::printf("b_%" PRIu64 " = %.6g, sum a_n b_n = %.9g\n", horizon, b.at(horizon),
              sums.back());
  if (!out_path.empty()) io::write_series_csv(out_path, b, horizon);
  return 0;
}

int cmd_series_abel_dini(const std::string& a_arg, std::uint64_t horizon,
                         const std::string& out_path) {
  const RealSeq a = io::seq_from_cli(a_arg);
  const RealSeq rho = salab::series::abel_dini_rho(a, horizon);
  const auto arho = salab::seqs::product(a, rho);
  const auto sums = salab::series::partial_sums(arho, horizon);
  std::printf("rho_%" PRIu64 " = %.6g, sum a_n rho_n = %.9g\n", horizon, rho.at(horizon),
              sums.back());
  if (!out_path.empty()) io::write_series_csv(out_path, rho, horizon);
  return 0;
}

int cmd_finprob_selftest(std::uint64_t trials, std::uint64_t seed, std::size_t max_size) {
  const auto results = salab::finprob::selftest(trials, seed, max_size);
  bool all = true;
  std::printf("%-24s %-6s %-14s %s\n", "property", "status", "worst", "tol");
  for (const auto& r : results) {
    all = all && r.pass;
    std::printf("%-24s %-6s %-14.6g %.3g\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                r.worst, r.tol);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic approximation lab"};
  app.require_subcommand(1);

  std::uint64_t seed_base = 0;
  unsigned jobs = 1;
  bool no_timestamp = false;
  app.add_option("--seed-base", seed_base, "offset added to every seed range");
  app.add_option("--jobs", jobs, "parallel seed workers")->check(CLI::Range(1u, 256u));
  app.add_flag("--no-timestamp", no_timestamp, "omit timestamps from reports");

  // run
  auto* run = app.add_subcommand("run", "simulate and report convergence");
  run->fallthrough();
  std::string run_spec, run_seeds = "0..9", run_checkpoints, run_out, run_traj_dir;
  std::uint64_t run_horizon = 1000;
  double run_eps = 0.05;
  run->add_option("--spec", run_spec, "problem file or builtin:NAME")->required();
  run->add_option("--seeds", run_seeds, "seed range A..B");
  run->add_option("--horizon", run_horizon, "steps per trajectory");
  run->add_option("--eps", run_eps, "convergence radius");
  run->add_option("--checkpoints", run_checkpoints, "comma-separated step list");
  run->add_option("--out", run_out, "report path (stdout when omitted)");
  run->add_option("--traj-dir", run_traj_dir, "write per-seed trajectory CSVs here");

  // check
  auto* check = app.add_subcommand("check", "certify Dvoretzky hypotheses");
  check->fallthrough();
  std::string chk_spec, chk_params, chk_mode, chk_out, chk_mc_seeds = "0..99";
  std::uint64_t chk_horizon = 100000, chk_noise_horizon = 1000000;
  std::uint64_t chk_tbound_range = 1000, chk_mc_horizon = 10000;
  double chk_seq_tol = 0.05, chk_div_threshold = 2.0, chk_noise_tol = 1e-6;
  double chk_eps = 0.05;
  check->add_option("--spec", chk_spec, "problem file or builtin:NAME")->required();
  check->add_option("--params", chk_params, "params file (explicit or blum)")->required();
  check->add_option("--mode", chk_mode, "original|weak (overrides params file)");
  check->add_option("--horizon", chk_horizon, "H13-H15 probe horizon");
  check->add_option("--seq-tol", chk_seq_tol, "H13/H14 tolerance");
  check->add_option("--div-threshold", chk_div_threshold, "H15 divergence threshold");
  check->add_option("--noise-horizon", chk_noise_horizon, "H8 probe horizon");
  check->add_option("--noise-tol", chk_noise_tol, "H8 tail tolerance");
  check->add_option("--tbound-range", chk_tbound_range, "H16 step range above N0");
  check->add_option("--mc-seeds", chk_mc_seeds, "seed range for the empirical report");
  check->add_option("--mc-horizon", chk_mc_horizon, "horizon for the empirical report");
  check->add_option("--eps", chk_eps, "convergence radius for the report");
  check->add_option("--out", chk_out, "ledger path (stdout when omitted)");

  // series
  auto* series = app.add_subcommand("series", "sequence and series utilities");
  series->fallthrough();
  series->require_subcommand(1);
  auto* rmc = series->add_subcommand("rm-check", "Robbins-Monro schedule conditions");
  rmc->fallthrough();
  std::string rmc_a;
  std::uint64_t rmc_horizon = 100000;
  double rmc_tol = 1e-3, rmc_threshold = 10.0;
  rmc->add_option("--a", rmc_a, "schedule: builtin name or csv:PATH")->required();
  rmc->add_option("--horizon", rmc_horizon, "probe horizon");
  rmc->add_option("--tol", rmc_tol, "tolerance");
  rmc->add_option("--threshold", rmc_threshold, "divergence threshold");

  auto* dub = series->add_subcommand("dubois", "du Bois-Reymond companion sequence");
  dub->fallthrough();
  std::string dub_a, dub_out;
  std::uint64_t dub_horizon = 100000;
  dub->add_option("--a", dub_a, "convergent series: builtin name or csv:PATH")->required();
  dub->add_option("--horizon", dub_horizon, "probe horizon");
  dub->add_option("--out", dub_out, "write b as CSV (n,value)");

  auto* adn = series->add_subcommand("abel-dini", "Abel-Dini rho sequence");
  adn->fallthrough();
  std::string adn_a, adn_out;
  std::uint64_t adn_horizon = 100000;
  adn->add_option("--a", adn_a, "divergent series: builtin name or csv:PATH")->required();
  adn->add_option("--horizon", adn_horizon, "probe horizon");
  adn->add_option("--out", adn_out, "write rho as CSV (n,value)");

  // finprob
  auto* fp = app.add_subcommand("finprob", "finite probability kernel");
  fp->fallthrough();
  fp->require_subcommand(1);
  auto* st = fp->add_subcommand("selftest", "randomized property suite");
  st->fallthrough();
  std::uint64_t st_trials = 1000, st_seed = 7;
  std::size_t st_max_size = 64;
  st->add_option("--trials", st_trials, "trials per property");
  st->add_option("--seed", st_seed, "suite seed");
  st->add_option("--max-size", st_max_size, "max sample-space size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (*run)
      return cmd_run(run_spec, run_seeds, run_horizon, run_eps, run_checkpoints, run_out,
                     run_traj_dir, seed_base, jobs, no_timestamp);
    if (*check)
      return cmd_check(chk_spec, chk_params, chk_mode, chk_horizon, chk_seq_tol,
                       chk_div_threshold, chk_noise_horizon, chk_noise_tol,
                       chk_tbound_range, chk_mc_seeds, chk_mc_horizon, chk_eps, chk_out,
                       seed_base, jobs, no_timestamp);
    if (*rmc) return cmd_series_rm_check(rmc_a, rmc_horizon, rmc_tol, rmc_threshold);
    if (*dub) return cmd_series_dubois(dub_a, dub_horizon, dub_out);
    if (*adn) return cmd_series_abel_dini(adn_a, adn_horizon, adn_out);
    if (*st) return cmd_finprob_selftest(st_trials, st_seed, st_max_size);
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
