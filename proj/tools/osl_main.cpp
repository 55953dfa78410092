// osl: one-step experiments, flexible constructions and the verification suites.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "osl/errors.hpp"
#include "osl/io.hpp"
#include "osl/oseledets.hpp"
#include "osl/parallel.hpp"
#include "osl/verify.hpp"

namespace fs = std::filesystem;
using namespace osl;

namespace {

constexpr int kExitVerify = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitUsage = 64;

struct Options {
  std::string spec;
  std::int64_t steps = 100000;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string mode = "bounded";
  double epsilon = 0.1;
  double budget = 1.0;
  std::vector<double> thresholds{4, 8, 16, 32, 64};
  unsigned jobs = default_jobs();
  double r1 = 0.5;
  double r2 = -0.5;
  std::int64_t depth = 256;
  std::string suite = "fast";
  std::string fault;
};

std::string seed_string(std::uint64_t s) { return std::to_string(s); }

// Seed from --seed, then OSL_DEFAULT_SEED, then 0.
std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t given) {
  if (flag->count() > 0) return given;
  if (const char* env = std::getenv("OSL_DEFAULT_SEED")) {
    try {
      std::size_t used = 0;
      const std::uint64_t s = std::stoull(env, &used);
      if (used == std::string(env).size()) return s;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::BadSpec, std::string("OSL_DEFAULT_SEED is not an integer: ") + env);
  }
  return 0;
}

Json threshold_json(const std::vector<double>& t) {
  Json a = Json::array();
  for (double x : t) a.push_back(real_value(x));
  return a;
}

int cmd_onestep(const Options& o) {
  const Json spec = load_json(o.spec);
  const MatrixDistribution nu = matrix_distribution_from_json(spec.contains("nu") ? spec.at("nu") : spec);
  if (o.steps < 1 || o.trials < 1 || o.depth < 1) throw Error(ErrorCode::BadSpec, "steps, trials and depth must be >= 1");

  const LyapunovEstimate lam = lyapunov_estimates(sample_window(nu, 0, o.steps, derive_seed(o.seed, 0)));
  const std::uint64_t angle_master = derive_seed(o.seed, 1);
  std::vector<double> neg_log(o.trials);
  parallel_for(o.trials, o.jobs, [&](std::size_t i) {
    const OrbitWindow w = sample_onestep(nu, o.depth, derive_seed(angle_master, i));
    neg_log[i] = neg_log_sine(E1_backward_direction(w, o.depth), E2_forward_direction(w, o.depth));
  });
  const AngleTailReport tails = angle_tail_report_neglog(neg_log, o.thresholds);
  const MomentEstimate m1 = moment(nu, 1, 100000, derive_seed(o.seed, 2), o.jobs);

  fs::create_directories(o.out);
  Json report;
  report["command"] = "onestep";
  report["config"] = {{"spec", o.spec}, {"nu", to_json(nu)},      {"steps", o.steps},
                      {"trials", o.trials}, {"depth", o.depth}, {"thresholds", threshold_json(o.thresholds)}};
  report["seed"] = seed_string(o.seed);
  report["first_moment"] = {{"value", real_value(m1.value)}, {"std_error", real_value(m1.std_error)},
                            {"exact", m1.exact}};
  report["lyapunov"] = to_json(lam);
  report["angle_tail"] = to_json(tails);
  save_json(fs::path(o.out) / "onestep.json", report);

  CsvWriter samples(fs::path(o.out) / "onestep_samples.csv", {"trial", "neg_log_sine"});
  for (std::size_t i = 0; i < neg_log.size(); ++i) samples.row({std::to_string(i), csv_real(neg_log[i])});
  CsvWriter table(fs::path(o.out) / "onestep_thresholds.csv", {"threshold", "truncated_mean", "std_error"});
  for (std::size_t k = 0; k < tails.thresholds.size(); ++k) {
    table.row({csv_real(tails.thresholds[k]), csv_real(tails.truncated_means[k].mean),
               csv_real(tails.truncated_means[k].std_error)});
  }
  std::printf("lambda_hat = (%.6f, %.6f) over %zu steps\n", lam.lambda1, lam.lambda2, lam.steps);
  std::printf("angle tail verdict: %s (span %.4f +- %.4f)\n", tails.verdict.c_str(), tails.span.mean,
              tails.span.std_error);
  return 0;
}

Json index_list(const std::vector<std::size_t>& v) {
  Json a = Json::array();
  for (std::size_t i : v) a.push_back(i);
  return a;
}

int cmd_flexible(const Options& o, bool r1_given, bool r2_given) {
  const Json spec = load_json(o.spec);
  const EtaSpec eta = eta_spec_from_json(spec.contains("eta") ? spec.at("eta") : spec);
  const double r1 = r1_given || !spec.contains("r1") ? o.r1 : read_real(spec.at("r1"), "r1");
  const double r2 = r2_given || !spec.contains("r2") ? o.r2 : read_real(spec.at("r2"), "r2");
  if (o.steps < 1) throw Error(ErrorCode::BadSpec, "steps must be >= 1");
  const bool bounded = o.mode == "bounded";
  const FlexibleMode mode = bounded ? FlexibleMode::bounded(o.budget) : FlexibleMode::lowcost(o.epsilon);

  FlexibleRun run;
  try {
    run = simulate_flexible(eta, r1, r2, mode, o.steps, o.seed);
  } catch (const UnboundedGapError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    auto print = [](const char* name, const std::vector<std::size_t>& side) {
      std::fprintf(stderr, "  %s:", name);
      for (std::size_t i : side) std::fprintf(stderr, " %zu", i);
      std::fprintf(stderr, "\n");
    };
    print("side A", e.side_a());
    print("side B", e.side_b());
    return kExitInfeasible;
  }
  const ConstructionReport rep = verify_flexible(run.window, eta, r1, r2);

  fs::create_directories(o.out);
  Json config = {{"spec", o.spec}, {"eta", to_json(eta)}, {"r1", real_value(r1)}, {"r2", real_value(r2)},
                 {"mode", o.mode}, {"steps", o.steps}};
  if (bounded) {
    config["budget"] = exact_string(o.budget);
  } else {
    config["epsilon"] = exact_string(o.epsilon);
  }
  Json construction;
  construction["tower"] = to_json(run.tower);
  Json weights = Json::array();
  for (double w : run.piece_weights) weights.push_back(exact_string(w));
  construction["piece_weights"] = weights;
  construction["piece_source"] = index_list(run.piece_source);
  if (!bounded) {
    Json caps = Json::array();
    for (double c : run.caps) caps.push_back(real_value(c));
    construction["caps"] = caps;
    construction["heights"] = run.heights;
    construction["cost_bound"] = real_value(run.cost_bound);
  }
  construction["warnings"] = run.warnings;

  Json report;
  report["command"] = "flexible";
  report["config"] = config;
  report["seed"] = seed_string(o.seed);
  report["construction"] = construction;
  report["report"] = to_json(rep);
  save_json(fs::path(o.out) / "flexible.json", report);

  const auto& f = run.window.prescribed_f;
  CsvWriter trace(fs::path(o.out) / "flexible_steps.csv", {"step", "cost", "label", "cell", "theta"});
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double cost = i + 1 < f.size() ? transfer_cost_bounded(f[i], f[i + 1]) : 0.0;
    const std::string label = run.window.labels.empty() ? "" : std::to_string(run.window.labels[i]);
    trace.row({std::to_string(i), i + 1 < f.size() ? csv_real(cost) : "", label, std::to_string(run.cell_track[i]),
               csv_real(f[i].gap())});
  }
  for (const auto& w : run.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("lambda_hat = (%.6f, %.6f), cell TV %.4f, agreement %.4f\n", rep.lambda1, rep.lambda2, rep.cell_tv,
              rep.agreement_fraction);
  if (bounded) {
    std::printf("max step cost %.6f < budget %g\n", rep.max_step_cost, o.budget);
  } else {
    std::printf("mean step cost %.6f +- %.6f (epsilon %g, bound %.6f)\n", rep.mean_step_cost.mean,
                rep.mean_step_cost.std_error, o.epsilon, run.cost_bound);
  }
  return 0;
}

int cmd_verify(const Options& o) {
  const Scale scale = o.suite == "all" ? Scale::Full : Scale::Fast;
  if (o.fault == "svd2") testing::set_svd2_fault(true);
  std::size_t failed = 0;
  Json results = Json::array();
  auto print = [&](const CheckResult& r) {
    std::printf("%s %-22s %s: %s (%.2f s)\n", r.pass ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(), r.detail.c_str(),
                r.seconds);
    std::fflush(stdout);
    if (!r.pass) ++failed;
    results.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  };
  run_checks(acceptance_checks(), scale, o.jobs, print);
  run_checks(invariant_checks(), scale, o.jobs, print);
  testing::set_svd2_fault(false);
  std::printf("%zu of %zu checks failed\n", failed, results.size());
  if (!o.out.empty() && o.out != ".") {
    fs::create_directories(o.out);
    Json report;
    report["command"] = "verify";
    report["config"] = {{"suite", o.suite}, {"fault", o.fault}};
    report["seed"] = "fixed per check";
    report["results"] = results;
    save_json(fs::path(o.out) / "verify.json", report);
  }
  return failed == 0 ? 0 : kExitVerify;
}

bool is_usage_error(ErrorCode c) {
  return c == ErrorCode::BadSpec || c == ErrorCode::BadDistribution || c == ErrorCode::BadTowerVector ||
         c == ErrorCode::NeedStrictDecrease || c == ErrorCode::IllConditionedPair ||
         c == ErrorCode::DegenerateSplitting;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oseledets splitting experiments"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed_flag = 0;

  auto* onestep = app.add_subcommand("onestep", "i.i.d. products: exponents, directions and angle tails");
  auto* flexible = app.add_subcommand("flexible", "construct a cocycle with prescribed Oseledets data");
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria and invariants");

  std::vector<CLI::Option*> seed_opts;
  for (auto* sub : {onestep, flexible}) {
    sub->add_option("--spec", o.spec, "JSON spec")->required()->check(CLI::ExistingFile);
    sub->add_option("--steps", o.steps, "orbit length");
    seed_opts.push_back(sub->add_option("--seed", seed_flag, "64-bit master seed"));
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  }
  onestep->add_option("--trials", o.trials, "angle samples");
  onestep->add_option("--depth", o.depth, "Oseledets estimation depth");
  onestep->add_option("--thresholds", o.thresholds, "truncation levels M")->delimiter(',');
  flexible->add_option("--mode", o.mode, "lowcost or bounded")->check(CLI::IsMember({"lowcost", "bounded"}));
  flexible->add_option("--epsilon", o.epsilon, "lowcost mean-cost target")->check(CLI::PositiveNumber);
  flexible->add_option("--budget", o.budget, "bounded per-step budget")->check(CLI::PositiveNumber);
  auto* r1_opt = flexible->add_option("--r1", o.r1, "top exponent");
  auto* r2_opt = flexible->add_option("--r2", o.r2, "bottom exponent");
  verify->add_option("--suite", o.suite, "fast or all")->check(CLI::IsMember({"fast", "all"}));
  verify->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--out", o.out, "directory for verify.json");
  verify->add_option("--inject-fault", o.fault, "negative control")->check(CLI::IsMember({"svd2"}))->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(o);
    const CLI::Option* seed_opt = *onestep ? seed_opts[0] : seed_opts[1];
    o.seed = resolve_seed(seed_opt, seed_flag);
    if (*onestep) return cmd_onestep(o);
    return cmd_flexible(o, r1_opt->count() > 0, r2_opt->count() > 0);
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: malformed spec: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_usage_error(e.code()) ? kExitUsage : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
