// gsest: point estimation and Monte Carlo tooling for two-stage group
// sequential trials with early stopping for efficacy.
//
// Exit codes: 0 success, 2 input validation, 3 solver failure,
// 4 conditioning starvation.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsest/case_study.hpp"
#include "gsest/design.hpp"
#include "gsest/errors.hpp"
#include "gsest/estimators.hpp"
#include "gsest/numerics.hpp"
#include "gsest/simulation.hpp"
#include "gsest/version.hpp"
#include "io.hpp"
#include "json_writer.hpp"

namespace {

using namespace gsest;
using namespace gsest::tools;

struct EstimateArgs {
  std::string design_path;
  std::string data_path;
  std::string out_path;
  std::uint64_t bootstrap_reps = 0;
  double theta_assumed = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_estimate(const EstimateArgs& args) {
  const DesignInput din = parse_design_file(args.design_path);
  const BinaryTrialData data = parse_data_file(args.data_path);
  const ObservedOutcome outcome =
      ObservedOutcome::from_binary_data(data, din.e1, din.e2);
  const EstimateSet set = estimate_outcome(outcome);

  ManifestBuilder manifest("estimate");
  manifest.arg("design", args.design_path).arg("data", args.data_path);
  if (!args.out_path.empty()) {
    manifest.arg("out", args.out_path);
  }
  std::optional<std::array<std::optional<double>, kNumEstimators>> se;
  if (args.bootstrap_reps > 0) {
    if (std::isnan(args.theta_assumed)) {
      throw std::invalid_argument(
          "--theta-assumed is required with --bootstrap-se");
    }
    manifest.arg("bootstrap-se", args.bootstrap_reps)
        .arg("theta-assumed", args.theta_assumed)
        .seed(args.seed);
    se = bootstrap_se(outcome.design, args.theta_assumed, args.bootstrap_reps,
                      args.seed, args.threads);
  }
  if (args.threads > 0) {
    manifest.arg("threads", args.threads);
  }
  manifest.note_object("design_resolved", din.echo);

  JsonObject root;
  root.set("manifest", manifest.json());
  root.set("design", design_json(outcome.design));
  root.set("stopped_stage", static_cast<std::int64_t>(outcome.stopped_stage));
  JsonObject zs;
  zs.set("z1", outcome.z1);
  zs.set("z2", outcome.z2.has_value() ? JsonValue(*outcome.z2)
                                      : JsonValue(nullptr));
  root.set("z_statistics", zs);
  root.set("estimates",
           estimate_set_json(set, se.has_value() ? &*se : nullptr));
  write_output(args.out_path, dump_json(root));
  return 0;
}

struct SimulateArgs {
  double theta = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 0;
  std::string conditioning = "all";
  std::string out_path;
  std::string records_path;
  std::string hist_path;
  double hist_min = -0.2;
  double hist_max = 0.5;
  std::uint64_t hist_bins = 200;
  int threads = 0;
};

int run_simulate(const SimulateArgs& args) {
  const TwoStageDesign design(args.e1, args.e2, args.i1, args.i2);
  const Scenario scenario{args.theta, design, args.reps, args.seed,
                          conditioning_from_name(args.conditioning)};

  ManifestBuilder manifest("simulate");
  manifest.arg("theta", args.theta)
      .arg("i1", args.i1)
      .arg("i2", args.i2)
      .arg("e1", args.e1)
      .arg("e2", args.e2)
      .arg("reps", args.reps)
      .seed(args.seed)
      .arg("conditioning", args.conditioning);
  if (!args.out_path.empty()) {
    manifest.arg("out", args.out_path);
  }
  if (!args.records_path.empty()) {
    manifest.arg("records-out", args.records_path);
  }
  if (!args.hist_path.empty()) {
    manifest.arg("hist-out", args.hist_path)
        .arg("hist-min", args.hist_min)
        .arg("hist-max", args.hist_max)
        .arg("hist-bins", args.hist_bins);
  }
  if (args.threads > 0) {
    manifest.arg("threads", args.threads);
  }

  std::vector<ReplicateRecord> records;
  const bool keep_records =
      !args.records_path.empty() || !args.hist_path.empty();
  const ScenarioSummary summary = run_scenario(
      scenario, keep_records ? &records : nullptr, args.threads);

  JsonObject root;
  root.set("manifest", manifest.json());
  JsonObject sc;
  sc.set("theta", args.theta);
  sc.set("design", design_json(design));
  sc.set("replicates", args.reps);
  sc.set("seed", args.seed);
  sc.set("conditioning", args.conditioning);
  root.set("scenario", sc);
  const JsonObject body = scenario_summary_json(summary);
  for (const auto& [key, value] : body.members()) {
    root.set(key, value);
  }
  write_output(args.out_path, dump_json(root));

  const std::string comment = manifest.csv_comment_block();
  if (!args.records_path.empty()) {
    write_output(args.records_path, records_csv(records, comment));
  }
  if (!args.hist_path.empty()) {
    if (args.hist_bins < 1 || !(args.hist_max > args.hist_min)) {
      throw std::invalid_argument(
          "histogram range needs hist_max > hist_min and hist_bins >= 1");
    }
    std::vector<double> edges(args.hist_bins + 1);
    for (std::uint64_t i = 0; i <= args.hist_bins; ++i) {
      edges[i] = args.hist_min + (args.hist_max - args.hist_min) *
                                     static_cast<double>(i) /
                                     static_cast<double>(args.hist_bins);
    }
    write_output(args.hist_path,
                 histogram_csv(export_histogram(records, edges), comment));
  }
  return 0;
}

struct SweepArgs {
  std::string n_list;
  double alpha = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::uint64_t theta_steps = 0;
  double sd = 1.0;
  double interim_fraction = 0.5;
  std::uint64_t mc_check = 0;
  std::uint64_t seed = 0;
  std::string out_path;
};

int run_sweep(const SweepArgs& args) {
  std::vector<NormalEndpointSpec> specs;
  std::string token;
  std::stringstream stream(args.n_list);
  while (std::getline(stream, token, ',')) {
    if (token.empty()) {
      continue;
    }
    std::size_t pos = 0;
    long long n = 0;
    try {
      n = std::stoll(token, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != token.size()) {
      throw std::invalid_argument("--n-list: '" + token +
                                  "' is not an integer");
    }
    specs.push_back(NormalEndpointSpec{n, args.sd, 0.5, args.interim_fraction});
  }
  if (specs.empty()) {
    throw std::invalid_argument("--n-list: no sample sizes given");
  }
  if (args.theta_steps < 1) {
    throw std::invalid_argument("--theta-steps must be >= 1");
  }
  if (args.theta_steps == 1) {
    if (args.theta_max != args.theta_min) {
      throw std::invalid_argument(
          "--theta-steps 1 requires --theta-min == --theta-max");
    }
  } else if (!(args.theta_max > args.theta_min)) {
    throw std::invalid_argument("--theta-max must exceed --theta-min");
  }
  std::vector<double> grid;
  grid.reserve(args.theta_steps);
  for (std::uint64_t i = 0; i < args.theta_steps; ++i) {
    grid.push_back(args.theta_steps == 1
                       ? args.theta_min
                       : args.theta_min +
                             (args.theta_max - args.theta_min) *
                                 static_cast<double>(i) /
                                 static_cast<double>(args.theta_steps - 1));
  }

  ManifestBuilder manifest("sweep");
  manifest.arg("n-list", args.n_list)
      .arg("alpha", args.alpha)
      .arg("theta-min", args.theta_min)
      .arg("theta-max", args.theta_max)
      .arg("theta-steps", args.theta_steps)
      .arg("sd", args.sd)
      .arg("interim-fraction", args.interim_fraction);
  SweepOptions options;
  if (args.mc_check > 0) {
    options.mc_replicates = args.mc_check;
    options.seed = args.seed;
    manifest.arg("mc-check", args.mc_check).seed(args.seed);
  }
  if (!args.out_path.empty()) {
    manifest.arg("out", args.out_path);
  }

  const auto table = bias_sweep(specs, args.alpha, grid, options);
  write_output(args.out_path, sweep_csv(table, args.mc_check > 0,
                                        manifest.csv_comment_block()));
  return 0;
}

struct BoundariesArgs {
  double alpha = 0.0;
  std::string sided = "one";
  double interim_fraction = 0.5;
  std::string out_path;
};

int run_boundaries(const BoundariesArgs& args) {
  if (!(args.interim_fraction > 0.0 && args.interim_fraction < 1.0)) {
    throw std::invalid_argument("--interim-fraction must lie in (0, 1)");
  }
  const double alpha_one =
      args.sided == "two" ? 0.5 * args.alpha : args.alpha;
  const double rho = std::sqrt(args.interim_fraction);
  const double constant = obf_constant(alpha_one, rho);
  const double e1 = constant / rho;

  ManifestBuilder manifest("boundaries");
  manifest.arg("alpha", args.alpha)
      .arg("sided", args.sided)
      .arg("interim-fraction", args.interim_fraction);
  if (!args.out_path.empty()) {
    manifest.arg("out", args.out_path);
  }

  JsonObject root;
  root.set("manifest", manifest.json());
  root.set("alpha", args.alpha);
  root.set("sided", args.sided);
  root.set("interim_fraction", args.interim_fraction);
  root.set("constant", constant);
  root.set("e1", e1);
  root.set("e2", constant);
  root.set("interim_p_threshold", 1.0 - numerics::std_normal_cdf(e1));
  write_output(args.out_path, dump_json(root));
  return 0;
}

struct CaseStudyArgs {
  std::string which;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 7;
  std::string out_path;
  int threads = 0;
};

int run_case_study(const CaseStudyArgs& args) {
  ManifestBuilder manifest("case-study");
  manifest.arg("which", args.which).arg("reps", args.reps).seed(args.seed);
  if (!args.out_path.empty()) {
    manifest.arg("out", args.out_path);
  }
  if (args.threads > 0) {
    manifest.arg("threads", args.threads);
  }
  const std::string comment = manifest.csv_comment_block();

  std::string content;
  if (args.which == "table4") {
    content = case_study_table4_csv(args.reps, args.seed, args.threads, comment);
  } else if (args.which == "table5") {
    content = case_study_table5_csv(args.reps, args.seed, args.threads, comment);
  } else if (args.which == "table6") {
    content = case_study_table6_csv(args.reps, args.seed, args.threads, comment);
  } else if (args.which == "figure2-data") {
    content =
        case_study_figure2_csv(args.reps, args.seed, args.threads, comment);
  } else {
    throw std::invalid_argument("--which must be one of table4, table5, "
                                "table6, figure2-data");
  }
  write_output(args.out_path, content);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Unbiased and bias-adjusted treatment-effect estimation after a "
      "two-stage group sequential trial, with a Monte Carlo engine for "
      "operating characteristics"};
  app.set_version_flag("--version", std::string("gsest ") + gsest::kVersion);
  app.require_subcommand(1);

  EstimateArgs est;
  auto* cmd_est = app.add_subcommand(
      "estimate", "Compute the eight point estimates from design/data files");
  cmd_est->add_option("--design", est.design_path, "design JSON file")
      ->required();
  cmd_est->add_option("--data", est.data_path, "trial data JSON file")
      ->required();
  cmd_est->add_option("--out", est.out_path,
                      "output JSON path (stdout when omitted)");
  cmd_est->add_option("--bootstrap-se", est.bootstrap_reps,
                      "parametric bootstrap replicates for standard errors");
  cmd_est->add_option("--theta-assumed", est.theta_assumed,
                      "assumed true difference for the bootstrap");
  cmd_est->add_option("--seed", est.seed, "bootstrap seed");
  cmd_est->add_option("--threads", est.threads,
                      "worker threads (0: GSEST_THREADS or hardware)");

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand(
      "simulate", "Monte Carlo replication of a two-stage scenario");
  cmd_sim->add_option("--theta", sim.theta, "true treatment difference")
      ->required();
  cmd_sim->add_option("--i1", sim.i1, "information at the interim analysis")
      ->required();
  cmd_sim->add_option("--i2", sim.i2, "information at the final analysis")
      ->required();
  cmd_sim->add_option("--e1", sim.e1, "z-scale efficacy boundary at interim")
      ->required();
  cmd_sim->add_option("--e2", sim.e2, "z-scale efficacy boundary at final")
      ->required();
  cmd_sim->add_option("--reps", sim.reps, "number of trial replicates");
  cmd_sim->add_option("--seed", sim.seed, "random seed");
  cmd_sim
      ->add_option("--conditioning", sim.conditioning,
                   "all | stage2_only | stage1_only")
      ->check(CLI::IsMember({"all", "stage2_only", "stage1_only"}));
  cmd_sim->add_option("--out", sim.out_path,
                      "summary JSON path (stdout when omitted)");
  cmd_sim->add_option("--records-out", sim.records_path,
                      "per-replicate CSV path");
  cmd_sim->add_option("--hist-out", sim.hist_path, "histogram CSV path");
  cmd_sim->add_option("--hist-min", sim.hist_min, "histogram lower edge");
  cmd_sim->add_option("--hist-max", sim.hist_max, "histogram upper edge");
  cmd_sim->add_option("--hist-bins", sim.hist_bins, "histogram bin count");
  cmd_sim->add_option("--threads", sim.threads,
                      "worker threads (0: GSEST_THREADS or hardware)");

  SweepArgs sweep;
  auto* cmd_sweep = app.add_subcommand(
      "sweep",
      "Bias and stopping-probability curves over a treatment-effect grid");
  cmd_sweep
      ->add_option("--n-list", sweep.n_list,
                   "comma-separated total sample sizes")
      ->required();
  cmd_sweep->add_option("--alpha", sweep.alpha, "one-sided type I error")
      ->required();
  cmd_sweep->add_option("--theta-min", sweep.theta_min, "grid lower end")
      ->required();
  cmd_sweep->add_option("--theta-max", sweep.theta_max, "grid upper end")
      ->required();
  cmd_sweep->add_option("--theta-steps", sweep.theta_steps, "grid size")
      ->required();
  cmd_sweep->add_option("--sd", sweep.sd, "outcome standard deviation");
  cmd_sweep->add_option("--interim-fraction", sweep.interim_fraction,
                        "information fraction at the interim analysis");
  cmd_sweep->add_option("--mc-check", sweep.mc_check,
                        "Monte Carlo replicates for empirical columns");
  cmd_sweep->add_option("--seed", sweep.seed, "seed for --mc-check");
  cmd_sweep->add_option("--out", sweep.out_path,
                        "CSV path (stdout when omitted)");

  BoundariesArgs bounds;
  auto* cmd_bounds = app.add_subcommand(
      "boundaries", "Two-look efficacy boundary constants for a given alpha");
  cmd_bounds->add_option("--alpha", bounds.alpha, "type I error")->required();
  cmd_bounds->add_option("--sided", bounds.sided, "one | two")
      ->check(CLI::IsMember({"one", "two"}));
  cmd_bounds->add_option("--interim-fraction", bounds.interim_fraction,
                         "information fraction at the interim analysis");
  cmd_bounds->add_option("--out", bounds.out_path,
                         "output JSON path (stdout when omitted)");

  CaseStudyArgs cs;
  auto* cmd_cs = app.add_subcommand(
      "case-study",
      "Reproduce the bundled MUSEC analyses against their published values");
  cmd_cs
      ->add_option("--which", cs.which,
                   "table4 | table5 | table6 | figure2-data")
      ->required()
      ->check(CLI::IsMember({"table4", "table5", "table6", "figure2-data"}));
  cmd_cs->add_option("--reps", cs.reps, "Monte Carlo replicates");
  cmd_cs->add_option("--seed", cs.seed, "random seed");
  cmd_cs->add_option("--out", cs.out_path, "CSV path (stdout when omitted)");
  cmd_cs->add_option("--threads", cs.threads,
                     "worker threads (0: GSEST_THREADS or hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_est->parsed()) {
      return run_estimate(est);
    }
    if (cmd_sim->parsed()) {
      return run_simulate(sim);
    }
    if (cmd_sweep->parsed()) {
      return run_sweep(sweep);
    }
    if (cmd_bounds->parsed()) {
      return run_boundaries(bounds);
    }
    if (cmd_cs->parsed()) {
      return run_case_study(cs);
    }
  } catch (const gsest::StarvationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const gsest::SolverError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
