#include "io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gsest/case_study.hpp"
#include "gsest/rng.hpp"
#include "gsest/version.hpp"
#include "json.hpp"

namespace gsest::tools {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf);
}

ManifestBuilder::ManifestBuilder(std::string command)
    : command_(std::move(command)),
      command_line_("gsest " + command_),
      timestamp_(utc_timestamp()) {}

ManifestBuilder& ManifestBuilder::arg(const std::string& name,
                                      const std::string& value) {
  parameters_.set(name, value);
  command_line_ += " --" + name + " " + value;
  return *this;
}

ManifestBuilder& ManifestBuilder::arg(const std::string& name, double value) {
  parameters_.set(name, value);
  command_line_ += " --" + name + " " + format_double(value);
  return *this;
}

ManifestBuilder& ManifestBuilder::arg(const std::string& name,
                                      std::uint64_t value) {
  parameters_.set(name, value);
  command_line_ += " --" + name + " " + std::to_string(value);
  return *this;
}

ManifestBuilder& ManifestBuilder::arg(const std::string& name, int value) {
  parameters_.set(name, static_cast<std::int64_t>(value));
  command_line_ += " --" + name + " " + std::to_string(value);
  return *this;
}

ManifestBuilder& ManifestBuilder::note(const std::string& name,
                                       const std::string& value) {
  parameters_.set(name, value);
  return *this;
}

ManifestBuilder& ManifestBuilder::note_object(const std::string& name,
                                              JsonObject value) {
  parameters_.set(name, std::move(value));
  return *this;
}

ManifestBuilder& ManifestBuilder::seed(std::uint64_t value) {
  seed_ = value;
  return arg("seed", value);
}

JsonObject ManifestBuilder::json() const {
  JsonObject m;
  m.set("tool", "gsest");
  m.set("version", kVersion);
  m.set("command", command_);
  m.set("command_line", command_line_);
  m.set("parameters", parameters_);
  if (seed_.has_value()) {
    m.set("seed", *seed_);
    m.set("generator", kGeneratorName);
  } else {
    m.set("seed", nullptr);
    m.set("generator", nullptr);
  }
  m.set("timestamp", timestamp_);
  return m;
}

std::string ManifestBuilder::csv_comment_block() const {
  std::string out;
  out += "# tool: gsest " + std::string(kVersion) + "\n";
  out += "# command: " + command_ + "\n";
  out += "# rerun: " + command_line_ + "\n";
  if (seed_.has_value()) {
    out += "# seed: " + std::to_string(*seed_) + "\n";
    out += "# generator: " + std::string(kGeneratorName) + "\n";
  }
  out += "# timestamp: " + timestamp_ + "\n";
  return out;
}

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open file: " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
}

double require_number(const json& node, const std::string& path,
                      const std::string& field) {
  if (!node.contains(field) || !node.at(field).is_number()) {
    throw std::invalid_argument(path + ": missing or non-numeric field '" +
                                field + "'");
  }
  return node.at(field).get<double>();
}

long long require_count(const json& node, const std::string& path,
                        const std::string& field) {
  if (!node.contains(field) || !node.at(field).is_number_integer()) {
    throw std::invalid_argument(path + ": missing or non-integer field '" +
                                field + "'");
  }
  return node.at(field).get<long long>();
}

ArmCounts parse_arm(const json& node, const std::string& path,
                    const std::string& label) {
  if (!node.contains(label) || !node.at(label).is_object()) {
    throw std::invalid_argument(path + ": missing arm object '" + label + "'");
  }
  const json& arm = node.at(label);
  return ArmCounts{require_count(arm, path, "successes"),
                   require_count(arm, path, "n")};
}

AnalysisCounts parse_analysis(const json& node, const std::string& path,
                              const std::string& label) {
  if (!node.contains(label) || !node.at(label).is_object()) {
    throw std::invalid_argument(path + ": missing analysis object '" + label +
                                "'");
  }
  const json& analysis = node.at(label);
  return AnalysisCounts{parse_arm(analysis, path + "." + label, "control"),
                        parse_arm(analysis, path + "." + label, "treatment")};
}

}  // namespace

DesignInput parse_design_file(const std::string& path) {
  const json doc = load_json(path);
  if (!doc.is_object()) {
    throw std::invalid_argument(path + ": design file must be a JSON object");
  }
  DesignInput out{};
  if (doc.contains("e1") || doc.contains("e2")) {
    out.e1 = require_number(doc, path, "e1");
    out.e2 = require_number(doc, path, "e2");
    if (!(std::isfinite(out.e1) && std::isfinite(out.e2))) {
      throw std::invalid_argument(path + ": boundaries must be finite");
    }
    out.echo.set("form", "boundaries");
  } else if (doc.contains("alpha")) {
    const double alpha = require_number(doc, path, "alpha");
    std::string sided = "one";
    if (doc.contains("sided")) {
      if (!doc.at("sided").is_string()) {
        throw std::invalid_argument(path + ": field 'sided' must be a string");
      }
      sided = doc.at("sided").get<std::string>();
    }
    double fraction = 0.5;
    if (doc.contains("interim_fraction")) {
      fraction = require_number(doc, path, "interim_fraction");
    }
    if (sided != "one" && sided != "two") {
      throw std::invalid_argument(path + ": field 'sided' must be \"one\" or "
                                         "\"two\"");
    }
    if (!(fraction > 0.0 && fraction < 1.0)) {
      throw std::invalid_argument(path +
                                  ": interim_fraction must lie in (0, 1)");
    }
    const double alpha_one = sided == "two" ? 0.5 * alpha : alpha;
    const double rho = std::sqrt(fraction);
    const double c = obf_constant(alpha_one, rho);
    out.e1 = c / rho;
    out.e2 = c;
    out.echo.set("form", "alpha");
    out.echo.set("alpha", alpha);
    out.echo.set("sided", sided);
    out.echo.set("interim_fraction", fraction);
  } else {
    throw std::invalid_argument(
        path + ": design file needs either {e1, e2} or {alpha, sided, "
               "interim_fraction}");
  }
  out.echo.set("e1", out.e1);
  out.echo.set("e2", out.e2);
  return out;
}

BinaryTrialData parse_data_file(const std::string& path) {
  const json doc = load_json(path);
  if (!doc.is_object()) {
    throw std::invalid_argument(path + ": data file must be a JSON object");
  }
  const AnalysisCounts interim = parse_analysis(doc, path, "interim");
  std::optional<AnalysisCounts> final_counts;
  if (doc.contains("final")) {
    final_counts = parse_analysis(doc, path, "final");
  }
  try {
    return BinaryTrialData(interim, final_counts);
  } catch (const std::invalid_argument& err) {
    throw std::invalid_argument(path + ": " + err.what());
  }
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open output file: " + path);
  }
  out << content;
  if (!out) {
    throw std::invalid_argument("failed writing output file: " + path);
  }
}

namespace {

JsonValue opt_json(const std::optional<double>& v) {
  if (v.has_value()) {
    return JsonValue(*v);
  }
  return JsonValue(nullptr);
}

JsonValue opt_pct_json(const std::optional<double>& v) {
  if (v.has_value()) {
    return JsonValue(static_cast<std::int64_t>(std::lround(*v)));
  }
  return JsonValue(nullptr);
}

}  // namespace

JsonObject estimate_set_json(
    const EstimateSet& set,
    const std::array<std::optional<double>, kNumEstimators>* se) {
  const std::array<std::optional<double>, kNumEstimators> values = {
      set.mle_overall, set.mle_stage1, set.mle_stage2_increment,
      set.mue,         set.umvue,      set.ubc_mle,
      set.umvcue,      set.cbc_mle};
  const std::array<std::optional<double>, kNumEstimators> rel = {
      set.rel_diff_pct_mle_overall,
      set.rel_diff_pct_mle_stage1,
      set.rel_diff_pct_mle_stage2_increment,
      set.rel_diff_pct_mue,
      set.rel_diff_pct_umvue,
      set.rel_diff_pct_ubc_mle,
      set.rel_diff_pct_umvcue,
      set.rel_diff_pct_cbc_mle};

  JsonObject estimates;
  for (int e = 0; e < kNumEstimators; ++e) {
    JsonObject entry;
    entry.set("value", opt_json(values[e]));
    entry.set("rel_diff_pct", opt_pct_json(rel[e]));
    entry.set("se", se != nullptr ? opt_json((*se)[e]) : JsonValue(nullptr));
    estimates.set(kEstimatorNames[e], entry);
  }
  return estimates;
}

JsonObject summary_stat_json(const SummaryStat& stat) {
  JsonObject out;
  out.set("n", stat.n);
  out.set("mean", opt_json(stat.mean));
  out.set("sd", opt_json(stat.sd));
  return out;
}

JsonObject design_json(const TwoStageDesign& design) {
  JsonObject out;
  out.set("e1", design.e1);
  out.set("e2", design.e2);
  out.set("i1", design.i1);
  out.set("i2", design.i2);
  return out;
}

JsonObject scenario_summary_json(const ScenarioSummary& summary) {
  JsonObject out;
  out.set("analytic_stop_probability", summary.analytic_stop_probability);
  out.set("empirical_stop_probability", summary.empirical_stop_probability);
  out.set("n_stage1", summary.n_stage1);
  out.set("n_stage2", summary.n_stage2);
  JsonObject estimators;
  for (int e = 0; e < kNumEstimators; ++e) {
    JsonObject entry;
    entry.set("overall", summary_stat_json(summary.overall[e]));
    entry.set("stage1_stoppers", summary_stat_json(summary.stage1_stoppers[e]));
    entry.set("stage2_continuers",
              summary_stat_json(summary.stage2_continuers[e]));
    estimators.set(kEstimatorNames[e], entry);
  }
  out.set("estimators", estimators);
  return out;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
  return v.has_value() ? format_double(*v) : std::string();
}

}  // namespace

std::string records_csv(const std::vector<ReplicateRecord>& records,
                        const std::string& manifest_block) {
  std::string out = manifest_block;
  out += "replicate,z1,stopped_stage,z2";
  for (const char* name : kEstimatorNames) {
    out += ",";
    out += name;
  }
  out += "\n";
  for (const auto& rec : records) {
    out += std::to_string(rec.index);
    out += ",";
    out += format_double(rec.z1);
    out += ",";
    out += std::to_string(rec.stopped_stage);
    out += ",";
    out += opt_cell(rec.z2);
    for (int e = 0; e < kNumEstimators; ++e) {
      out += ",";
      out += opt_cell(estimator_value(rec.estimates, static_cast<Estimator>(e)));
    }
    out += "\n";
  }
  return out;
}

std::string histogram_csv(const Histogram& hist,
                          const std::string& manifest_block) {
  std::string out = manifest_block;
  out += "bin_lo,bin_hi";
  for (const char* name : kEstimatorNames) {
    out += ",";
    out += name;
  }
  out += "\n";
  const std::size_t rows = hist.edges.size() + 1;
  for (std::size_t row = 0; row < rows; ++row) {
    const std::string lo =
        row == 0 ? "-inf" : format_double(hist.edges[row - 1]);
    const std::string hi =
        row == rows - 1 ? "inf" : format_double(hist.edges[row]);
    out += lo + "," + hi;
    for (int e = 0; e < kNumEstimators; ++e) {
      out += ",";
      out += std::to_string(hist.counts[e][row]);
    }
    out += "\n";
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& table, bool mc_columns,
                      const std::string& manifest_block) {
  std::string out = manifest_block;
  out += "n,theta,bias_stop_stage1,bias_continue_stage2,bias_unconditional,"
         "prob_stop";
  if (mc_columns) {
    out += ",mc_bias_stop_stage1,mc_bias_continue_stage2,"
           "mc_bias_unconditional,mc_prob_stop";
  }
  out += "\n";
  for (const auto& row : table) {
    out += format_double(row.n);
    out += "," + format_double(row.theta);
    out += "," + format_double(row.bias_stop_stage1);
    out += "," + format_double(row.bias_continue_stage2);
    out += "," + format_double(row.bias_unconditional);
    out += "," + format_double(row.prob_stop);
    if (mc_columns) {
      out += "," + opt_cell(row.mc_bias_stop_stage1);
      out += "," + opt_cell(row.mc_bias_continue_stage2);
      out += "," + opt_cell(row.mc_bias_unconditional);
      out += "," + opt_cell(row.mc_prob_stop);
    }
    out += "\n";
  }
  return out;
}

// --- case-study tables ------------------------------------------------------

std::string case_study_table4_csv(std::uint64_t reps, std::uint64_t seed,
                                  int threads,
                                  const std::string& manifest_block) {
  const TwoStageDesign design = musec::design();
  const EstimateSet est = estimate_all(musec::trial_data(), design);
  const auto se = bootstrap_se(design, 0.14, reps, seed, threads);
  const auto est_json_order = std::array<std::optional<double>, kNumEstimators>{
      est.mle_overall, est.mle_stage1, est.mle_stage2_increment,
      est.mue,         est.umvue,      est.ubc_mle,
      est.umvcue,      est.cbc_mle};
  const std::array<std::optional<double>, kNumEstimators> rel = {
      est.rel_diff_pct_mle_overall,
      est.rel_diff_pct_mle_stage1,
      est.rel_diff_pct_mle_stage2_increment,
      est.rel_diff_pct_mue,
      est.rel_diff_pct_umvue,
      est.rel_diff_pct_ubc_mle,
      est.rel_diff_pct_umvcue,
      est.rel_diff_pct_cbc_mle};
  const auto& ref = musec::reference_estimates();

  std::string out = manifest_block;
  out += "estimator,estimate,se,rel_diff_pct,ref_estimate,ref_se,"
         "ref_rel_diff_pct,abs_deviation\n";
  for (int e = 0; e < kNumEstimators; ++e) {
    const double value = *est_json_order[e];
    out += kEstimatorNames[e];
    out += "," + format_double(value);
    out += "," + opt_cell(se[e]);
    out += ",";
    if (rel[e].has_value()) {
      out += std::to_string(std::lround(*rel[e]));
    }
    out += "," + format_double(ref[e].value);
    out += "," + format_double(ref[e].se);
    out += ",";
    if (ref[e].rel_diff_pct.has_value()) {
      out += std::to_string(*ref[e].rel_diff_pct);
    }
    out += "," + format_double(std::fabs(value - ref[e].value));
    out += "\n";
  }
  return out;
}

namespace {

bool is_conditional(int estimator) {
  return estimator == static_cast<int>(Estimator::mle_stage2_increment) ||
         estimator == static_cast<int>(Estimator::umvcue) ||
         estimator == static_cast<int>(Estimator::cbc_mle);
}

}  // namespace

std::string case_study_table5_csv(std::uint64_t reps, std::uint64_t seed,
                                  int threads,
                                  const std::string& manifest_block) {
  const TwoStageDesign design = musec::design();
  const auto& ref = musec::reference_scenario_table();

  std::string out = manifest_block;
  out += "theta,estimator,scope,mean,sd,ref_mean,ref_sd,dev_mean,dev_sd\n";
  for (int t = 0; t < 3; ++t) {
    const double theta = musec::kScenarioThetas[t];
    const ScenarioSummary all = run_scenario(
        Scenario{theta, design, reps, seed, Conditioning::all}, nullptr,
        threads);
    const ScenarioSummary cond = run_scenario(
        Scenario{theta, design, reps, seed, Conditioning::stage2_only},
        nullptr, threads);
    for (int e = 0; e < kNumEstimators; ++e) {
      const bool conditional = is_conditional(e);
      const SummaryStat& stat =
          conditional ? cond.overall[e] : all.overall[e];
      out += format_double(theta);
      out += ",";
      out += kEstimatorNames[e];
      out += conditional ? ",conditional_stage2" : ",unconditional";
      out += "," + opt_cell(stat.mean);
      out += "," + opt_cell(stat.sd);
      out += "," + format_double(ref[e][t].mean);
      out += "," + format_double(ref[e][t].sd);
      out += "," + (stat.mean.has_value()
                        ? format_double(std::fabs(*stat.mean - ref[e][t].mean))
                        : std::string());
      out += "," + (stat.sd.has_value()
                        ? format_double(std::fabs(*stat.sd - ref[e][t].sd))
                        : std::string());
      out += "\n";
    }
    // published stage-1 stopping probabilities from the same table
    out += format_double(theta);
    out += ",stop_probability_stage1,analytic";
    out += "," + format_double(all.analytic_stop_probability);
    out += ",";
    out += "," + format_double(musec::kScenarioStopProbs[t]);
    out += ",";
    out += "," + format_double(std::fabs(all.analytic_stop_probability -
                                         musec::kScenarioStopProbs[t]));
    out += ",\n";
  }
  return out;
}

std::string case_study_table6_csv(std::uint64_t reps, std::uint64_t seed,
                                  int threads,
                                  const std::string& manifest_block) {
  const TwoStageDesign design = musec::design();
  const auto& stop_ref = musec::reference_stage1_stop_mle1();

  std::string out = manifest_block;
  out += "theta,group,estimator,mean,sd,ref_mean,ref_sd,dev_mean,dev_sd\n";
  for (int t = 0; t < 3; ++t) {
    const double theta = musec::kScenarioThetas[t];
    const ScenarioSummary all = run_scenario(
        Scenario{theta, design, reps, seed, Conditioning::all}, nullptr,
        threads);

    const int s1 = static_cast<int>(Estimator::mle_stage1);
    const SummaryStat& stop_stat = all.stage1_stoppers[s1];
    out += format_double(theta);
    out += ",stage1_stop,mle_stage1";
    out += "," + opt_cell(stop_stat.mean);
    out += "," + opt_cell(stop_stat.sd);
    out += "," + format_double(stop_ref[t].mean);
    out += "," + format_double(stop_ref[t].sd);
    out += "," + (stop_stat.mean.has_value()
                      ? format_double(std::fabs(*stop_stat.mean -
                                                stop_ref[t].mean))
                      : std::string());
    out += "," + (stop_stat.sd.has_value()
                      ? format_double(std::fabs(*stop_stat.sd - stop_ref[t].sd))
                      : std::string());
    out += "\n";

    for (const auto& row : musec::reference_stage2_conditional()) {
      const int e = static_cast<int>(row.estimator);
      const SummaryStat& stat = all.stage2_continuers[e];
      out += format_double(theta);
      out += ",stage2_continue,";
      out += kEstimatorNames[e];
      out += "," + opt_cell(stat.mean);
      out += "," + opt_cell(stat.sd);
      out += "," + format_double(row.by_theta[t].mean);
      out += "," + format_double(row.by_theta[t].sd);
      out += "," + (stat.mean.has_value()
                        ? format_double(std::fabs(*stat.mean -
                                                  row.by_theta[t].mean))
                        : std::string());
      out += "," + (stat.sd.has_value()
                        ? format_double(std::fabs(*stat.sd -
                                                  row.by_theta[t].sd))
                        : std::string());
      out += "\n";
    }
  }
  return out;
}

std::string case_study_figure2_csv(std::uint64_t reps, std::uint64_t seed,
                                   int threads,
                                   const std::string& manifest_block) {
  const TwoStageDesign design = musec::design();
  std::vector<ReplicateRecord> records;
  (void)run_scenario(Scenario{0.14, design, reps, seed, Conditioning::all},
                     &records, threads);
  const Histogram hist = export_histogram(records, default_histogram_edges());
  return histogram_csv(hist, manifest_block);
}

}  // namespace gsest::tools
