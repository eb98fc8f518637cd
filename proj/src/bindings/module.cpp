#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gsest/case_study.hpp"
#include "gsest/design.hpp"
#include "gsest/errors.hpp"
#include "gsest/estimators.hpp"
#include "gsest/numerics.hpp"
#include "gsest/simulation.hpp"
#include "gsest/version.hpp"

namespace py = pybind11;
using namespace gsest;

namespace {

using Counts = std::pair<long long, long long>;  // (successes, n)

ArmCounts to_arm(const Counts& c) { return ArmCounts{c.first, c.second}; }

BinaryTrialData make_data(const Counts& interim_control,
                          const Counts& interim_treatment,
                          std::optional<Counts> final_control,
                          std::optional<Counts> final_treatment) {
  if (final_control.has_value() != final_treatment.has_value()) {
    throw std::invalid_argument(
        "final_control and final_treatment must be given together");
  }
  std::optional<AnalysisCounts> final_counts;
  if (final_control.has_value()) {
    final_counts =
        AnalysisCounts{to_arm(*final_control), to_arm(*final_treatment)};
  }
  return BinaryTrialData(
      AnalysisCounts{to_arm(interim_control), to_arm(interim_treatment)},
      final_counts);
}

numerics::TruncationSide side_from_name(const std::string& side) {
  if (side == "above_cut") {
    return numerics::TruncationSide::above_cut;
  }
  if (side == "below_cut") {
    return numerics::TruncationSide::below_cut;
  }
  throw std::invalid_argument("side must be 'above_cut' or 'below_cut'");
}

py::dict stat_dict(const SummaryStat& stat) {
  py::dict d;
  d["n"] = stat.n;
  d["mean"] = stat.mean;
  d["sd"] = stat.sd;
  return d;
}

py::dict summary_dict(const ScenarioSummary& summary) {
  py::dict d;
  d["analytic_stop_probability"] = summary.analytic_stop_probability;
  d["empirical_stop_probability"] = summary.empirical_stop_probability;
  d["n_stage1"] = summary.n_stage1;
  d["n_stage2"] = summary.n_stage2;
  py::dict est;
  for (int e = 0; e < kNumEstimators; ++e) {
    py::dict entry;
    entry["overall"] = stat_dict(summary.overall[e]);
    entry["stage1_stoppers"] = stat_dict(summary.stage1_stoppers[e]);
    entry["stage2_continuers"] = stat_dict(summary.stage2_continuers[e]);
    est[kEstimatorNames[e]] = entry;
  }
  d["estimators"] = est;
  return d;
}

py::dict estimate_dict(const EstimateSet& set) {
  py::dict d;
  d["mle_overall"] = set.mle_overall;
  d["mle_stage1"] = set.mle_stage1;
  d["mle_stage2_increment"] = set.mle_stage2_increment;
  d["mue"] = set.mue;
  d["umvue"] = set.umvue;
  d["ubc_mle"] = set.ubc_mle;
  d["umvcue"] = set.umvcue;
  d["cbc_mle"] = set.cbc_mle;
  return d;
}

}  // namespace

PYBIND11_MODULE(gsest, m) {
  m.doc() =
      "Unbiased and bias-adjusted treatment-effect estimation after a "
      "two-stage group sequential trial, plus a Monte Carlo engine for "
      "operating characteristics.";
  m.attr("__version__") = kVersion;

  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<StarvationError>(m, "StarvationError");

  // numerics
  m.def("std_normal_pdf", &numerics::std_normal_pdf, py::arg("x"));
  m.def("std_normal_cdf", &numerics::std_normal_cdf, py::arg("x"));
  m.def("std_normal_quantile", &numerics::std_normal_quantile, py::arg("p"));
  m.def("bivariate_normal_cdf", &numerics::bivariate_normal_cdf,
        py::arg("h"), py::arg("k"), py::arg("rho"),
        "P(X1 <= h, X2 <= k) for a standard bivariate normal pair");
  m.def(
      "truncated_normal_mean",
      [](double mu, double sigma, const std::string& side, double cut) {
        return numerics::truncated_normal_mean(mu, sigma,
                                               side_from_name(side), cut);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("side"), py::arg("cut"),
      "Mean of Normal(mu, sigma^2) kept above_cut or below_cut");

  // design
  py::class_<TwoStageDesign>(m, "TwoStageDesign",
                             "Two-stage efficacy design: z-scale boundaries "
                             "and information at each analysis")
      .def(py::init<double, double, double, double>(), py::arg("e1"),
           py::arg("e2"), py::arg("i1"), py::arg("i2"))
      .def_readonly("e1", &TwoStageDesign::e1)
      .def_readonly("e2", &TwoStageDesign::e2)
      .def_readonly("i1", &TwoStageDesign::i1)
      .def_readonly("i2", &TwoStageDesign::i2)
      .def_property_readonly("rho", &TwoStageDesign::rho)
      .def("__repr__", [](const TwoStageDesign& d) {
        return "TwoStageDesign(e1=" + std::to_string(d.e1) +
               ", e2=" + std::to_string(d.e2) + ", i1=" + std::to_string(d.i1) +
               ", i2=" + std::to_string(d.i2) + ")";
      });

  py::class_<BinaryTrialData>(m, "BinaryTrialData",
                              "Cumulative per-arm success counts; each arm "
                              "is a (successes, n) pair")
      .def(py::init(&make_data), py::arg("interim_control"),
           py::arg("interim_treatment"),
           py::arg("final_control") = std::nullopt,
           py::arg("final_treatment") = std::nullopt);

  m.def("obf_constant", &obf_constant, py::arg("alpha"), py::arg("rho"),
        "Boundary constant C with e2 = C, e1 = C/rho at one-sided alpha");
  m.def("obf_design", &obf_design, py::arg("alpha"), py::arg("i1"),
        py::arg("i2"));
  m.def(
      "binary_information",
      [](const Counts& control, const Counts& treatment) {
        return binary_information(
            AnalysisCounts{to_arm(control), to_arm(treatment)});
      },
      py::arg("control"), py::arg("treatment"),
      "Observed information from pooled success counts at one analysis");
  m.def(
      "z_statistics",
      [](const BinaryTrialData& data) {
        const auto zs = z_statistics(data);
        py::dict d;
        d["z1"] = zs.z1;
        d["z2"] = zs.z2;
        d["i1"] = zs.i1;
        d["i2"] = zs.i2;
        return d;
      },
      py::arg("data"));
  m.def(
      "normal_information",
      [](long long total_n, double sd, double allocation,
         double interim_fraction) {
        const auto info = normal_information(
            NormalEndpointSpec{total_n, sd, allocation, interim_fraction});
        return std::make_pair(info.i1, info.i2);
      },
      py::arg("total_n"), py::arg("sd") = 1.0, py::arg("allocation") = 0.5,
      py::arg("interim_fraction") = 0.5);
  m.def(
      "evaluate_stopping",
      [](const TwoStageDesign& design, double z1) {
        return evaluate_stopping(design, z1) ==
                       StopDecision::stop_efficacy_stage1
                   ? "stop_efficacy_stage1"
                   : "continue_to_stage2";
      },
      py::arg("design"), py::arg("z1"));
  m.def(
      "canonical_params",
      [](double theta, const TwoStageDesign& design) {
        const auto p = canonical_params(theta, design);
        return py::make_tuple(p.mu1, p.mu2, p.rho);
      },
      py::arg("theta"), py::arg("design"),
      "(theta*sqrt(i1), theta*sqrt(i2), sqrt(i1/i2))");

  // estimators
  py::class_<ObservedOutcome>(m, "ObservedOutcome")
      .def_readonly("stopped_stage", &ObservedOutcome::stopped_stage)
      .def_readonly("theta_hat_overall", &ObservedOutcome::theta_hat_overall)
      .def_readonly("theta_hat_stage1", &ObservedOutcome::theta_hat_stage1)
      .def_readonly("theta_hat_stage2_increment",
                    &ObservedOutcome::theta_hat_stage2_increment)
      .def_readonly("z1", &ObservedOutcome::z1)
      .def_readonly("z2", &ObservedOutcome::z2)
      .def_readonly("design", &ObservedOutcome::design);

  m.def(
      "outcome_from_z",
      [](const TwoStageDesign& design, double z1, std::optional<double> z2) {
        return ObservedOutcome::from_z(design, z1, z2);
      },
      py::arg("design"), py::arg("z1"), py::arg("z2") = std::nullopt);
  m.def(
      "outcome_from_data",
      [](const BinaryTrialData& data, double e1, double e2) {
        return ObservedOutcome::from_binary_data(data, e1, e2);
      },
      py::arg("data"), py::arg("e1"), py::arg("e2"));

  py::class_<EstimateSet>(m, "EstimateSet")
      .def_readonly("mle_overall", &EstimateSet::mle_overall)
      .def_readonly("mle_stage1", &EstimateSet::mle_stage1)
      .def_readonly("mle_stage2_increment", &EstimateSet::mle_stage2_increment)
      .def_readonly("mue", &EstimateSet::mue)
      .def_readonly("umvue", &EstimateSet::umvue)
      .def_readonly("ubc_mle", &EstimateSet::ubc_mle)
      .def_readonly("umvcue", &EstimateSet::umvcue)
      .def_readonly("cbc_mle", &EstimateSet::cbc_mle)
      .def("as_dict", &estimate_dict);

  m.def("mle_stage2_increment", &mle_stage2_increment, py::arg("data"));
  m.def("unconditional_bias", &unconditional_bias, py::arg("theta"),
        py::arg("design"));
  m.def("conditional_bias_stage2", &conditional_bias_stage2, py::arg("theta"),
        py::arg("design"));
  m.def("conditional_bias_stage1_stop", &conditional_bias_stage1_stop,
        py::arg("theta"), py::arg("design"));
  m.def("ubc_mle", &ubc_mle, py::arg("theta_hat_obs"), py::arg("design"));
  m.def("cbc_mle", &cbc_mle, py::arg("theta_hat_obs"), py::arg("design"));
  m.def("umvue", &umvue, py::arg("outcome"));
  m.def("umvcue", &umvcue, py::arg("outcome"));
  m.def("stagewise_pvalue", &stagewise_pvalue, py::arg("theta"),
        py::arg("outcome"));
  m.def("mue", &mue, py::arg("outcome"));
  m.def(
      "estimate_all",
      [](const BinaryTrialData& data, double e1, double e2) {
        return estimate_all(data, e1, e2);
      },
      py::arg("data"), py::arg("e1"), py::arg("e2"),
      "All eight estimators from binary trial data and z-scale boundaries");
  m.def(
      "estimate_outcome",
      [](const ObservedOutcome& outcome) { return estimate_outcome(outcome); },
      py::arg("outcome"));

  // simulation
  m.attr("ESTIMATOR_NAMES") = std::vector<std::string>(
      kEstimatorNames.begin(), kEstimatorNames.end());
  m.def("stop_probability", &stop_probability, py::arg("theta"),
        py::arg("design"));
  m.def(
      "run_scenario",
      [](double theta, const TwoStageDesign& design, std::uint64_t replicates,
         std::uint64_t seed, const std::string& conditioning, int threads) {
        const Scenario scenario{theta, design, replicates, seed,
                                conditioning_from_name(conditioning)};
        ScenarioSummary summary;
        {
          py::gil_scoped_release release;
          summary = run_scenario(scenario, nullptr, threads);
        }
        return summary_dict(summary);
      },
      py::arg("theta"), py::arg("design"), py::arg("replicates"),
      py::arg("seed"), py::arg("conditioning") = "all", py::arg("threads") = 0,
      "Monte Carlo summary over the canonical joint distribution");
  m.def(
      "bootstrap_se",
      [](const TwoStageDesign& design, double theta_assumed,
         std::uint64_t replicates, std::uint64_t seed, int threads) {
        std::array<std::optional<double>, kNumEstimators> se;
        {
          py::gil_scoped_release release;
          se = bootstrap_se(design, theta_assumed, replicates, seed, threads);
        }
        py::dict d;
        for (int e = 0; e < kNumEstimators; ++e) {
          d[kEstimatorNames[e]] = se[e];
        }
        return d;
      },
      py::arg("design"), py::arg("theta_assumed"), py::arg("replicates"),
      py::arg("seed"), py::arg("threads") = 0,
      "Parametric bootstrap standard errors per estimator");
  m.def(
      "bias_sweep",
      [](const std::vector<long long>& n_list, double alpha,
         const std::vector<double>& theta_grid, double sd,
         double interim_fraction, std::uint64_t mc_replicates,
         std::uint64_t seed) {
        std::vector<NormalEndpointSpec> specs;
        specs.reserve(n_list.size());
        for (const long long n : n_list) {
          specs.push_back(NormalEndpointSpec{n, sd, 0.5, interim_fraction});
        }
        SweepOptions options;
        options.mc_replicates = mc_replicates;
        options.seed = seed;
        std::vector<SweepPoint> table;
        {
          py::gil_scoped_release release;
          table = bias_sweep(specs, alpha, theta_grid, options);
        }
        py::list rows;
        for (const auto& pt : table) {
          py::dict row;
          row["n"] = pt.n;
          row["theta"] = pt.theta;
          row["bias_stop_stage1"] = pt.bias_stop_stage1;
          row["bias_continue_stage2"] = pt.bias_continue_stage2;
          row["bias_unconditional"] = pt.bias_unconditional;
          row["prob_stop"] = pt.prob_stop;
          row["mc_bias_stop_stage1"] = pt.mc_bias_stop_stage1;
          row["mc_bias_continue_stage2"] = pt.mc_bias_continue_stage2;
          row["mc_bias_unconditional"] = pt.mc_bias_unconditional;
          row["mc_prob_stop"] = pt.mc_prob_stop;
          rows.append(row);
        }
        return rows;
      },
      py::arg("n_list"), py::arg("alpha"), py::arg("theta_grid"),
      py::arg("sd") = 1.0, py::arg("interim_fraction") = 0.5,
      py::arg("mc_replicates") = 0, py::arg("seed") = 0,
      "Analytic bias/stopping curves for normal-endpoint designs");

  // bundled case study
  m.def("musec_data", &musec::trial_data,
        "Bundled MUSEC trial counts (interim and final)");
  m.def("musec_design", &musec::design,
        "Bundled MUSEC boundaries with observed information");
}
