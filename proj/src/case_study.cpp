#include "gsest/case_study.hpp"

namespace gsest::musec {

BinaryTrialData trial_data() {
  return BinaryTrialData(
      AnalysisCounts{ArmCounts{12, 97}, ArmCounts{27, 101}},
      AnalysisCounts{ArmCounts{21, 134}, ArmCounts{42, 143}});
}

TwoStageDesign design() {
  const BinaryTrialData data = trial_data();
  const double i1 = binary_information(data.interim);
  const double i2 = binary_information(*data.final_);
  return TwoStageDesign(kBoundaryInterim, kBoundaryFinal, i1, i2);
}

const std::array<ReferenceEstimate, kNumEstimators>& reference_estimates() {
  // Published point estimates with bootstrap SEs (theta assumed 0.14) and
  // relative differences to the overall MLE (table4 selector).
  static const std::array<ReferenceEstimate, kNumEstimators> table = {{
      {0.1370, 0.054, std::nullopt},  // mle_overall
      {0.1436, 0.057, 5},             // mle_stage1
      {0.1139, 0.111, -17},           // mle_stage2_increment
      {0.1341, 0.054, -2},            // mue
      {0.1278, 0.054, -7},            // umvue
      {0.1328, 0.055, -3},            // ubc_mle
      {0.1724, 0.071, 26},            // umvcue
      {0.1909, 0.073, 39},            // cbc_mle
  }};
  return table;
}

const ScenarioReference& reference_scenario_table() {
  // Published simulation means (SDs) at theta = 0.10 / 0.14 / 0.18
  // (table5 selector).
  static const ScenarioReference table = {{
      // mle_overall
      {{{0.103, 0.054}, {0.144, 0.054}, {0.184, 0.053}}},
      // mle_stage1
      {{{0.100, 0.057}, {0.140, 0.057}, {0.180, 0.057}}},
      // mle_stage2_increment (conditional on reaching stage 2)
      {{{0.100, 0.111}, {0.140, 0.111}, {0.180, 0.111}}},
      // mue
      {{{0.101, 0.053}, {0.142, 0.054}, {0.182, 0.054}}},
      // umvue
      {{{0.100, 0.052}, {0.140, 0.054}, {0.180, 0.055}}},
      // ubc_mle
      {{{0.101, 0.054}, {0.142, 0.055}, {0.183, 0.054}}},
      // umvcue (conditional)
      {{{0.100, 0.062}, {0.140, 0.071}, {0.179, 0.080}}},
      // cbc_mle (conditional)
      {{{0.111, 0.067}, {0.154, 0.073}, {0.194, 0.078}}},
  }};
  return table;
}

const std::array<MeanSd, 3>& reference_stage1_stop_mle1() {
  // Stage 1 MLE among replicates that stop at the interim (table6
  // selector).
  static const std::array<MeanSd, 3> table = {
      {{0.188, 0.025}, {0.197, 0.031}, {0.212, 0.038}}};
  return table;
}

const std::array<Stage2ConditionalReference, 5>& reference_stage2_conditional() {
  // Unconditional estimators among replicates that continue to stage 2
  // (table6 selector).
  static const std::array<Stage2ConditionalReference, 5> table = {{
      {Estimator::mle_overall,
       {{{0.087, 0.043}, {0.113, 0.038}, {0.132, 0.033}}}},
      {Estimator::mle_stage1,
       {{{0.084, 0.045}, {0.106, 0.038}, {0.120, 0.030}}}},
      {Estimator::mue, {{{0.086, 0.041}, {0.109, 0.034}, {0.126, 0.027}}}},
      {Estimator::umvue, {{{0.084, 0.039}, {0.106, 0.030}, {0.120, 0.023}}}},
      {Estimator::ubc_mle,
       {{{0.085, 0.041}, {0.110, 0.036}, {0.128, 0.032}}}},
  }};
  return table;
}

}  // namespace gsest::musec
