#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "gsest/design.hpp"
#include "gsest/estimators.hpp"
#include "gsest/simulation.hpp"

// Bundled MUSEC case study: the observed two-stage trial counts, the
// one-sided efficacy boundaries, and the published reference values the
// reproduction commands compare against. Reference values are data, never
// recomputed.
namespace gsest::musec {

// Cumulative counts: interim 12/97 placebo vs 27/101 treatment, final
// 21/134 vs 42/143.
BinaryTrialData trial_data();

// z-scale efficacy boundaries as published (interim 2.797, final 1.977),
// with the observed information recomputed from the counts.
TwoStageDesign design();

inline constexpr double kBoundaryInterim = 2.797;
inline constexpr double kBoundaryFinal = 1.977;

// Published case-study estimates and bootstrap standard errors
// (theta assumed 0.14, 1e5 replicates), in the Estimator order of
// simulation.hpp.
struct ReferenceEstimate {
  double value;
  double se;
  std::optional<int> rel_diff_pct;
};

const std::array<ReferenceEstimate, kNumEstimators>& reference_estimates();

// Published simulation study references: per-estimator mean (sd) at
// theta in {0.10, 0.14, 0.18}, plus the stage-1 stopping probabilities.
inline constexpr std::array<double, 3> kScenarioThetas = {0.10, 0.14, 0.18};
inline constexpr std::array<double, 3> kScenarioStopProbs = {0.15, 0.37, 0.65};

struct MeanSd {
  double mean;
  double sd;
};

// Reference means/SDs across replicates; unconditional estimators over
// all replicates, conditional estimators over replicates that continue to
// stage 2. Indexed [estimator][theta index].
using ScenarioReference = std::array<std::array<MeanSd, 3>, kNumEstimators>;
const ScenarioReference& reference_scenario_table();

// Reference conditional means/SDs split by realised stopping stage:
// the stage 1 MLE among stage-1 stoppers, and the five unconditional
// estimators among stage-2 continuers.
const std::array<MeanSd, 3>& reference_stage1_stop_mle1();

struct Stage2ConditionalReference {
  Estimator estimator;
  std::array<MeanSd, 3> by_theta;
};
const std::array<Stage2ConditionalReference, 5>& reference_stage2_conditional();

// Indices of the unconditional estimators (reported over all replicates)
// and the conditional ones (reported over stage-2 continuers).
inline constexpr std::array<Estimator, 5> kUnconditionalEstimators = {
    Estimator::mle_overall, Estimator::mle_stage1, Estimator::mue,
    Estimator::umvue, Estimator::ubc_mle};
inline constexpr std::array<Estimator, 3> kConditionalEstimators = {
    Estimator::mle_stage2_increment, Estimator::umvcue, Estimator::cbc_mle};

}  // namespace gsest::musec
