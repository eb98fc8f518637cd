#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsest/design.hpp"
#include "gsest/estimators.hpp"
#include "gsest/rng.hpp"

namespace gsest {

enum class Conditioning { all, stage2_only, stage1_only };

const char* conditioning_name(Conditioning c);
Conditioning conditioning_from_name(const std::string& name);

// Fixed estimator ordering used by summaries, bootstrap output and
// histograms.
enum class Estimator : int {
  mle_overall = 0,
  mle_stage1 = 1,
  mle_stage2_increment = 2,
  mue = 3,
  umvue = 4,
  ubc_mle = 5,
  umvcue = 6,
  cbc_mle = 7,
};

inline constexpr int kNumEstimators = 8;

inline constexpr std::array<const char*, kNumEstimators> kEstimatorNames = {
    "mle_overall", "mle_stage1", "mle_stage2_increment", "mue",
    "umvue",       "ubc_mle",    "umvcue",               "cbc_mle"};

// Value of one estimator from a set; absent for the conditional
// estimators of a stage-1 stop.
std::optional<double> estimator_value(const EstimateSet& set, Estimator which);

struct Scenario {
  double theta;
  TwoStageDesign design;
  std::uint64_t replicates;
  std::uint64_t seed;
  Conditioning conditioning = Conditioning::all;

  void validate() const;
};

struct ReplicateRecord {
  std::uint64_t index;
  double z1;
  int stopped_stage;
  std::optional<double> z2;
  EstimateSet estimates;
};

struct SummaryStat {
  std::uint64_t n = 0;
  std::optional<double> mean;  // absent when n == 0
  std::optional<double> sd;    // absent when n < 2
};

using EstimatorStats = std::array<SummaryStat, kNumEstimators>;

struct ScenarioSummary {
  double analytic_stop_probability = 0.0;
  double empirical_stop_probability = 0.0;
  std::uint64_t n_stage1 = 0;
  std::uint64_t n_stage2 = 0;
  EstimatorStats overall;            // across all accepted replicates
  EstimatorStats stage1_stoppers;    // split by realised stopping stage
  EstimatorStats stage2_continuers;
};

struct Histogram {
  // Strictly increasing edges; counts[e] has edges.size()+1 entries:
  // [underflow, interior bins, overflow].
  std::vector<double> edges;
  std::array<std::vector<std::uint64_t>, kNumEstimators> counts;
};

// Analytic probability of stopping at the interim, 1 - Phi(e1 -
// theta*sqrt(i1)).
double stop_probability(double theta, const TwoStageDesign& design);

// One trial replicate from the canonical joint distribution: Z1 ~
// N(mu1, 1); on continuation Z2 | Z1 ~ N(mu2 + rho(Z1 - mu1), 1 - rho^2).
ReplicateRecord simulate_replicate(ReplicateRng& rng,
                                   const CanonicalParams& params,
                                   const TwoStageDesign& design);

// Unconditioned draw of the canonical pair (z1, z2), ignoring stopping.
std::pair<double, double> draw_canonical_pair(ReplicateRng& rng,
                                              const CanonicalParams& params);

// Monte Carlo over the scenario. Conditioned scenarios resample each
// replicate until the conditioning event holds; a probe batch guards
// against starvation (events rarer than ~1e-6) with a StarvationError.
// When `records` is non-null all accepted replicates are appended in
// replicate order. `threads` <= 0 resolves from the GSEST_THREADS
// environment variable, then hardware concurrency. Results are identical
// for any thread count.
ScenarioSummary run_scenario(const Scenario& scenario,
                             std::vector<ReplicateRecord>* records = nullptr,
                             int threads = 0);

// Parametric bootstrap standard errors assuming theta_assumed:
// unconditional estimators over all replicates, conditional estimators
// over the stage-2 continuers.
std::array<std::optional<double>, kNumEstimators> bootstrap_se(
    const TwoStageDesign& design, double theta_assumed,
    std::uint64_t replicates, std::uint64_t seed, int threads = 0);

struct SweepPoint {
  double n = 0.0;
  double theta = 0.0;
  double bias_stop_stage1 = 0.0;
  double bias_continue_stage2 = 0.0;
  double bias_unconditional = 0.0;
  double prob_stop = 0.0;
  std::optional<double> mc_bias_stop_stage1;
  std::optional<double> mc_bias_continue_stage2;
  std::optional<double> mc_bias_unconditional;
  std::optional<double> mc_prob_stop;
};

struct SweepOptions {
  std::uint64_t mc_replicates = 0;  // 0 disables the Monte Carlo columns
  std::uint64_t seed = 0;
};

// Analytic bias and stopping-probability curves over a theta grid for a
// family of normal-endpoint designs whose boundaries come from
// obf_constant(alpha, sqrt(interim_fraction)).
std::vector<SweepPoint> bias_sweep(const std::vector<NormalEndpointSpec>& endpoints,
                                   double alpha,
                                   const std::vector<double>& theta_grid,
                                   const SweepOptions& options = {});

// Per-estimator histogram of the recorded estimates.
Histogram export_histogram(const std::vector<ReplicateRecord>& records,
                           const std::vector<double>& edges);

// Default binning used for sampling-distribution exports: 200 equal bins
// over [-0.2, 0.5].
std::vector<double> default_histogram_edges();

// Number of worker threads after resolving `requested` (<= 0) against the
// GSEST_THREADS environment variable and hardware concurrency.
int resolve_thread_count(int requested);

}  // namespace gsest
