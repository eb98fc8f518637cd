#include "gsest/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include "gsest/errors.hpp"
#include "gsest/numerics.hpp"

namespace gsest {

namespace {

constexpr std::uint64_t kChunkSize = 8192;
constexpr std::uint64_t kProbeStreamBase = 0x8000000000000000ull;
constexpr std::uint64_t kMaxAttemptsPerReplicate = 100000000ull;

struct Accumulator {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sumsq += v * v;
  }
  void merge(const Accumulator& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

SummaryStat to_stat(const Accumulator& a) {
  SummaryStat s;
  s.n = a.n;
  if (a.n >= 1) {
    s.mean = a.sum / static_cast<double>(a.n);
  }
  if (a.n >= 2) {
    const double nn = static_cast<double>(a.n);
    const double var = (a.sumsq - a.sum * a.sum / nn) / (nn - 1.0);
    s.sd = std::sqrt(std::max(0.0, var));
  }
  return s;
}

struct ChunkAccum {
  std::array<Accumulator, kNumEstimators> overall{};
  std::array<Accumulator, kNumEstimators> s1{};
  std::array<Accumulator, kNumEstimators> s2{};
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  std::vector<ReplicateRecord> records;
};

}  // namespace

const char* conditioning_name(Conditioning c) {
  switch (c) {
    case Conditioning::all:
      return "all";
    case Conditioning::stage2_only:
      return "stage2_only";
    case Conditioning::stage1_only:
      return "stage1_only";
  }
  return "all";
}

Conditioning conditioning_from_name(const std::string& name) {
  if (name == "all") return Conditioning::all;
  if (name == "stage2_only") return Conditioning::stage2_only;
  if (name == "stage1_only") return Conditioning::stage1_only;
  throw std::invalid_argument("unknown conditioning mode: " + name);
}

std::optional<double> estimator_value(const EstimateSet& set, Estimator which) {
  switch (which) {
    case Estimator::mle_overall:
      return set.mle_overall;
    case Estimator::mle_stage1:
      return set.mle_stage1;
    case Estimator::mle_stage2_increment:
      return set.mle_stage2_increment;
    case Estimator::mue:
      return set.mue;
    case Estimator::umvue:
      return set.umvue;
    case Estimator::ubc_mle:
      return set.ubc_mle;
    case Estimator::umvcue:
      return set.umvcue;
    case Estimator::cbc_mle:
      return set.cbc_mle;
  }
  return std::nullopt;
}

void Scenario::validate() const {
  if (replicates < 1) {
    throw std::invalid_argument("Scenario: replicates must be >= 1");
  }
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("Scenario: theta must be finite");
  }
}

double stop_probability(double theta, const TwoStageDesign& design) {
  return 1.0 - numerics::std_normal_cdf(design.e1 - theta * design.sqrt_i1());
}

std::pair<double, double> draw_canonical_pair(ReplicateRng& rng,
                                              const CanonicalParams& params) {
  const double z1 = params.mu1 + rng.normal();
  const double sigma2 = std::sqrt(1.0 - params.rho * params.rho);
  const double z2 =
      params.mu2 + params.rho * (z1 - params.mu1) + sigma2 * rng.normal();
  return {z1, z2};
}

ReplicateRecord simulate_replicate(ReplicateRng& rng,
                                   const CanonicalParams& params,
                                   const TwoStageDesign& design) {
  const double z1 = params.mu1 + rng.normal();
  ReplicateRecord rec{};
  rec.z1 = z1;
  if (z1 >= design.e1) {
    rec.stopped_stage = 1;
    rec.estimates =
        estimate_outcome(ObservedOutcome::from_z(design, z1, std::nullopt));
  } else {
    const double sigma2 = std::sqrt(1.0 - params.rho * params.rho);
    const double z2 =
        params.mu2 + params.rho * (z1 - params.mu1) + sigma2 * rng.normal();
    rec.stopped_stage = 2;
    rec.z2 = z2;
    rec.estimates = estimate_outcome(ObservedOutcome::from_z(design, z1, z2));
  }
  return rec;
}

namespace {

void starvation_probe(const Scenario& scenario, const CanonicalParams& params) {
  const bool want_stop = scenario.conditioning == Conditioning::stage1_only;
  std::uint64_t hits = 0;
  std::uint64_t tried = 0;
  for (const std::uint64_t budget : {std::uint64_t{10000}, std::uint64_t{2000000}}) {
    for (; tried < budget; ++tried) {
      ReplicateRng rng(scenario.seed, kProbeStreamBase + tried);
      const double z1 = params.mu1 + rng.normal();
      const bool stopped = z1 >= scenario.design.e1;
      if (stopped == want_stop) {
        ++hits;
      }
    }
    if (hits >= 10) {
      return;
    }
  }
  if (static_cast<double>(hits) < 1e-6 * static_cast<double>(tried)) {
    throw StarvationError(
        "run_scenario: conditioning event probability is below 1e-6 over the "
        "probe batch");
  }
}

void process_chunk(const Scenario& scenario, const CanonicalParams& params,
                   std::uint64_t first, std::uint64_t last, bool keep_records,
                   ChunkAccum& out) {
  const TwoStageDesign& design = scenario.design;
  const double sigma2 = std::sqrt(1.0 - params.rho * params.rho);
  if (keep_records) {
    out.records.reserve(last - first);
  }
  for (std::uint64_t r = first; r < last; ++r) {
    ReplicateRng rng(scenario.seed, r);
    double z1 = 0.0;
    bool stopped = false;
    std::uint64_t attempts = 0;
    for (;;) {
      if (++attempts > kMaxAttemptsPerReplicate) {
        throw StarvationError(
            "run_scenario: rejection sampling exhausted the attempt budget");
      }
      z1 = params.mu1 + rng.normal();
      stopped = z1 >= design.e1;
      if (scenario.conditioning == Conditioning::stage2_only && stopped) {
        continue;
      }
      if (scenario.conditioning == Conditioning::stage1_only && !stopped) {
        continue;
      }
      break;
    }

    std::optional<double> z2;
    if (!stopped) {
      z2 = params.mu2 + params.rho * (z1 - params.mu1) + sigma2 * rng.normal();
    }
    const ObservedOutcome outcome = ObservedOutcome::from_z(design, z1, z2);
    const EstimateSet est = estimate_outcome(outcome);

    auto& split = stopped ? out.s1 : out.s2;
    (stopped ? out.n1 : out.n2) += 1;
    for (int e = 0; e < kNumEstimators; ++e) {
      const auto v = estimator_value(est, static_cast<Estimator>(e));
      if (v.has_value()) {
        out.overall[e].add(*v);
        split[e].add(*v);
      }
    }
    if (keep_records) {
      out.records.push_back(
          ReplicateRecord{r, z1, stopped ? 1 : 2, z2, est});
    }
  }
}

}  // namespace

int resolve_thread_count(int requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("GSEST_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) {
      return static_cast<int>(v);
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

ScenarioSummary run_scenario(const Scenario& scenario,
                             std::vector<ReplicateRecord>* records,
                             int threads) {
  scenario.validate();
  const CanonicalParams params =
      canonical_params(scenario.theta, scenario.design);
  if (scenario.conditioning != Conditioning::all) {
    starvation_probe(scenario, params);
  }

  const std::uint64_t n = scenario.replicates;
  const std::uint64_t nchunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkAccum> chunks(nchunks);
  const bool keep_records = records != nullptr;

  const int nthreads = std::max(
      1, std::min<int>(resolve_thread_count(threads),
                       static_cast<int>(std::min<std::uint64_t>(
                           nchunks, std::uint64_t{1024}))));

  std::atomic<std::uint64_t> next_chunk{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::uint64_t ci = next_chunk.fetch_add(1);
      if (ci >= nchunks || failed.load()) {
        return;
      }
      const std::uint64_t first = ci * kChunkSize;
      const std::uint64_t last = std::min(n, first + kChunkSize);
      try {
        process_chunk(scenario, params, first, last, keep_records, chunks[ci]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        failed.store(true);
        return;
      }
    }
  };

  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }

  // Deterministic reduction in chunk order, independent of the number of
  // workers.
  std::array<Accumulator, kNumEstimators> overall{};
  std::array<Accumulator, kNumEstimators> s1{};
  std::array<Accumulator, kNumEstimators> s2{};
  std::uint64_t n1 = 0;
  std::uint64_t n2 = 0;
  for (auto& ch : chunks) {
    for (int e = 0; e < kNumEstimators; ++e) {
      overall[e].merge(ch.overall[e]);
      s1[e].merge(ch.s1[e]);
      s2[e].merge(ch.s2[e]);
    }
    n1 += ch.n1;
    n2 += ch.n2;
    if (keep_records) {
      records->insert(records->end(),
                      std::make_move_iterator(ch.records.begin()),
                      std::make_move_iterator(ch.records.end()));
    }
  }

  ScenarioSummary summary;
  summary.analytic_stop_probability =
      stop_probability(scenario.theta, scenario.design);
  summary.empirical_stop_probability =
      static_cast<double>(n1) / static_cast<double>(n);
  summary.n_stage1 = n1;
  summary.n_stage2 = n2;
  for (int e = 0; e < kNumEstimators; ++e) {
    summary.overall[e] = to_stat(overall[e]);
    summary.stage1_stoppers[e] = to_stat(s1[e]);
    summary.stage2_continuers[e] = to_stat(s2[e]);
  }
  return summary;
}

std::array<std::optional<double>, kNumEstimators> bootstrap_se(
    const TwoStageDesign& design, double theta_assumed,
    std::uint64_t replicates, std::uint64_t seed, int threads) {
  if (replicates < 2) {
    throw std::invalid_argument("bootstrap_se: replicates must be >= 2");
  }
  Scenario scenario{theta_assumed, design, replicates, seed,
                    Conditioning::all};
  const ScenarioSummary summary = run_scenario(scenario, nullptr, threads);
  // Conditional estimators only accumulate over stage-2 continuers, so
  // the overall column already carries the conditional SD for them.
  std::array<std::optional<double>, kNumEstimators> out;
  for (int e = 0; e < kNumEstimators; ++e) {
    out[e] = summary.overall[e].sd;
  }
  return out;
}

namespace {

struct McPanels {
  std::optional<double> bias_s1;
  std::optional<double> bias_s2;
  std::optional<double> bias_all;
  double prob_stop = 0.0;
};

McPanels sweep_mc_check(double theta, const TwoStageDesign& design,
                        std::uint64_t replicates, std::uint64_t seed) {
  const CanonicalParams params = canonical_params(theta, design);
  const double sigma2 = std::sqrt(1.0 - params.rho * params.rho);
  Accumulator a_s1;
  Accumulator a_s2;
  Accumulator a_all;
  std::uint64_t n_stop = 0;
  for (std::uint64_t r = 0; r < replicates; ++r) {
    ReplicateRng rng(seed, r);
    const double z1 = params.mu1 + rng.normal();
    if (z1 >= design.e1) {
      ++n_stop;
      const double theta1 = z1 / design.sqrt_i1();
      a_s1.add(theta1);
      a_all.add(theta1);
    } else {
      const double z2 =
          params.mu2 + params.rho * (z1 - params.mu1) + sigma2 * rng.normal();
      const double theta_obs = z2 / design.sqrt_i2();
      a_s2.add(theta_obs);
      a_all.add(theta_obs);
    }
  }
  McPanels panels;
  if (a_s1.n > 0) {
    panels.bias_s1 = a_s1.sum / static_cast<double>(a_s1.n) - theta;
  }
  if (a_s2.n > 0) {
    panels.bias_s2 = a_s2.sum / static_cast<double>(a_s2.n) - theta;
  }
  if (a_all.n > 0) {
    panels.bias_all = a_all.sum / static_cast<double>(a_all.n) - theta;
  }
  panels.prob_stop =
      static_cast<double>(n_stop) / static_cast<double>(replicates);
  return panels;
}

}  // namespace

std::vector<SweepPoint> bias_sweep(
    const std::vector<NormalEndpointSpec>& endpoints, double alpha,
    const std::vector<double>& theta_grid, const SweepOptions& options) {
  if (endpoints.empty()) {
    throw std::invalid_argument("bias_sweep: endpoint list is empty");
  }
  if (theta_grid.empty()) {
    throw std::invalid_argument("bias_sweep: theta grid is empty");
  }
  for (std::size_t i = 1; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] > theta_grid[i - 1])) {
      throw std::invalid_argument("bias_sweep: theta grid must be strictly "
                                  "increasing");
    }
  }

  std::vector<SweepPoint> table;
  table.reserve(endpoints.size() * theta_grid.size());
  std::uint64_t row = 0;
  for (const auto& spec : endpoints) {
    const InformationPair info = normal_information(spec);
    const TwoStageDesign design = obf_design(alpha, info.i1, info.i2);
    for (const double theta : theta_grid) {
      SweepPoint pt;
      pt.n = static_cast<double>(spec.total_n);
      pt.theta = theta;
      pt.bias_stop_stage1 = conditional_bias_stage1_stop(theta, design);
      pt.bias_continue_stage2 = conditional_bias_stage2(theta, design);
      pt.bias_unconditional = unconditional_bias(theta, design);
      pt.prob_stop = stop_probability(theta, design);
      if (options.mc_replicates > 0) {
        // Streams are keyed by (row, replicate) so every grid point is an
        // independent deterministic batch.
        const McPanels mc = sweep_mc_check(
            theta, design, options.mc_replicates,
            options.seed ^ (0x9E3779B97F4A7C15ull * (row + 1)));
        pt.mc_bias_stop_stage1 = mc.bias_s1;
        pt.mc_bias_continue_stage2 = mc.bias_s2;
        pt.mc_bias_unconditional = mc.bias_all;
        pt.mc_prob_stop = mc.prob_stop;
      }
      table.push_back(pt);
      ++row;
    }
  }
  return table;
}

Histogram export_histogram(const std::vector<ReplicateRecord>& records,
                           const std::vector<double>& edges) {
  if (edges.size() < 2) {
    throw std::invalid_argument("export_histogram: need at least two edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw std::invalid_argument(
          "export_histogram: edges must be strictly increasing");
    }
  }
  Histogram hist;
  hist.edges = edges;
  const std::size_t nbins = edges.size() + 1;  // underflow + interior + overflow
  for (auto& c : hist.counts) {
    c.assign(nbins, 0);
  }
  for (const auto& rec : records) {
    for (int e = 0; e < kNumEstimators; ++e) {
      const auto v = estimator_value(rec.estimates, static_cast<Estimator>(e));
      if (!v.has_value()) {
        continue;
      }
      const auto it = std::upper_bound(edges.begin(), edges.end(), *v);
      hist.counts[e][static_cast<std::size_t>(it - edges.begin())] += 1;
    }
  }
  return hist;
}

std::vector<double> default_histogram_edges() {
  constexpr int kBins = 200;
  constexpr double kLo = -0.2;
  constexpr double kHi = 0.5;
  std::vector<double> edges(kBins + 1);
  for (int i = 0; i <= kBins; ++i) {
    edges[i] = kLo + (kHi - kLo) * static_cast<double>(i) / kBins;
  }
  return edges;
}

}  // namespace gsest
