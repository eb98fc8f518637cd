#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsest/design.hpp"
#include "gsest/estimators.hpp"
#include "gsest/simulation.hpp"
#include "json_writer.hpp"

namespace gsest::tools {

// Reproducibility block embedded in every artifact: the resolved
// parameter echo is sufficient to re-run the command exactly.
class ManifestBuilder {
 public:
  explicit ManifestBuilder(std::string command);

  ManifestBuilder& arg(const std::string& name, const std::string& value);
  ManifestBuilder& arg(const std::string& name, double value);
  ManifestBuilder& arg(const std::string& name, std::uint64_t value);
  ManifestBuilder& arg(const std::string& name, int value);
  // echoed in the parameter object but not the command line
  ManifestBuilder& note(const std::string& name, const std::string& value);
  ManifestBuilder& note_object(const std::string& name, JsonObject value);

  ManifestBuilder& seed(std::uint64_t value);  // also records the generator

  JsonObject json() const;
  // "# "-prefixed manifest block for CSV artifacts
  std::string csv_comment_block() const;

 private:
  std::string command_;
  std::string command_line_;
  JsonObject parameters_;
  std::optional<std::uint64_t> seed_;
  std::string timestamp_;
};

// Parsed design file: either explicit z-scale boundaries or an
// (alpha, sided, interim_fraction) specification resolved through
// obf_constant.
struct DesignInput {
  double e1;
  double e2;
  JsonObject echo;  // normalized form for the manifest
};

DesignInput parse_design_file(const std::string& path);
BinaryTrialData parse_data_file(const std::string& path);

// Writes to the path, or to stdout when path is empty.
void write_output(const std::string& path, const std::string& content);

// --- serializers -----------------------------------------------------------

JsonObject estimate_set_json(
    const EstimateSet& set,
    const std::array<std::optional<double>, kNumEstimators>* se);

JsonObject summary_stat_json(const SummaryStat& stat);
JsonObject scenario_summary_json(const ScenarioSummary& summary);
JsonObject design_json(const TwoStageDesign& design);

std::string records_csv(const std::vector<ReplicateRecord>& records,
                        const std::string& manifest_block);
std::string histogram_csv(const Histogram& hist,
                          const std::string& manifest_block);
std::string sweep_csv(const std::vector<SweepPoint>& table, bool mc_columns,
                      const std::string& manifest_block);

// --- case-study table builders ---------------------------------------------

std::string case_study_table4_csv(std::uint64_t reps, std::uint64_t seed,
                                  int threads,
                                  const std::string& manifest_block);
std::string case_study_table5_csv(std::uint64_t reps, std::uint64_t seed,
                                  int threads,
                                  const std::string& manifest_block);
std::string case_study_table6_csv(std::uint64_t reps, std::uint64_t seed,
                                  int threads,
                                  const std::string& manifest_block);
std::string case_study_figure2_csv(std::uint64_t reps, std::uint64_t seed,
                                   int threads,
                                   const std::string& manifest_block);

// %.17g formatting shared by all CSV output
std::string format_double(double value);

}  // namespace gsest::tools
