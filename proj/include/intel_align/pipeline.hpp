#ifndef INTEL_ALIGN_PIPELINE_HPP
#define INTEL_ALIGN_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "intel_align/calibration.hpp"
#include "intel_align/analysis.hpp"
#include "intel_align/classifier.hpp"
#include "intel_align/synthetic.hpp"

namespace intel_align {

/// Settings shared by the batch commands. Precedence when assembled by the
/// command-line tool: built-in defaults, then INTEL_ALIGN_WORKERS, then a
/// JSON config file, then explicit flags.
struct RunConfig {
  std::filesystem::path manifest_path;
  DistanceKind distance = DistanceKind::cd;
  Normalization normalization = Normalization::path_length;
  double calibration_fraction = 0.05;
  std::uint64_t seed = 1;
  RateMode rate_mode = RateMode::class_conditional;
  bool stratified = false;
  std::filesystem::path output_dir = "out";
  std::size_t worker_count = 1;
  std::size_t bins = kDefaultHistogramBins;

  void validate() const;
};

/// Overrides fields of `base` with the keys present in a JSON object.
RunConfig apply_config_json(std::string_view json_text, RunConfig base);
std::string format_run_config(const RunConfig& config);

// Output file names inside RunConfig::output_dir.
std::filesystem::path scores_path(const RunConfig& c, DistanceKind k);
std::filesystem::path score_errors_path(const RunConfig& c, DistanceKind k);
std::filesystem::path calibration_path(const RunConfig& c, DistanceKind k);

struct PairFailure {
  std::string stimulus_id;
  std::string learner_id;
  std::string message;
};

struct ScoreOutcome {
  ScoresFile file;
  std::vector<PairFailure> failures;
};

/// Scores every learner utterance against its own stimulus's teacher, in
/// manifest order. Per-pair failures are collected, not thrown. The result
/// does not depend on `workers`.
ScoreOutcome score_corpus(const Manifest& manifest, DistanceKind kind, Normalization normalization,
                          std::size_t workers);

/// Report for one distance measure from its scores and calibration files.
ClassificationReport report_from_files(const ScoresFile& scores, const CalibrationFile& calibration,
                                       std::uint64_t rs_seed);

// Subcommands. Each writes into config.output_dir, logs to `log`, and
// returns the process exit code (0 iff everything succeeded).
int cmd_synth(const SynthSpec& spec, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_score(const RunConfig& config, std::ostream& log);
int cmd_calibrate(const RunConfig& config, std::ostream& log);
/// Reports every distance measure with both a scores and a calibration
/// file present, or only `only` when given.
int cmd_classify(const RunConfig& config, std::optional<DistanceKind> only, std::ostream& log);
int cmd_trace(const RunConfig& config, const std::string& stimulus_id, const std::string& learner_id,
              std::ostream& log);
int cmd_distributions(const RunConfig& config, std::optional<DistanceKind> only, std::ostream& log);

}  // namespace intel_align

#endif  // INTEL_ALIGN_PIPELINE_HPP
