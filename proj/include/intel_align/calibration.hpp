#ifndef INTEL_ALIGN_CALIBRATION_HPP
#define INTEL_ALIGN_CALIBRATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intel_align/distance.hpp"
#include "intel_align/dtw.hpp"
#include "intel_align/feature_io.hpp"

namespace intel_align {

/// Alignment distance of one learner utterance against its teacher.
struct PairScore {
  std::string stimulus_id;
  std::string learner_id;
  double score = 0.0;
  Label label = Label::intelligible;
  std::vector<std::string> phoneme_categories;
  std::optional<std::uint32_t> phone_count;

  friend bool operator==(const PairScore&, const PairScore&) = default;
};

/// How FAR and FRR are normalised.
///   paper:             errors / all attempts
///   class_conditional: false accepts / actual non-intelligible,
///                      false rejects / actual intelligible
enum class RateMode { paper, class_conditional };

std::string_view to_string(RateMode mode);
std::optional<RateMode> parse_rate_mode(std::string_view s);

struct Prediction {
  Label predicted;
  Label actual;
};

/// Decision rule: strictly below the threshold is intelligible.
inline Label decide(double score, double threshold) {
  return score < threshold ? Label::intelligible : Label::non_intelligible;
}

double far(std::span<const Prediction> predictions, RateMode mode);
double frr(std::span<const Prediction> predictions, RateMode mode);

struct Split {
  std::vector<PairScore> calibration;
  std::vector<PairScore> test;
  /// Indices into the input, ascending.
  std::vector<std::size_t> calibration_indices;
};

/// Seeded partition into a calibration subset of round(fraction * n) items
/// and the complementary test set. Both parts keep the input order.
Split split(std::span<const PairScore> scores, double calibration_fraction, std::uint64_t seed,
            bool stratified = false);

struct CalibrationResult {
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
  double eer = 0.0;
  RateMode rate_mode = RateMode::class_conditional;
  std::size_t calibration_size = 0;
  std::uint64_t seed = 0;
};

/// Candidate thresholds: -inf, midpoints of consecutive distinct sorted
/// scores, +inf (ascending).
std::vector<double> candidate_thresholds(std::span<const PairScore> scores);

/// EER threshold selection. Minimises |FAR - FRR| over the candidates; ties
/// go to the smaller FAR + FRR, then to the smaller threshold.
CalibrationResult calibrate_threshold(std::span<const PairScore> calibration,
                                      RateMode mode = RateMode::class_conditional);

// ---- files -------------------------------------------------------------

struct ScoresFileMeta {
  std::uint64_t corpus_hash = 0;
  DistanceKind distance = DistanceKind::cd;
  Normalization normalization = Normalization::path_length;
};

struct ScoresFile {
  ScoresFileMeta meta;
  std::vector<PairScore> scores;
};

/// Delimited text: a `#` metadata line, a header row, then one row per pair
/// (stimulus_id, learner_id, score, label, phoneme_categories, phone_count).
std::string format_scores(const ScoresFile& file);
ScoresFile parse_scores(std::string_view text);

struct CalibrationFile {
  std::uint64_t corpus_hash = 0;
  DistanceKind distance = DistanceKind::cd;
  Normalization normalization = Normalization::path_length;
  double calibration_fraction = 0.05;
  bool stratified = false;
  CalibrationResult result;
  /// (stimulus_id, learner_id) of every calibration item, in input order.
  std::vector<std::pair<std::string, std::string>> members;
};

std::string format_calibration(const CalibrationFile& file);
CalibrationFile parse_calibration(std::string_view text);

}  // namespace intel_align

#endif  // INTEL_ALIGN_CALIBRATION_HPP
