#ifndef INTEL_ALIGN_CLASSIFIER_HPP
#define INTEL_ALIGN_CLASSIFIER_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "intel_align/calibration.hpp"

namespace intel_align {

struct Classified {
  PairScore item;
  Label predicted;
};

/// Applies `score < threshold => intelligible` to every item, keeping order.
std::vector<Classified> classify(std::span<const PairScore> scores, double threshold);

std::vector<Prediction> predictions_of(std::span<const Classified> classified);

/// Percentage of predictions matching the actual label.
double accuracy(std::span<const Prediction> predictions);

/// Accuracy over the items tagged with each category. Items with several
/// categories count towards each of them; empty categories are omitted.
std::map<std::string, double> per_category_accuracy(std::span<const Classified> classified);

/// Accuracy of predicting `majority` for every item.
double baseline_mcv(std::span<const PairScore> test, Label majority = Label::intelligible);

/// One Bernoulli(p_intelligible) draw per item, realised accuracy.
double baseline_rs(std::span<const PairScore> test, double p_intelligible, std::uint64_t seed);
std::vector<Label> random_labels(std::size_t n, double p_intelligible, std::uint64_t seed);

/// Closed-form expected RS accuracy p*q + (1-p)(1-q), q = intelligible
/// fraction of `test`, as a percentage.
double baseline_rs_expected(std::span<const PairScore> test, double p_intelligible);

struct Confusion {
  std::size_t tp = 0;  // intelligible predicted intelligible
  std::size_t tn = 0;
  std::size_t fp = 0;  // non-intelligible predicted intelligible
  std::size_t fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
};

Confusion confusion_of(std::span<const Classified> classified);

struct BaselineScores {
  double mcv = 0.0;
  double rs = 0.0;
};

struct ClassificationReport {
  DistanceKind distance = DistanceKind::cd;
  Normalization normalization = Normalization::path_length;
  RateMode rate_mode = RateMode::class_conditional;
  double threshold = 0.0;
  std::size_t n_test = 0;
  Confusion confusion;
  double overall_accuracy = 0.0;
  std::map<std::string, double> per_category_accuracy;
  BaselineScores baselines;
  std::map<std::string, BaselineScores> per_category_baselines;
  double rs_expected = 0.0;
  double rs_p_intelligible = 0.0;
  std::uint64_t rs_seed = 0;
  std::vector<Classified> verdicts;
};

/// Classifies the test set and evaluates both baselines on it.
/// `p_intelligible` is the intelligible fraction of the calibration subset.
ClassificationReport build_report(std::span<const PairScore> test, double threshold,
                                  DistanceKind distance, Normalization normalization,
                                  RateMode rate_mode, double p_intelligible, std::uint64_t rs_seed);

/// Machine-readable report for one or more distance measures.
std::string format_report_json(std::span<const ClassificationReport> reports,
                               std::uint64_t corpus_hash);
/// Aligned text: an overall table (CD MAE MSE MCV RS) followed by a
/// per-category table with the same columns.
std::string format_report_table(std::span<const ClassificationReport> reports);
/// One row per test utterance with its score and verdict.
std::string format_verdicts_csv(const ClassificationReport& report);

}  // namespace intel_align

#endif  // INTEL_ALIGN_CLASSIFIER_HPP
