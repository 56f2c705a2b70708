#ifndef INTEL_ALIGN_ANALYSIS_HPP
#define INTEL_ALIGN_ANALYSIS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "intel_align/calibration.hpp"
#include "intel_align/dtw.hpp"

namespace intel_align {

inline constexpr std::size_t kDefaultHistogramBins = 50;

/// Per-class histograms over one shared grid spanning [lo, hi].
struct ScoreHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> intelligible;
  std::vector<std::size_t> non_intelligible;

  std::size_t bins() const { return intelligible.size(); }
  double bin_lo(std::size_t i) const;
  double bin_hi(std::size_t i) const;
};

ScoreHistogram score_distributions(std::span<const PairScore> scores,
                                   std::size_t bins = kDefaultHistogramBins);

/// Sum over bins of min(p_i, q_i), with each class normalised to 1.
/// 0 means the classes never share a bin; 1 means identical shapes.
double overlap_coefficient(const ScoreHistogram& h);

struct ScatterRow {
  std::string stimulus_id;
  std::string learner_id;
  std::uint32_t phone_count = 0;
  double score = 0.0;
  Label label = Label::intelligible;
};

struct PhoneLengthScatter {
  std::vector<ScatterRow> rows;
  std::size_t skipped = 0;  // pairs without a phone count
};

PhoneLengthScatter phone_length_scatter(std::span<const PairScore> scores);

/// Where the k-th teacher and learner phone ends meet in the alignment grid.
struct BoundaryIntersection {
  std::uint32_t teacher_boundary_frame = 0;
  std::uint32_t learner_boundary_frame = 0;
  std::string phone_label;
  bool on_path = false;
  /// Chebyshev distance (frames) to the nearest path cell.
  double min_path_distance = 0.0;
};

std::vector<BoundaryIntersection> boundary_intersections(const AlignmentResult& alignment,
                                                         std::span<const PhoneBoundary> teacher,
                                                         std::span<const PhoneBoundary> learner);

std::string format_histogram_csv(const ScoreHistogram& h);
std::string format_scatter_csv(const PhoneLengthScatter& s);
std::string format_intersections_csv(std::span<const BoundaryIntersection> rows);

}  // namespace intel_align

#endif  // INTEL_ALIGN_ANALYSIS_HPP
