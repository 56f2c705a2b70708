#include "intel_align/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "intel_align/text.hpp"

namespace intel_align {

double ScoreHistogram::bin_lo(std::size_t i) const {
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins());
}

double ScoreHistogram::bin_hi(std::size_t i) const {
  return i + 1 == bins() ? hi : bin_lo(i + 1);
}

ScoreHistogram score_distributions(std::span<const PairScore> scores, std::size_t bins) {
  if (scores.empty()) throw DomainError("no scores to histogram");
  if (bins < 2) throw DomainError("histogram needs at least 2 bins");
  ScoreHistogram h;
  const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end(),
                                            [](const auto& a, const auto& b) { return a.score < b.score; });
  h.lo = mn->score;
  h.hi = mx->score;
  h.intelligible.assign(bins, 0);
  h.non_intelligible.assign(bins, 0);
  const double width = h.hi - h.lo;
  for (const auto& s : scores) {
    std::size_t idx = 0;
    if (width > 0.0) {
      const double pos = (s.score - h.lo) / width * static_cast<double>(bins);
      idx = std::min(bins - 1, static_cast<std::size_t>(pos));
    }
    ++(s.label == Label::intelligible ? h.intelligible : h.non_intelligible)[idx];
  }
  return h;
}

double overlap_coefficient(const ScoreHistogram& h) {
  std::size_t ni = 0, nn = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    ni += h.intelligible[i];
    nn += h.non_intelligible[i];
  }
  if (ni == 0 || nn == 0) return 0.0;
  double overlap = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    overlap += std::min(static_cast<double>(h.intelligible[i]) / static_cast<double>(ni),
                        static_cast<double>(h.non_intelligible[i]) / static_cast<double>(nn));
  }
  return overlap;
}

PhoneLengthScatter phone_length_scatter(std::span<const PairScore> scores) {
  PhoneLengthScatter out;
  for (const auto& s : scores) {
    if (!s.phone_count) {
      ++out.skipped;
      continue;
    }
    out.rows.push_back({s.stimulus_id, s.learner_id, *s.phone_count, s.score, s.label});
  }
  return out;
}

std::vector<BoundaryIntersection> boundary_intersections(const AlignmentResult& alignment,
                                                         std::span<const PhoneBoundary> teacher,
                                                         std::span<const PhoneBoundary> learner) {
  if (teacher.size() != learner.size()) {
    throw DomainError("teacher has " + std::to_string(teacher.size()) + " phones but learner has " +
                      std::to_string(learner.size()));
  }
  std::vector<BoundaryIntersection> out;
  out.reserve(teacher.size());
  for (std::size_t k = 0; k < teacher.size(); ++k) {
    BoundaryIntersection b;
    b.teacher_boundary_frame = teacher[k].end_frame;
    b.learner_boundary_frame = learner[k].end_frame;
    b.phone_label = teacher[k].phone_label;
    auto best = std::numeric_limits<std::int64_t>::max();
    for (const auto& step : alignment.path) {
      const std::int64_t dx = std::llabs(std::int64_t{step.x} - b.teacher_boundary_frame);
      const std::int64_t dy = std::llabs(std::int64_t{step.y} - b.learner_boundary_frame);
      best = std::min(best, std::max(dx, dy));
    }
    b.min_path_distance = static_cast<double>(best);
    b.on_path = best == 0;
    out.push_back(std::move(b));
  }
  return out;
}

std::string format_histogram_csv(const ScoreHistogram& h) {
  std::string out = "bin_lo,bin_hi,intelligible,non_intelligible\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out += format_double(h.bin_lo(i)) + ',' + format_double(h.bin_hi(i)) + ',' +
           std::to_string(h.intelligible[i]) + ',' + std::to_string(h.non_intelligible[i]) + '\n';
  }
  return out;
}

std::string format_scatter_csv(const PhoneLengthScatter& s) {
  std::string out = "stimulus_id,learner_id,phone_count,score,label\n";
  for (const auto& r : s.rows) {
    out += csv_field(r.stimulus_id) + ',' + csv_field(r.learner_id) + ',' +
           std::to_string(r.phone_count) + ',' + format_double(r.score) + ',' +
           (r.label == Label::intelligible ? "1" : "0") + '\n';
  }
  return out;
}

std::string format_intersections_csv(std::span<const BoundaryIntersection> rows) {
  std::string out = "phone_label,teacher_boundary_frame,learner_boundary_frame,on_path,min_path_distance\n";
  for (const auto& r : rows) {
    out += csv_field(r.phone_label) + ',' + std::to_string(r.teacher_boundary_frame) + ',' +
           std::to_string(r.learner_boundary_frame) + ',' + (r.on_path ? "true" : "false") + ',' +
           format_double(r.min_path_distance) + '\n';
  }
  return out;
}

}  // namespace intel_align
