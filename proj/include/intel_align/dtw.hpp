#ifndef INTEL_ALIGN_DTW_HPP
#define INTEL_ALIGN_DTW_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "intel_align/distance.hpp"
#include "intel_align/error.hpp"
#include "intel_align/feature_io.hpp"

namespace intel_align {

/// One cell of an alignment path, 1-based: x indexes teacher frames,
/// y indexes learner frames.
struct PathStep {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct AlignmentResult {
  double accumulated_cost = 0.0;
  std::vector<PathStep> path;
  double normalized_distance = 0.0;  // accumulated_cost / path.size()
  DistanceKind cost_kind = DistanceKind::cd;
};

enum class Normalization { path_length, raw };

inline std::string_view to_string(Normalization n) {
  return n == Normalization::path_length ? "path_length" : "raw";
}

namespace detail {

enum Move : std::uint8_t { kStart = 0, kDiagonal = 1, kTeacherStep = 2, kLearnerStep = 3 };

template <typename T, typename L>
void check_sequences(const Eigen::MatrixBase<T>& teacher, const Eigen::MatrixBase<L>& learner) {
  if (teacher.rows() < 1 || learner.rows() < 1) throw DomainError("sequences need at least one frame");
  if (teacher.cols() < 1 || teacher.cols() != learner.cols()) {
    throw DimensionError("teacher and learner dimensions differ (" + std::to_string(teacher.cols()) +
                         " vs " + std::to_string(learner.cols()) + ")");
  }
}

// Predecessor choice for the recurrence. Ties prefer the diagonal, then
// (x-1, y), then (x, y-1).
inline std::pair<double, Move> best_predecessor(double diag, double up, double left) {
  double best = diag;
  Move move = kDiagonal;
  if (up < best) {
    best = up;
    move = kTeacherStep;
  }
  if (left < best) {
    best = left;
    move = kLearnerStep;
  }
  return {best, move};
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace detail

/// Full DTW with backtracking. Memory: X*Y one-byte backpointers plus two
/// cost rows of length Y. Local costs are evaluated on demand.
template <typename T, typename L>
AlignmentResult dtw(const Eigen::MatrixBase<T>& teacher, const Eigen::MatrixBase<L>& learner,
                    DistanceKind kind) {
  detail::check_sequences(teacher, learner);
  if (!teacher.allFinite() || !learner.allFinite()) throw DomainError("non-finite frame values");

  const Eigen::Index X = teacher.rows();
  const Eigen::Index Y = learner.rows();
  std::vector<std::uint8_t> back(static_cast<std::size_t>(X * Y));
  std::vector<double> prev(static_cast<std::size_t>(Y), detail::kInf);
  std::vector<double> cur(static_cast<std::size_t>(Y), detail::kInf);

  for (Eigen::Index x = 0; x < X; ++x) {
    for (Eigen::Index y = 0; y < Y; ++y) {
      const double c = detail::frame_cost(kind, teacher.row(x), learner.row(y));
      const auto idx = static_cast<std::size_t>(x * Y + y);
      if (x == 0 && y == 0) {
        cur[0] = c;
        back[idx] = detail::kStart;
        continue;
      }
      const double diag = (x > 0 && y > 0) ? prev[static_cast<std::size_t>(y - 1)] : detail::kInf;
      const double up = x > 0 ? prev[static_cast<std::size_t>(y)] : detail::kInf;
      const double left = y > 0 ? cur[static_cast<std::size_t>(y - 1)] : detail::kInf;
      const auto [best, move] = detail::best_predecessor(diag, up, left);
      cur[static_cast<std::size_t>(y)] = best + c;
      back[idx] = move;
    }
    std::swap(prev, cur);
  }

  AlignmentResult result;
  result.cost_kind = kind;
  result.accumulated_cost = prev[static_cast<std::size_t>(Y - 1)];

  Eigen::Index x = X - 1, y = Y - 1;
  while (true) {
    result.path.push_back({static_cast<std::uint32_t>(x + 1), static_cast<std::uint32_t>(y + 1)});
    const auto move = back[static_cast<std::size_t>(x * Y + y)];
    if (move == detail::kStart) break;
    if (move != detail::kLearnerStep) --x;
    if (move != detail::kTeacherStep) --y;
  }
  std::reverse(result.path.begin(), result.path.end());
  result.normalized_distance = result.accumulated_cost / static_cast<double>(result.path.size());
  return result;
}

inline AlignmentResult dtw(const FeatureSequence& teacher, const FeatureSequence& learner,
                           DistanceKind kind) {
  return dtw(teacher.data(), learner.data(), kind);
}

/// Accumulated cost only, with O(min(X, Y)) rolling storage. The frame
/// costs are symmetric, so the shorter sequence is put on the inner axis.
template <typename T, typename L>
double dtw_cost(const Eigen::MatrixBase<T>& teacher, const Eigen::MatrixBase<L>& learner,
                DistanceKind kind) {
  detail::check_sequences(teacher, learner);
  if (!teacher.allFinite() || !learner.allFinite()) throw DomainError("non-finite frame values");
  if (learner.rows() > teacher.rows()) return dtw_cost(learner, teacher, kind);

  const Eigen::Index X = teacher.rows();
  const Eigen::Index Y = learner.rows();
  std::vector<double> prev(static_cast<std::size_t>(Y), detail::kInf);
  std::vector<double> cur(static_cast<std::size_t>(Y), detail::kInf);
  for (Eigen::Index x = 0; x < X; ++x) {
    for (Eigen::Index y = 0; y < Y; ++y) {
      const double c = detail::frame_cost(kind, teacher.row(x), learner.row(y));
      if (x == 0 && y == 0) {
        cur[0] = c;
        continue;
      }
      const double diag = (x > 0 && y > 0) ? prev[static_cast<std::size_t>(y - 1)] : detail::kInf;
      const double up = x > 0 ? prev[static_cast<std::size_t>(y)] : detail::kInf;
      const double left = y > 0 ? cur[static_cast<std::size_t>(y - 1)] : detail::kInf;
      cur[static_cast<std::size_t>(y)] = detail::best_predecessor(diag, up, left).first + c;
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<std::size_t>(Y - 1)];
}

/// Accumulated cost and path length of the tie-broken optimal path,
/// without storing backpointers. Agrees exactly with dtw().
template <typename T, typename L>
std::pair<double, std::size_t> dtw_cost_and_length(const Eigen::MatrixBase<T>& teacher,
                                                   const Eigen::MatrixBase<L>& learner,
                                                   DistanceKind kind) {
  detail::check_sequences(teacher, learner);
  if (!teacher.allFinite() || !learner.allFinite()) throw DomainError("non-finite frame values");

  const Eigen::Index X = teacher.rows();
  const Eigen::Index Y = learner.rows();
  const auto n = static_cast<std::size_t>(Y);
  std::vector<double> prev(n, detail::kInf), cur(n, detail::kInf);
  std::vector<std::size_t> prev_len(n, 0), cur_len(n, 0);
  for (Eigen::Index x = 0; x < X; ++x) {
    for (Eigen::Index y = 0; y < Y; ++y) {
      const auto j = static_cast<std::size_t>(y);
      const double c = detail::frame_cost(kind, teacher.row(x), learner.row(y));
      if (x == 0 && y == 0) {
        cur[0] = c;
        cur_len[0] = 1;
        continue;
      }
      const double diag = (x > 0 && y > 0) ? prev[j - 1] : detail::kInf;
      const double up = x > 0 ? prev[j] : detail::kInf;
      const double left = y > 0 ? cur[j - 1] : detail::kInf;
      const auto [best, move] = detail::best_predecessor(diag, up, left);
      cur[j] = best + c;
      switch (move) {
        case detail::kDiagonal: cur_len[j] = prev_len[j - 1] + 1; break;
        case detail::kTeacherStep: cur_len[j] = prev_len[j] + 1; break;
        default: cur_len[j] = cur_len[j - 1] + 1; break;
      }
    }
    std::swap(prev, cur);
    std::swap(prev_len, cur_len);
  }
  return {prev[n - 1], prev_len[n - 1]};
}

/// Utterance-level alignment distance between a teacher and a learner.
inline double score_pair(const FeatureSequence& teacher, const FeatureSequence& learner,
                         DistanceKind kind, Normalization normalization = Normalization::path_length) {
  if (normalization == Normalization::raw) return dtw_cost(teacher.data(), learner.data(), kind);
  const auto [cost, length] = dtw_cost_and_length(teacher.data(), learner.data(), kind);
  return cost / static_cast<double>(length);
}

}  // namespace intel_align

#endif  // INTEL_ALIGN_DTW_HPP
