#ifndef INTEL_ALIGN_DISTANCE_HPP
#define INTEL_ALIGN_DISTANCE_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "intel_align/error.hpp"

namespace intel_align {

/// Frame-level cost used inside the alignment recurrence.
enum class DistanceKind { mae, mse, cd };

inline constexpr DistanceKind kAllDistanceKinds[] = {DistanceKind::cd, DistanceKind::mae,
                                                     DistanceKind::mse};

inline std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::mae: return "mae";
    case DistanceKind::mse: return "mse";
    case DistanceKind::cd: return "cd";
  }
  return "?";
}

inline std::optional<DistanceKind> parse_distance_kind(std::string_view s) {
  if (s == "mae") return DistanceKind::mae;
  if (s == "mse") return DistanceKind::mse;
  if (s == "cd") return DistanceKind::cd;
  return std::nullopt;
}

/// Norms below this are treated as zero by cosine_distance.
inline constexpr double kZeroNorm = 1e-12;

namespace detail {

// The kernels below read both operands coefficient-wise, widen to double and
// sum strictly left to right. They assume equal sizes and finite entries.

template <typename A, typename B>
double mae_kernel(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const Eigen::Index n = a.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += std::abs(static_cast<double>(a.coeff(i)) - static_cast<double>(b.coeff(i)));
  }
  return sum / static_cast<double>(n);
}

template <typename A, typename B>
double mse_kernel(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const Eigen::Index n = a.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(a.coeff(i)) - static_cast<double>(b.coeff(i));
    sum += d * d;
  }
  return sum / static_cast<double>(n);
}

template <typename A, typename B>
double cd_kernel(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const Eigen::Index n = a.size();
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = static_cast<double>(a.coeff(i));
    const double y = static_cast<double>(b.coeff(i));
    dot += x * y;
    aa += x * x;
    bb += y * y;
  }
  const double na = std::sqrt(aa);
  const double nb = std::sqrt(bb);
  if (na < kZeroNorm || nb < kZeroNorm) return 1.0;
  return std::clamp(1.0 - dot / (na * nb), 0.0, 2.0);
}

template <typename A, typename B>
double frame_cost(DistanceKind kind, const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  switch (kind) {
    case DistanceKind::mae: return mae_kernel(a, b);
    case DistanceKind::mse: return mse_kernel(a, b);
    case DistanceKind::cd: return cd_kernel(a, b);
  }
  return 0.0;
}

template <typename A, typename B>
void check_operands(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.size() < 1 || a.size() != b.size()) {
    throw DimensionError("frame vectors must have equal nonzero dimension (got " +
                         std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
  if (!a.allFinite() || !b.allFinite()) throw DomainError("frame vector contains non-finite values");
}

}  // namespace detail

/// Mean absolute difference (1/N) sum |a_i - b_i|.
template <typename A, typename B>
double mae(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::check_operands(a, b);
  return detail::mae_kernel(a, b);
}

/// Mean squared difference (1/N) sum (a_i - b_i)^2.
template <typename A, typename B>
double mse(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::check_operands(a, b);
  return detail::mse_kernel(a, b);
}

/// 1 - cos(a, b), clamped to [0, 2]. Returns 1 when either vector has
/// (near) zero norm, e.g. silence frames.
template <typename A, typename B>
double cosine_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::check_operands(a, b);
  return detail::cd_kernel(a, b);
}

template <typename A, typename B>
double distance(DistanceKind kind, const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::check_operands(a, b);
  return detail::frame_cost(kind, a, b);
}

}  // namespace intel_align

#endif  // INTEL_ALIGN_DISTANCE_HPP
