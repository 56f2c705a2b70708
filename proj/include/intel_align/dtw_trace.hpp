#ifndef INTEL_ALIGN_DTW_TRACE_HPP
#define INTEL_ALIGN_DTW_TRACE_HPP

#include <string>
#include <string_view>

#include "intel_align/dtw.hpp"

namespace intel_align {

/// JSON object with `pairs` ([[x, y], ...], 1-based), `accumulated_cost`,
/// `normalized_distance`, `cost_kind` and `index_base` (always 1).
std::string trace_to_json(const AlignmentResult& alignment);
AlignmentResult trace_from_json(std::string_view text);

}  // namespace intel_align

#endif  // INTEL_ALIGN_DTW_TRACE_HPP
