#ifndef INTEL_ALIGN_TEXT_HPP
#define INTEL_ALIGN_TEXT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace intel_align {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);
/// Fixed-point with `digits` decimals, for human-readable tables.
std::string format_fixed(double v, int digits);
double parse_double(std::string_view s);

/// Quotes a CSV field only when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);
std::vector<std::string> split_csv_line(std::string_view line);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace intel_align

#endif  // INTEL_ALIGN_TEXT_HPP
