#include "intel_align/dtw_trace.hpp"

#include <json.hpp>

namespace intel_align {

namespace {
using ojson = nlohmann::ordered_json;
}

std::string trace_to_json(const AlignmentResult& alignment) {
  ojson j;
  j["index_base"] = 1;
  j["cost_kind"] = std::string(to_string(alignment.cost_kind));
  j["accumulated_cost"] = alignment.accumulated_cost;
  j["normalized_distance"] = alignment.normalized_distance;
  auto pairs = ojson::array();
  for (const auto& s : alignment.path) pairs.push_back({s.x, s.y});
  j["pairs"] = std::move(pairs);
  return j.dump(2);
}

AlignmentResult trace_from_json(std::string_view text) {
  const auto j = ojson::parse(text);
  if (j.value("index_base", 1) != 1) throw Error("trace must use 1-based indices");
  AlignmentResult r;
  const auto kind = parse_distance_kind(j.at("cost_kind").get<std::string>());
  if (!kind) throw Error("unknown cost_kind in trace");
  r.cost_kind = *kind;
  r.accumulated_cost = j.at("accumulated_cost").get<double>();
  r.normalized_distance = j.at("normalized_distance").get<double>();
  for (const auto& p : j.at("pairs")) {
    r.path.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
  }
  if (r.path.empty()) throw Error("trace has an empty path");
  return r;
}

}  // namespace intel_align
