#include "intel_align/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "intel_align/random.hpp"
#include "intel_align/text.hpp"

namespace intel_align {

std::string_view to_string(RateMode mode) {
  return mode == RateMode::paper ? "paper" : "class_conditional";
}

std::optional<RateMode> parse_rate_mode(std::string_view s) {
  if (s == "paper") return RateMode::paper;
  if (s == "class" || s == "class_conditional") return RateMode::class_conditional;
  return std::nullopt;
}

namespace {

struct ErrorCounts {
  std::size_t false_accepts = 0;
  std::size_t false_rejects = 0;
  std::size_t intelligible = 0;
  std::size_t non_intelligible = 0;
  std::size_t total() const { return intelligible + non_intelligible; }
};

ErrorCounts count_errors(std::span<const Prediction> predictions) {
  ErrorCounts c;
  for (const auto& p : predictions) {
    if (p.actual == Label::intelligible) {
      ++c.intelligible;
      if (p.predicted == Label::non_intelligible) ++c.false_rejects;
    } else {
      ++c.non_intelligible;
      if (p.predicted == Label::intelligible) ++c.false_accepts;
    }
  }
  return c;
}

double rate(std::size_t errors, std::size_t denominator) {
  return static_cast<double>(errors) / static_cast<double>(denominator);
}

}  // namespace

double far(std::span<const Prediction> predictions, RateMode mode) {
  if (predictions.empty()) throw DomainError("FAR of an empty prediction set");
  const auto c = count_errors(predictions);
  if (mode == RateMode::paper) return rate(c.false_accepts, c.total());
  if (c.non_intelligible == 0) throw DomainError("class-conditional FAR needs non-intelligible items");
  return rate(c.false_accepts, c.non_intelligible);
}

double frr(std::span<const Prediction> predictions, RateMode mode) {
  if (predictions.empty()) throw DomainError("FRR of an empty prediction set");
  const auto c = count_errors(predictions);
  if (mode == RateMode::paper) return rate(c.false_rejects, c.total());
  if (c.intelligible == 0) throw DomainError("class-conditional FRR needs intelligible items");
  return rate(c.false_rejects, c.intelligible);
}

Split split(std::span<const PairScore> scores, double calibration_fraction, std::uint64_t seed,
            bool stratified) {
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    throw DomainError("calibration fraction must lie in (0, 1)");
  }
  if (scores.empty()) throw DomainError("cannot split an empty score list");
  const std::size_t n = scores.size();
  const auto k = static_cast<std::size_t>(std::llround(calibration_fraction * static_cast<double>(n)));
  if (k == 0 || k == n) {
    throw DomainError("calibration fraction " + format_double(calibration_fraction) + " of " +
                      std::to_string(n) + " items leaves an empty partition");
  }

  Xorshift64Star rng(seed);
  std::vector<std::size_t> chosen;
  if (!stratified) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    // Largest-remainder apportionment of k across the two classes.
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < n; ++i) {
      by_class[scores[i].label == Label::intelligible ? 0 : 1].push_back(i);
    }
    std::size_t quota[2];
    double remainder[2];
    for (int c = 0; c < 2; ++c) {
      const double exact = calibration_fraction * static_cast<double>(by_class[c].size());
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      remainder[c] = exact - static_cast<double>(quota[c]);
    }
    std::size_t left = k - quota[0] - quota[1];
    const int first = remainder[1] > remainder[0] ? 1 : 0;
    for (int c : {first, 1 - first}) {
      if (left > 0 && quota[c] < by_class[c].size()) {
        ++quota[c];
        --left;
      }
    }
    for (int c = 0; c < 2; ++c) {
      rng.shuffle(by_class[c]);
      chosen.insert(chosen.end(), by_class[c].begin(),
                    by_class[c].begin() + static_cast<std::ptrdiff_t>(quota[c]));
    }
  }
  std::sort(chosen.begin(), chosen.end());

  Split out;
  out.calibration_indices = chosen;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next < chosen.size() && chosen[next] == i) {
      out.calibration.push_back(scores[i]);
      ++next;
    } else {
      out.test.push_back(scores[i]);
    }
  }
  return out;
}

std::vector<double> candidate_thresholds(std::span<const PairScore> scores) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.score);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> candidates;
  candidates.reserve(values.size() + 1);
  candidates.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 1; i < values.size(); ++i) {
    candidates.push_back((values[i - 1] + values[i]) / 2.0);
  }
  candidates.push_back(std::numeric_limits<double>::infinity());
  return candidates;
}

CalibrationResult calibrate_threshold(std::span<const PairScore> calibration, RateMode mode) {
  std::vector<double> intel, non;
  for (const auto& s : calibration) {
    if (!std::isfinite(s.score)) throw DomainError("non-finite score for " + s.stimulus_id);
    (s.label == Label::intelligible ? intel : non).push_back(s.score);
  }
  if (intel.empty() || non.empty()) {
    throw DomainError("calibration set must contain both intelligible and non-intelligible items");
  }
  std::sort(intel.begin(), intel.end());
  std::sort(non.begin(), non.end());
  const std::size_t total = calibration.size();
  const std::size_t far_den = mode == RateMode::paper ? total : non.size();
  const std::size_t frr_den = mode == RateMode::paper ? total : intel.size();

  CalibrationResult best;
  best.rate_mode = mode;
  best.calibration_size = total;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_sum = std::numeric_limits<double>::infinity();

  // Candidates ascend, so "scores < tau" counts only grow.
  std::size_t accepted_non = 0, accepted_intel = 0;
  for (const double tau : candidate_thresholds(calibration)) {
    while (accepted_non < non.size() && non[accepted_non] < tau) ++accepted_non;
    while (accepted_intel < intel.size() && intel[accepted_intel] < tau) ++accepted_intel;
    const double fa = rate(accepted_non, far_den);
    const double fr = rate(intel.size() - accepted_intel, frr_den);
    const double gap = std::abs(fa - fr);
    const double sum = fa + fr;
    if (gap < best_gap || (gap == best_gap && sum < best_sum)) {
      best_gap = gap;
      best_sum = sum;
      best.threshold = tau;
      best.far = fa;
      best.frr = fr;
    }
  }
  best.eer = (best.far + best.frr) / 2.0;
  return best;
}

// ---- files -------------------------------------------------------------

namespace {

constexpr std::string_view kScoresHeader =
    "stimulus_id,learner_id,score,label,phoneme_categories,phone_count";

std::optional<Normalization> parse_normalization(std::string_view s) {
  if (s == "path_length" || s == "path") return Normalization::path_length;
  if (s == "raw") return Normalization::raw;
  return std::nullopt;
}

std::uint64_t parse_hash(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != s.size()) throw Error("bad corpus hash '" + s + "'");
  return v;
}

nlohmann::ordered_json number_or_text(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double number_from(const nlohmann::ordered_json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

std::string format_scores(const ScoresFile& file) {
  std::string out = "# corpus_hash=" + hash_hex(file.meta.corpus_hash) +
                    ";distance=" + std::string(to_string(file.meta.distance)) +
                    ";normalization=" + std::string(to_string(file.meta.normalization)) + "\n";
  out += kScoresHeader;
  out += '\n';
  for (const auto& s : file.scores) {
    out += csv_field(s.stimulus_id) + ',' + csv_field(s.learner_id) + ',' + format_double(s.score) +
           ',' + (s.label == Label::intelligible ? "1" : "0") + ',' +
           csv_field(join(s.phoneme_categories, ";")) + ',' +
           (s.phone_count ? std::to_string(*s.phone_count) : std::string()) + '\n';
  }
  return out;
}

ScoresFile parse_scores(std::string_view text) {
  ScoresFile file;
  bool have_meta = false, have_header = false;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& kv : split(std::string_view(line).substr(1), ';')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string key = kv.substr(0, eq);
        key.erase(0, key.find_first_not_of(' '));
        const std::string value = kv.substr(eq + 1);
        if (key == "corpus_hash") {
          file.meta.corpus_hash = parse_hash(value);
          have_meta = true;
        } else if (key == "distance") {
          const auto k = parse_distance_kind(value);
          if (!k) throw Error("unknown distance '" + value + "' in scores file");
          file.meta.distance = *k;
        } else if (key == "normalization") {
          const auto n = parse_normalization(value);
          if (!n) throw Error("unknown normalization '" + value + "' in scores file");
          file.meta.normalization = *n;
        }
      }
      continue;
    }
    if (!have_header) {
      if (line != kScoresHeader) throw Error("unexpected scores header: " + line);
      have_header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 6) {
      throw Error("scores line " + std::to_string(line_no) + ": expected 6 fields, got " +
                  std::to_string(f.size()));
    }
    PairScore s;
    s.stimulus_id = f[0];
    s.learner_id = f[1];
    s.score = parse_double(f[2]);
    if (!std::isfinite(s.score) || s.score < 0.0) {
      throw Error("scores line " + std::to_string(line_no) + ": score must be finite and >= 0");
    }
    if (f[3] == "1") {
      s.label = Label::intelligible;
    } else if (f[3] == "0") {
      s.label = Label::non_intelligible;
    } else {
      throw Error("scores line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    s.phoneme_categories = split(f[4], ';');
    if (!f[5].empty()) s.phone_count = static_cast<std::uint32_t>(std::stoul(f[5]));
    file.scores.push_back(std::move(s));
  }
  if (!have_meta) throw Error("scores file lacks the corpus_hash metadata line");
  if (!have_header) throw Error("scores file lacks a header row");
  return file;
}

std::string format_calibration(const CalibrationFile& file) {
  nlohmann::ordered_json j;
  j["corpus_hash"] = hash_hex(file.corpus_hash);
  j["distance"] = std::string(to_string(file.distance));
  j["normalization"] = std::string(to_string(file.normalization));
  j["rate_mode"] = std::string(to_string(file.result.rate_mode));
  j["threshold"] = number_or_text(file.result.threshold);
  j["far"] = file.result.far;
  j["frr"] = file.result.frr;
  j["eer"] = file.result.eer;
  j["calibration_fraction"] = file.calibration_fraction;
  j["calibration_size"] = file.result.calibration_size;
  j["seed"] = file.result.seed;
  j["stratified"] = file.stratified;
  auto members = nlohmann::ordered_json::array();
  for (const auto& [stim, learner] : file.members) members.push_back({stim, learner});
  j["calibration_members"] = std::move(members);
  return j.dump(2) + "\n";
}

CalibrationFile parse_calibration(std::string_view text) {
  const auto j = nlohmann::ordered_json::parse(text);
  CalibrationFile f;
  f.corpus_hash = parse_hash(j.at("corpus_hash").get<std::string>());
  const auto kind = parse_distance_kind(j.at("distance").get<std::string>());
  if (!kind) throw Error("unknown distance in calibration file");
  f.distance = *kind;
  const auto norm = parse_normalization(j.at("normalization").get<std::string>());
  if (!norm) throw Error("unknown normalization in calibration file");
  f.normalization = *norm;
  const auto mode = parse_rate_mode(j.at("rate_mode").get<std::string>());
  if (!mode) throw Error("unknown rate_mode in calibration file");
  f.result.rate_mode = *mode;
  f.result.threshold = number_from(j.at("threshold"));
  f.result.far = j.at("far").get<double>();
  f.result.frr = j.at("frr").get<double>();
  f.result.eer = j.at("eer").get<double>();
  f.calibration_fraction = j.at("calibration_fraction").get<double>();
  f.result.calibration_size = j.at("calibration_size").get<std::size_t>();
  f.result.seed = j.at("seed").get<std::uint64_t>();
  f.stratified = j.at("stratified").get<bool>();
  for (const auto& m : j.at("calibration_members")) {
    f.members.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
  }
  return f;
}

}  // namespace intel_align
