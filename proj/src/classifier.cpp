#include "intel_align/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "intel_align/random.hpp"
#include "intel_align/text.hpp"

namespace intel_align {

std::vector<Classified> classify(std::span<const PairScore> scores, double threshold) {
  if (std::isnan(threshold)) throw DomainError("threshold is NaN");
  std::vector<Classified> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back({s, decide(s.score, threshold)});
  return out;
}

std::vector<Prediction> predictions_of(std::span<const Classified> classified) {
  std::vector<Prediction> out;
  out.reserve(classified.size());
  for (const auto& c : classified) out.push_back({c.predicted, c.item.label});
  return out;
}

double accuracy(std::span<const Prediction> predictions) {
  if (predictions.empty()) throw DomainError("accuracy of an empty prediction set");
  std::size_t correct = 0;
  for (const auto& p : predictions) correct += p.predicted == p.actual;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

std::map<std::string, double> per_category_accuracy(std::span<const Classified> classified) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // correct, total
  for (const auto& c : classified) {
    // A category listed twice on one item still counts once.
    const std::set<std::string> cats(c.item.phoneme_categories.begin(),
                                     c.item.phoneme_categories.end());
    for (const auto& cat : cats) {
      auto& [correct, total] = counts[cat];
      correct += c.predicted == c.item.label;
      ++total;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [cat, ct] : counts) {
    out[cat] = 100.0 * static_cast<double>(ct.first) / static_cast<double>(ct.second);
  }
  return out;
}

double baseline_mcv(std::span<const PairScore> test, Label majority) {
  if (test.empty()) throw DomainError("MCV baseline on an empty test set");
  std::size_t hits = 0;
  for (const auto& s : test) hits += s.label == majority;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(test.size());
}

std::vector<Label> random_labels(std::size_t n, double p_intelligible, std::uint64_t seed) {
  if (!(p_intelligible >= 0.0 && p_intelligible <= 1.0)) {
    throw DomainError("RS probability must lie in [0, 1]");
  }
  Xorshift64Star rng(seed);
  std::vector<Label> out(n);
  for (auto& l : out) l = rng.bernoulli(p_intelligible) ? Label::intelligible : Label::non_intelligible;
  return out;
}

double baseline_rs(std::span<const PairScore> test, double p_intelligible, std::uint64_t seed) {
  if (test.empty()) throw DomainError("RS baseline on an empty test set");
  const auto draws = random_labels(test.size(), p_intelligible, seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) hits += draws[i] == test[i].label;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(test.size());
}

double baseline_rs_expected(std::span<const PairScore> test, double p_intelligible) {
  if (test.empty()) throw DomainError("RS baseline on an empty test set");
  if (!(p_intelligible >= 0.0 && p_intelligible <= 1.0)) {
    throw DomainError("RS probability must lie in [0, 1]");
  }
  const double q = baseline_mcv(test, Label::intelligible) / 100.0;
  return 100.0 * (p_intelligible * q + (1.0 - p_intelligible) * (1.0 - q));
}

Confusion confusion_of(std::span<const Classified> classified) {
  Confusion c;
  for (const auto& x : classified) {
    const bool actual = x.item.label == Label::intelligible;
    const bool predicted = x.predicted == Label::intelligible;
    if (actual && predicted) ++c.tp;
    else if (!actual && !predicted) ++c.tn;
    else if (predicted) ++c.fp;
    else ++c.fn;
  }
  return c;
}

ClassificationReport build_report(std::span<const PairScore> test, double threshold,
                                  DistanceKind distance, Normalization normalization,
                                  RateMode rate_mode, double p_intelligible, std::uint64_t rs_seed) {
  if (test.empty()) throw DomainError("empty test set");
  ClassificationReport r;
  r.distance = distance;
  r.normalization = normalization;
  r.rate_mode = rate_mode;
  r.threshold = threshold;
  r.n_test = test.size();
  r.verdicts = classify(test, threshold);
  r.confusion = confusion_of(r.verdicts);
  r.overall_accuracy = accuracy(predictions_of(r.verdicts));
  r.per_category_accuracy = per_category_accuracy(r.verdicts);
  r.rs_p_intelligible = p_intelligible;
  r.rs_seed = rs_seed;
  r.baselines.mcv = baseline_mcv(test, Label::intelligible);
  r.baselines.rs = baseline_rs(test, p_intelligible, rs_seed);
  r.rs_expected = baseline_rs_expected(test, p_intelligible);

  // Per-category baselines reuse the same realisation restricted to each category.
  const auto draws = random_labels(test.size(), p_intelligible, rs_seed);
  std::vector<Classified> mcv, rs;
  for (std::size_t i = 0; i < test.size(); ++i) {
    mcv.push_back({test[i], Label::intelligible});
    rs.push_back({test[i], draws[i]});
  }
  const auto mcv_cat = per_category_accuracy(mcv);
  const auto rs_cat = per_category_accuracy(rs);
  for (const auto& [cat, acc] : mcv_cat) r.per_category_baselines[cat] = {acc, rs_cat.at(cat)};
  return r;
}

namespace {

using ojson = nlohmann::ordered_json;

std::string column_name(DistanceKind k) {
  std::string s(to_string(k));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

// Category rows in taxonomy order, then any others alphabetically.
std::vector<std::string> category_rows(std::span<const ClassificationReport> reports) {
  std::set<std::string> present;
  for (const auto& r : reports) {
    for (const auto& [cat, _] : r.per_category_accuracy) present.insert(cat);
  }
  std::vector<std::string> rows;
  for (auto cat : kPhonemeCategories) {
    if (present.erase(std::string(cat))) rows.emplace_back(cat);
  }
  rows.insert(rows.end(), present.begin(), present.end());
  return rows;
}

}  // namespace

std::string format_report_json(std::span<const ClassificationReport> reports,
                               std::uint64_t corpus_hash) {
  ojson j;
  j["corpus_hash"] = hash_hex(corpus_hash);
  auto arr = ojson::array();
  for (const auto& r : reports) {
    ojson o;
    o["distance"] = std::string(to_string(r.distance));
    o["normalization"] = std::string(to_string(r.normalization));
    o["rate_mode"] = std::string(to_string(r.rate_mode));
    if (std::isfinite(r.threshold)) o["threshold"] = r.threshold;
    else o["threshold"] = format_double(r.threshold);
    o["n_test"] = r.n_test;
    o["confusion"] = {{"tp", r.confusion.tp}, {"tn", r.confusion.tn},
                      {"fp", r.confusion.fp}, {"fn", r.confusion.fn}};
    o["overall_accuracy"] = r.overall_accuracy;
    ojson cats = ojson::object();
    for (const auto& [cat, acc] : r.per_category_accuracy) cats[cat] = acc;
    o["per_category_accuracy"] = std::move(cats);
    o["baselines"] = {{"mcv", r.baselines.mcv}, {"rs", r.baselines.rs}};
    ojson cat_base = ojson::object();
    for (const auto& [cat, b] : r.per_category_baselines) cat_base[cat] = {{"mcv", b.mcv}, {"rs", b.rs}};
    o["per_category_baselines"] = std::move(cat_base);
    o["rs_expected"] = r.rs_expected;
    o["rs_p_intelligible"] = r.rs_p_intelligible;
    o["rs_seed"] = r.rs_seed;
    arr.push_back(std::move(o));
  }
  j["reports"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string format_report_table(std::span<const ClassificationReport> reports) {
  if (reports.empty()) return {};
  // Paper column order: CD, MAE, MSE.
  std::vector<const ClassificationReport*> cols;
  for (auto k : kAllDistanceKinds) {
    for (const auto& r : reports) {
      if (r.distance == k) cols.push_back(&r);
    }
  }
  const auto& base = *cols.front();
  std::ostringstream os;
  os << "Classification accuracy (%)  rate_mode=" << to_string(base.rate_mode)
     << "  normalization=" << to_string(base.normalization) << "  n_test=" << base.n_test << "\n";
  for (const auto* r : cols) os << std::setw(9) << column_name(r->distance);
  os << std::setw(9) << "MCV" << std::setw(9) << "RS" << "\n";
  for (const auto* r : cols) os << std::setw(9) << format_fixed(r->overall_accuracy, 2);
  os << std::setw(9) << format_fixed(base.baselines.mcv, 2) << std::setw(9)
     << format_fixed(base.baselines.rs, 2) << "\n";
  os << "RS expectation " << format_fixed(base.rs_expected, 2) << " (p="
     << format_fixed(base.rs_p_intelligible, 4) << ", seed=" << base.rs_seed << ")\n";
  for (const auto* r : cols) {
    os << "threshold[" << to_string(r->distance) << "] = " << format_double(r->threshold) << "\n";
  }

  const auto rows = category_rows(reports);
  if (!rows.empty()) {
    os << "\nPer-category accuracy (%)\n" << std::left << std::setw(20) << "Phoneme Category"
       << std::right;
    for (const auto* r : cols) os << std::setw(9) << column_name(r->distance);
    os << std::setw(9) << "MCV" << std::setw(9) << "RS" << "\n";
    for (const auto& cat : rows) {
      os << std::left << std::setw(20) << cat << std::right;
      for (const auto* r : cols) {
        const auto it = r->per_category_accuracy.find(cat);
        os << std::setw(9) << (it == r->per_category_accuracy.end() ? "-" : format_fixed(it->second, 2));
      }
      const auto it = base.per_category_baselines.find(cat);
      if (it == base.per_category_baselines.end()) {
        os << std::setw(9) << "-" << std::setw(9) << "-";
      } else {
        os << std::setw(9) << format_fixed(it->second.mcv, 2) << std::setw(9)
           << format_fixed(it->second.rs, 2);
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string format_verdicts_csv(const ClassificationReport& report) {
  std::string out = "stimulus_id,learner_id,score,label,predicted\n";
  for (const auto& v : report.verdicts) {
    out += csv_field(v.item.stimulus_id) + ',' + csv_field(v.item.learner_id) + ',' +
           format_double(v.item.score) + ',' + (v.item.label == Label::intelligible ? "1" : "0") +
           ',' + (v.predicted == Label::intelligible ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace intel_align
