#include <doctest.h>

#include "intel_align/classifier.hpp"
#include "intel_align/random.hpp"

using namespace intel_align;

namespace {

PairScore item(double score, Label label, std::vector<std::string> cats = {}) {
  PairScore s;
  s.stimulus_id = "S";
  s.learner_id = "L";
  s.score = score;
  s.label = label;
  s.phoneme_categories = std::move(cats);
  return s;
}

std::vector<PairScore> with_fraction(std::size_t n_intel, std::size_t n) {
  std::vector<PairScore> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(item(1.0, i < n_intel ? Label::intelligible : Label::non_intelligible));
  }
  return out;
}

}  // namespace

TEST_CASE("decision rule") {
  const std::vector<PairScore> s{item(0.2, Label::intelligible), item(0.5, Label::intelligible)};
  const auto c = classify(s, 0.5);
  CHECK(c[0].predicted == Label::intelligible);
  CHECK(c[1].predicted == Label::non_intelligible);
}

TEST_CASE("separated fixture classifies perfectly") {
  std::vector<PairScore> s;
  for (int i = 0; i < 20; ++i) s.push_back(item(0.1 + 0.01 * i, Label::intelligible));
  for (int i = 0; i < 5; ++i) s.push_back(item(0.8 + 0.01 * i, Label::non_intelligible));
  const auto c = classify(s, 0.5);
  CHECK(accuracy(predictions_of(c)) == 100.0);
  const auto conf = confusion_of(c);
  CHECK(conf.tp == 20);
  CHECK(conf.tn == 5);
  CHECK(conf.total() == 25);
  // order preserved and idempotent
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(c[i].item == s[i]);
  std::vector<PairScore> again;
  for (const auto& x : c) again.push_back(x.item);
  const auto c2 = classify(again, 0.5);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c2[i].predicted == c[i].predicted);
}

TEST_CASE("accuracy examples") {
  std::vector<Prediction> all(10, {Label::intelligible, Label::intelligible});
  CHECK(accuracy(all) == 100.0);
  std::vector<Prediction> none(10, {Label::intelligible, Label::non_intelligible});
  CHECK(accuracy(none) == 0.0);
  std::vector<Prediction> p(89, {Label::intelligible, Label::intelligible});
  p.resize(100, {Label::non_intelligible, Label::intelligible});
  CHECK(accuracy(p) == 89.0);
  CHECK_THROWS_AS(accuracy(std::vector<Prediction>{}), DomainError);
}

TEST_CASE("per-category accuracy") {
  SUBCASE("single category all correct") {
    const std::vector<PairScore> s{item(0.1, Label::intelligible, {"Vowels"}),
                                   item(0.9, Label::non_intelligible, {"Vowels"})};
    const auto m = per_category_accuracy(classify(s, 0.5));
    REQUIRE(m.size() == 1);
    CHECK(m.at("Vowels") == 100.0);
  }
  SUBCASE("hand-counted fixture with overlapping membership") {
    // tau = 0.5
    // p1 {Vowels, Stops}  0.1 intelligible      -> correct
    // p2 {Vowels}         0.7 intelligible      -> wrong
    // p3 {Stops}          0.3 non-intelligible  -> wrong
    // p4 {Stops}          0.9 non-intelligible  -> correct
    // Vowels: 1/2 = 50%, Stops: 2/3 = 66.67%
    const std::vector<PairScore> s{item(0.1, Label::intelligible, {"Vowels", "Stops"}),
                                   item(0.7, Label::intelligible, {"Vowels"}),
                                   item(0.3, Label::non_intelligible, {"Stops"}),
                                   item(0.9, Label::non_intelligible, {"Stops"})};
    const auto m = per_category_accuracy(classify(s, 0.5));
    REQUIRE(m.size() == 2);
    CHECK(m.at("Vowels") == 50.0);
    CHECK(m.at("Stops") == doctest::Approx(200.0 / 3.0));
  }
}

TEST_CASE("MCV baseline") {
  CHECK(baseline_mcv(with_fraction(2202, 2500)) == doctest::Approx(88.08));
  CHECK(baseline_mcv(with_fraction(10, 10)) == 100.0);
  CHECK(baseline_mcv(with_fraction(60, 100)) == 60.0);
  CHECK_THROWS_AS(baseline_mcv(std::vector<PairScore>{}), DomainError);
}

TEST_CASE("RS baseline") {
  CHECK(baseline_rs(with_fraction(50, 50), 1.0, 3) == 100.0);
  CHECK(baseline_rs(with_fraction(5000, 10000), 0.5, 3) == doctest::Approx(50.0).epsilon(0.05));
  CHECK_THROWS_AS(baseline_rs(with_fraction(5, 10), 1.5, 3), DomainError);
  CHECK(baseline_rs(with_fraction(30, 40), 0.7, 11) == baseline_rs(with_fraction(30, 40), 0.7, 11));

  // p = q = 0.8808: p^2 + (1-p)^2 = 0.77580864 + 0.01420864
  const auto q = with_fraction(8808, 10000);
  CHECK(baseline_rs_expected(q, 0.8808) == doctest::Approx(79.001728).epsilon(1e-12));
}

TEST_CASE("RS baseline mean over seeds approaches the closed form") {
  const auto test = with_fraction(880, 1000);
  const double expected = baseline_rs_expected(test, 0.88);
  double sum = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) sum += baseline_rs(test, 0.88, seed);
  CHECK(std::abs(sum / 1000 - expected) < 1.0);
}

TEST_CASE("degenerate thresholds and monotone response") {
  std::vector<PairScore> s;
  Xorshift64Star rng(4);
  std::size_t n_intel = 0;
  for (int i = 0; i < 200; ++i) {
    const bool intel = rng.bernoulli(0.8);
    n_intel += intel;
    s.push_back(item(rng.uniform(), intel ? Label::intelligible : Label::non_intelligible));
  }
  const double intel_pct = 100.0 * n_intel / 200.0;
  CHECK(accuracy(predictions_of(classify(s, -1.0))) == doctest::Approx(100.0 - intel_pct));
  CHECK(accuracy(predictions_of(classify(s, 2.0))) == doctest::Approx(intel_pct));

  std::size_t last_tp = 0, last_tn = 1000;
  for (double tau = -0.1; tau <= 1.1; tau += 0.01) {
    const auto c = confusion_of(classify(s, tau));
    CHECK(c.total() == 200);
    CHECK(c.tp >= last_tp);
    CHECK(c.tn <= last_tn);
    last_tp = c.tp;
    last_tn = c.tn;
  }
}

TEST_CASE("report invariants and formats") {
  std::vector<PairScore> s{item(0.1, Label::intelligible, {"Vowels"}),
                           item(0.2, Label::intelligible, {"Stops"}),
                           item(0.6, Label::intelligible, {"Vowels"}),
                           item(0.9, Label::non_intelligible, {"Nasals"})};
  const auto r = build_report(s, 0.5, DistanceKind::cd, Normalization::path_length,
                              RateMode::class_conditional, 0.75, 5);
  CHECK(r.n_test == 4);
  CHECK(r.confusion.total() == r.n_test);
  CHECK(r.overall_accuracy == doctest::Approx(100.0 * (r.confusion.tp + r.confusion.tn) / r.n_test));
  CHECK(r.overall_accuracy == 75.0);
  CHECK(r.baselines.mcv == 75.0);
  CHECK(r.per_category_baselines.at("Vowels").mcv == 100.0);

  std::vector<ClassificationReport> reports{r};
  auto mae = r;
  mae.distance = DistanceKind::mae;
  auto mse = r;
  mse.distance = DistanceKind::mse;
  reports.push_back(mse);
  reports.push_back(mae);
  const auto table = format_report_table(reports);
  const auto header = table.substr(table.find('\n') + 1, table.find('\n', table.find('\n') + 1) - table.find('\n') - 1);
  CHECK(header.find("CD") < header.find("MAE"));
  CHECK(header.find("MAE") < header.find("MSE"));
  CHECK(header.find("MSE") < header.find("MCV"));
  CHECK(header.find("MCV") < header.find("RS"));
  CHECK(table.find("Stops") < table.find("Vowels"));  // taxonomy order
  const auto json = format_report_json(reports, 0xabc);
  CHECK(json.find("\"overall_accuracy\": 75.0") != std::string::npos);
  CHECK(json.find("\"rs_seed\": 5") != std::string::npos);
}
