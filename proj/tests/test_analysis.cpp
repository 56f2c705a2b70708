#include <doctest.h>

#include "intel_align/analysis.hpp"
#include "intel_align/dtw.hpp"
#include "intel_align/synthetic.hpp"
#include "test_util.hpp"

using namespace intel_align;

namespace {

PairScore item(double score, Label label, std::optional<std::uint32_t> phones = std::nullopt) {
  PairScore s;
  s.stimulus_id = "S";
  s.learner_id = "L";
  s.score = score;
  s.label = label;
  s.phone_count = phones;
  return s;
}

// Piecewise-linear sequence with one segment per phone, like the generator.
FeatureSequence::Matrix trajectory(Xorshift64Star& rng, const std::vector<std::uint32_t>& ends,
                                   Eigen::Index dim) {
  Eigen::MatrixXd anchors(static_cast<Eigen::Index>(ends.size()) + 1, dim);
  for (Eigen::Index i = 0; i < anchors.size(); ++i) anchors.data()[i] = rng.normal();
  FeatureSequence::Matrix m(ends.back(), dim);
  std::uint32_t start = 0;
  for (std::size_t k = 0; k < ends.size(); ++k) {
    for (std::uint32_t f = start; f < ends[k]; ++f) {
      const double t = double(f - start + 1) / (ends[k] - start);
      m.row(f) = ((1 - t) * anchors.row(k) + t * anchors.row(k + 1)).cast<float>();
    }
    start = ends[k];
  }
  return m;
}

std::vector<PhoneBoundary> bounds(const std::vector<std::uint32_t>& ends) {
  std::vector<PhoneBoundary> out;
  for (auto e : ends) out.push_back({"p" + std::to_string(e), e});
  return out;
}

}  // namespace

TEST_CASE("identical scores land in a single bin per class") {
  const std::vector<PairScore> s{item(0.3, Label::intelligible), item(0.3, Label::intelligible),
                                 item(0.3, Label::non_intelligible)};
  const auto h = score_distributions(s, 10);
  CHECK(h.bins() == 10);
  CHECK(h.intelligible[0] == 2);
  CHECK(h.non_intelligible[0] == 1);
  CHECK(std::count(h.intelligible.begin(), h.intelligible.end(), 0u) == 9);
}

TEST_CASE("disjoint classes have zero overlap; counts are conserved") {
  std::vector<PairScore> s;
  for (int i = 0; i < 30; ++i) s.push_back(item(0.1 + 0.01 * i, Label::intelligible));
  for (int i = 0; i < 7; ++i) s.push_back(item(0.9 + 0.01 * i, Label::non_intelligible));
  const auto h = score_distributions(s);
  CHECK(h.bins() == kDefaultHistogramBins);
  CHECK(overlap_coefficient(h) == 0.0);
  std::size_t a = 0, b = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    a += h.intelligible[i];
    b += h.non_intelligible[i];
  }
  CHECK(a == 30);
  CHECK(b == 7);
  CHECK(h.bin_lo(0) == h.lo);
  CHECK(h.bin_hi(h.bins() - 1) == h.hi);
  const auto csv = format_histogram_csv(h);
  CHECK(csv.rfind("bin_lo,bin_hi,intelligible,non_intelligible\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
}

TEST_CASE("histogram errors") {
  CHECK_THROWS_AS(score_distributions(std::vector<PairScore>{}), DomainError);
  CHECK_THROWS_AS(score_distributions(std::vector<PairScore>{item(1, Label::intelligible)}, 1), DomainError);
}

TEST_CASE("phone-length scatter") {
  const std::vector<PairScore> s{item(0.1, Label::intelligible, 2), item(0.2, Label::intelligible, 5),
                                 item(0.3, Label::non_intelligible, 9),
                                 item(0.4, Label::non_intelligible)};
  const auto sc = phone_length_scatter(s);
  REQUIRE(sc.rows.size() == 3);
  CHECK(sc.skipped == 1);
  CHECK(sc.rows[0].phone_count == 2);
  CHECK(sc.rows[1].phone_count == 5);
  CHECK(sc.rows[2].phone_count == 9);
  CHECK(sc.rows.size() + sc.skipped == s.size());
}

TEST_CASE("identity pair: every intersection on the diagonal") {
  Xorshift64Star rng(1);
  const std::vector<std::uint32_t> ends{4, 9, 15, 20};
  const FeatureSequence t(trajectory(rng, ends, 8));
  for (auto kind : kAllDistanceKinds) {
    const auto r = dtw(t, t, kind);
    const auto rows = boundary_intersections(r, bounds(ends), bounds(ends));
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
      CHECK(row.on_path);
      CHECK(row.min_path_distance == 0.0);
    }
  }
}

TEST_CASE("one phone uniformly stretched: intersections stay on the path") {
  Xorshift64Star rng(2);
  const std::vector<std::uint32_t> ends{5, 12, 18, 25};
  const auto tm = trajectory(rng, ends, 8);
  // Stretch phone 2 (frames 5..11) by a factor of 2.
  std::vector<std::uint32_t> src;
  for (std::uint32_t f = 0; f < 25; ++f) {
    src.push_back(f);
    if (f >= 5 && f < 12) src.push_back(f);
  }
  FeatureSequence::Matrix lm(static_cast<Eigen::Index>(src.size()), 8);
  for (std::size_t j = 0; j < src.size(); ++j) lm.row(static_cast<Eigen::Index>(j)) = tm.row(src[j]);
  const std::vector<std::uint32_t> learner_ends{5, 19, 25, 32};
  for (auto kind : kAllDistanceKinds) {
    const auto r = dtw(FeatureSequence(tm), FeatureSequence(lm), kind);
    CHECK(std::abs(r.accumulated_cost) < 1e-12);
    for (const auto& row : boundary_intersections(r, bounds(ends), bounds(learner_ends))) CHECK(row.on_path);
  }
}

TEST_CASE("learner from a different stimulus misses at least one intersection") {
  Xorshift64Star rng(3);
  const std::vector<std::uint32_t> t_ends{3, 10, 14, 22, 30};
  const std::vector<std::uint32_t> l_ends{8, 12, 20, 24, 37};  // expected phones spread over 37 frames
  const FeatureSequence t(trajectory(rng, t_ends, 8));
  const FeatureSequence l(trajectory(rng, {6, 15, 21, 29, 37}, 8));
  for (auto kind : kAllDistanceKinds) {
    const auto rows = boundary_intersections(dtw(t, l, kind), bounds(t_ends), bounds(l_ends));
    std::size_t off = 0;
    for (const auto& row : rows) {
      off += !row.on_path;
      CHECK(row.on_path == (row.min_path_distance == 0.0));
    }
    CHECK(off >= 1);
  }
}

TEST_CASE("mismatched boundary lists are rejected") {
  const auto r = dtw(testutil::column({0, 1}), testutil::column({0, 1}), DistanceKind::mae);
  CHECK_THROWS_AS(boundary_intersections(r, bounds({1, 2}), bounds({2})), DomainError);
}

TEST_CASE("min path distance is Chebyshev distance to the nearest cell") {
  AlignmentResult r;
  r.path = {{1, 1}, {2, 1}, {3, 1}, {4, 2}, {4, 3}, {4, 4}};
  const std::vector<PhoneBoundary> t{{"a", 1}, {"b", 3}}, l{{"a", 3}, {"b", 4}};
  const auto rows = boundary_intersections(r, t, l);
  CHECK(rows[0].min_path_distance == 2.0);  // (1,3) -> nearest (1,1),(2,1),(4,3)...
  CHECK(!rows[0].on_path);
  CHECK(rows[1].min_path_distance == 1.0);  // (3,4) -> (4,3)/(4,4)
}
