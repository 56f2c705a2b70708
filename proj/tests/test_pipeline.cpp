#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "intel_align/pipeline.hpp"
#include "test_util.hpp"

using namespace intel_align;
namespace fs = std::filesystem;

namespace {

SynthSpec small_spec(std::uint32_t n_stimuli = 10, std::uint32_t learners = 4) {
  SynthSpec s;
  s.n_stimuli = n_stimuli;
  s.learners_per_stimulus = learners;
  s.dim = 16;
  s.min_frames = 10;
  s.max_frames = 30;
  s.noise_sigma = 0.05;
  s.seed = 3;
  return s;
}

fs::path make_corpus(const std::string& name, const SynthSpec& spec) {
  const auto dir = testutil::scratch_dir(name);
  std::ostringstream log;
  REQUIRE(cmd_synth(spec, dir / "corpus", log) == 0);
  return dir;
}

RunConfig config_for(const fs::path& dir, const std::string& out = "run") {
  RunConfig c;
  c.manifest_path = dir / "corpus" / "synthetic.jsonl";
  c.output_dir = dir / out;
  return c;
}

}  // namespace

TEST_CASE("synth reports counts and writes a loadable corpus") {
  const auto dir = testutil::scratch_dir("pipe_synth");
  std::ostringstream log;
  CHECK(cmd_synth(small_spec(20, 4), dir, log) == 0);
  CHECK(log.str().find("learner records: 80") != std::string::npos);
  const auto m = load_manifest(dir / "synthetic.jsonl");
  std::size_t learners = 0;
  for (const auto& r : m.records) learners += r.role == Role::learner;
  CHECK(learners == 80);
  CHECK(parse_synth_spec(read_text_file(dir / "synth_spec.json")).n_stimuli == 20);
}

TEST_CASE("score writes one row per learner, identical across worker counts") {
  const auto dir = make_corpus("pipe_score", small_spec());
  auto c1 = config_for(dir, "w1");
  auto c8 = config_for(dir, "w8");
  c8.worker_count = 8;
  std::ostringstream log;
  for (auto kind : kAllDistanceKinds) {
    c1.distance = c8.distance = kind;
    REQUIRE(cmd_score(c1, log) == 0);
    REQUIRE(cmd_score(c8, log) == 0);
    const auto a = read_text_file(scores_path(c1, kind));
    CHECK(a == read_text_file(scores_path(c8, kind)));
    CHECK(parse_scores(a).scores.size() == 40);
  }
}

TEST_CASE("missing feature file goes to the error sidecar") {
  const auto dir = make_corpus("pipe_missing", small_spec());
  fs::remove(dir / "corpus" / "features" / "S0002_L03.fseq");
  auto c = config_for(dir);
  std::ostringstream log;
  CHECK(cmd_score(c, log) == 1);
  CHECK(parse_scores(read_text_file(scores_path(c, c.distance))).scores.size() == 39);
  const auto errors = read_text_file(score_errors_path(c, c.distance));
  CHECK(errors.find("S0002,L03,") != std::string::npos);
}

TEST_CASE("calibrate: sizes, determinism, single-class error") {
  const auto dir = make_corpus("pipe_calib", small_spec(100, 20));
  auto c = config_for(dir);
  std::ostringstream log;
  REQUIRE(cmd_score(c, log) == 0);
  REQUIRE(cmd_calibrate(c, log) == 0);
  const auto first = read_text_file(calibration_path(c, c.distance));
  const auto cal = parse_calibration(first);
  CHECK(cal.result.calibration_size == 100);  // 5% of 2000
  CHECK(cal.members.size() == 100);
  CHECK(cal.result.eer == 0.0);
  REQUIRE(cmd_calibrate(c, log) == 0);
  CHECK(read_text_file(calibration_path(c, c.distance)) == first);

  auto tiny = config_for(dir, "tiny");
  tiny.calibration_fraction = 0.0005;  // a single item
  REQUIRE(cmd_score(tiny, log) == 0);
  CHECK_THROWS_WITH(cmd_calibrate(tiny, log), doctest::Contains("--stratified"));
}

TEST_CASE("classify emits all columns and rejects mixed corpora") {
  const auto dir = make_corpus("pipe_classify", small_spec(40, 5));
  auto c = config_for(dir);
  c.calibration_fraction = 0.1;
  std::ostringstream log;
  for (auto kind : kAllDistanceKinds) {
    c.distance = kind;
    REQUIRE(cmd_score(c, log) == 0);
    REQUIRE(cmd_calibrate(c, log) == 0);
  }
  REQUIRE(cmd_classify(c, std::nullopt, log) == 0);
  const auto report = nlohmann::json::parse(read_text_file(c.output_dir / "report.json"));
  REQUIRE(report["reports"].size() == 3);
  for (const auto& r : report["reports"]) {
    CHECK(r["overall_accuracy"].get<double>() == 100.0);
    CHECK(r["n_test"].get<int>() == 180);
  }
  const auto table = read_text_file(c.output_dir / "report.txt");
  for (const char* col : {"CD", "MAE", "MSE", "MCV", "RS"}) CHECK(table.find(col) != std::string::npos);

  // Calibration from a different corpus.
  auto other_spec = small_spec(40, 5);
  other_spec.seed = 99;
  const auto other = make_corpus("pipe_classify_other", other_spec);
  auto oc = config_for(other);
  oc.calibration_fraction = 0.1;
  REQUIRE(cmd_score(oc, log) == 0);
  REQUIRE(cmd_calibrate(oc, log) == 0);
  fs::copy_file(calibration_path(oc, DistanceKind::cd), calibration_path(c, DistanceKind::cd),
                fs::copy_options::overwrite_existing);
  CHECK_THROWS_WITH(cmd_classify(c, std::nullopt, log), doctest::Contains("corpus hash mismatch"));
}

TEST_CASE("degenerate threshold gives the non-intelligible fraction") {
  const auto dir = make_corpus("pipe_degenerate", small_spec(20, 5));
  auto c = config_for(dir);
  std::ostringstream log;
  REQUIRE(cmd_score(c, log) == 0);
  REQUIRE(cmd_calibrate(c, log) == 0);
  const auto scores = parse_scores(read_text_file(scores_path(c, c.distance)));
  auto cal = parse_calibration(read_text_file(calibration_path(c, c.distance)));
  cal.result.threshold = -1.0;
  const auto r = report_from_files(scores, cal, 1);
  CHECK(r.overall_accuracy == doctest::Approx(100.0 - r.baselines.mcv));
}

TEST_CASE("trace: identity pair, boundaries, and missing pairs") {
  const auto dir = testutil::scratch_dir("pipe_trace");
  // Hand-built corpus: learner identical to the teacher.
  FeatureSequence::Matrix m(4, 2);
  m << 1, 0, 0, 1, 1, 1, 2, 0;
  write_feature_file(FeatureSequence(m), dir / "t.fseq");
  write_feature_file(FeatureSequence(m), dir / "l.fseq");
  write_text_file(dir / "c.jsonl",
                  R"({"stimulus_id":"S","role":"teacher","feature_path":"t.fseq","phoneme_categories":[],"phone_boundaries":[["a",2],["b",4]]})"
                  "\n"
                  R"({"stimulus_id":"S","role":"learner","learner_id":"A","feature_path":"l.fseq","label":1,"phoneme_categories":[],"phone_boundaries":[["a",2],["b",4]]})"
                  "\n"
                  R"({"stimulus_id":"S","role":"learner","learner_id":"B","feature_path":"l.fseq","label":1,"phoneme_categories":[]})"
                  "\n");
  RunConfig c;
  c.manifest_path = dir / "c.jsonl";
  c.output_dir = dir / "run";
  std::ostringstream log;
  REQUIRE(cmd_trace(c, "S", "A", log) == 0);
  const auto j = nlohmann::json::parse(read_text_file(c.output_dir / "trace_S_A_cd.json"));
  CHECK(j["pairs"] == nlohmann::json::parse("[[1,1],[2,2],[3,3],[4,4]]"));
  CHECK(j["intersections_status"] == "ok");
  CHECK(j["intersections"].size() == 2);
  for (const auto& row : j["intersections"]) CHECK(row["on_path"] == true);

  REQUIRE(cmd_trace(c, "S", "B", log) == 0);
  const auto k = nlohmann::json::parse(read_text_file(c.output_dir / "trace_S_B_cd.json"));
  CHECK(k["intersections"].is_null());
  CHECK(k["intersections_status"] == "no_phone_boundaries");

  CHECK_THROWS_WITH(cmd_trace(c, "S", "Z", log), doctest::Contains("unknown pair"));
}

TEST_CASE("distributions writes histogram and scatter tables") {
  const auto dir = make_corpus("pipe_dist", small_spec());
  auto c = config_for(dir);
  std::ostringstream log;
  REQUIRE(cmd_score(c, log) == 0);
  REQUIRE(cmd_distributions(c, std::nullopt, log) == 0);
  const auto hist = read_text_file(c.output_dir / "distributions_cd.csv");
  CHECK(std::count(hist.begin(), hist.end(), '\n') == 51);
  const auto scatter = read_text_file(c.output_dir / "phone_length_cd.csv");
  CHECK(std::count(scatter.begin(), scatter.end(), '\n') == 41);
  const auto summary = nlohmann::json::parse(read_text_file(c.output_dir / "distributions_summary.json"));
  CHECK(summary["cd"]["mean_non_intelligible"].get<double>() >
        summary["cd"]["mean_intelligible"].get<double>());
}

TEST_CASE("config file overrides defaults and is echoed") {
  RunConfig base;
  const auto c = apply_config_json(R"({"distance":"mse","seed":9,"rate_mode":"paper","workers":3})", base);
  CHECK(c.distance == DistanceKind::mse);
  CHECK(c.seed == 9);
  CHECK(c.rate_mode == RateMode::paper);
  CHECK(c.worker_count == 3);
  CHECK(c.calibration_fraction == 0.05);
  CHECK_THROWS(apply_config_json(R"({"bogus":1})", base));
  const auto again = apply_config_json(format_run_config(c), base);
  CHECK(format_run_config(again) == format_run_config(c));
  RunConfig bad;
  bad.worker_count = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
