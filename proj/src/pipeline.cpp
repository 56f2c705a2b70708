#include "intel_align/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

#include <json.hpp>

#include "intel_align/analysis.hpp"
#include "intel_align/dtw.hpp"
#include "intel_align/dtw_trace.hpp"
#include "intel_align/text.hpp"

namespace intel_align {

namespace {
using ojson = nlohmann::ordered_json;

std::optional<Normalization> normalization_from(std::string_view s) {
  if (s == "path" || s == "path_length") return Normalization::path_length;
  if (s == "raw") return Normalization::raw;
  return std::nullopt;
}

void echo_config(const RunConfig& config, std::string_view command) {
  write_text_file(config.output_dir / ("effective_config_" + std::string(command) + ".json"),
                  format_run_config(config));
}

}  // namespace

void RunConfig::validate() const {
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    throw DomainError("calibration fraction must lie in (0, 1)");
  }
  if (worker_count < 1) throw DomainError("worker count must be >= 1");
  if (bins < 2) throw DomainError("histogram bins must be >= 2");
}

RunConfig apply_config_json(std::string_view json_text, RunConfig c) {
  const auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw Error("config file must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "manifest") {
      c.manifest_path = v.get<std::string>();
    } else if (key == "distance") {
      const auto k = parse_distance_kind(v.get<std::string>());
      if (!k) throw Error("config: unknown distance '" + v.get<std::string>() + "'");
      c.distance = *k;
    } else if (key == "normalization") {
      const auto n = normalization_from(v.get<std::string>());
      if (!n) throw Error("config: unknown normalization '" + v.get<std::string>() + "'");
      c.normalization = *n;
    } else if (key == "calibration_fraction") {
      c.calibration_fraction = v.get<double>();
    } else if (key == "seed") {
      c.seed = v.get<std::uint64_t>();
    } else if (key == "rate_mode") {
      const auto m = parse_rate_mode(v.get<std::string>());
      if (!m) throw Error("config: unknown rate_mode '" + v.get<std::string>() + "'");
      c.rate_mode = *m;
    } else if (key == "stratified") {
      c.stratified = v.get<bool>();
    } else if (key == "output_dir") {
      c.output_dir = v.get<std::string>();
    } else if (key == "workers") {
      c.worker_count = v.get<std::size_t>();
    } else if (key == "bins") {
      c.bins = v.get<std::size_t>();
    } else {
      throw Error("config: unknown key '" + key + "'");
    }
  }
  return c;
}

std::string format_run_config(const RunConfig& c) {
  ojson j;
  j["manifest"] = c.manifest_path.generic_string();
  j["distance"] = std::string(to_string(c.distance));
  j["normalization"] = std::string(to_string(c.normalization));
  j["calibration_fraction"] = c.calibration_fraction;
  j["seed"] = c.seed;
  j["rate_mode"] = std::string(to_string(c.rate_mode));
  j["stratified"] = c.stratified;
  j["output_dir"] = c.output_dir.generic_string();
  j["workers"] = c.worker_count;
  j["bins"] = c.bins;
  return j.dump(2) + "\n";
}

std::filesystem::path scores_path(const RunConfig& c, DistanceKind k) {
  return c.output_dir / ("scores_" + std::string(to_string(k)) + ".csv");
}
std::filesystem::path score_errors_path(const RunConfig& c, DistanceKind k) {
  return c.output_dir / ("score_errors_" + std::string(to_string(k)) + ".csv");
}
std::filesystem::path calibration_path(const RunConfig& c, DistanceKind k) {
  return c.output_dir / ("calibration_" + std::string(to_string(k)) + ".json");
}

ScoreOutcome score_corpus(const Manifest& manifest, DistanceKind kind, Normalization normalization,
                          std::size_t workers) {
  std::vector<const UtteranceRecord*> learners;
  for (const auto& r : manifest.records) {
    if (r.role == Role::learner) learners.push_back(&r);
  }

  struct Slot {
    std::optional<PairScore> score;
    std::string error;
  };
  std::vector<Slot> slots(learners.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < learners.size(); i = next++) {
      const auto& rec = *learners[i];
      try {
        const auto* teacher = manifest.teacher(rec.stimulus_id);
        if (!teacher) throw ManifestError("no teacher for stimulus '" + rec.stimulus_id + "'");
        const auto t = read_feature_file(manifest.resolve(*teacher));
        const auto l = read_feature_file(manifest.resolve(rec));
        PairScore s;
        s.stimulus_id = rec.stimulus_id;
        s.learner_id = *rec.learner_id;
        s.score = score_pair(t, l, kind, normalization);
        s.label = *rec.label;
        s.phoneme_categories = rec.phoneme_categories;
        if (teacher->phone_boundaries) {
          s.phone_count = static_cast<std::uint32_t>(teacher->phone_boundaries->size());
        } else if (rec.phone_boundaries) {
          s.phone_count = static_cast<std::uint32_t>(rec.phone_boundaries->size());
        }
        slots[i].score = std::move(s);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, learners.size()));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }

  ScoreOutcome out;
  out.file.meta = {manifest.content_hash, kind, normalization};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].score) {
      out.file.scores.push_back(std::move(*slots[i].score));
    } else {
      out.failures.push_back({learners[i]->stimulus_id, *learners[i]->learner_id, slots[i].error});
    }
  }
  return out;
}

int cmd_synth(const SynthSpec& spec, const std::filesystem::path& out_dir, std::ostream& log) {
  const auto corpus = generate(spec);
  const auto manifest_path = write_corpus(corpus, out_dir);
  write_text_file(out_dir / "synth_spec.json", format_synth_spec(spec));

  std::size_t n_intel = 0, n_learners = 0;
  for (const auto& r : corpus.manifest.records) {
    if (r.role != Role::learner) continue;
    ++n_learners;
    n_intel += *r.label == Label::intelligible;
  }
  log << "corpus '" << spec.corpus_name << "' written to " << manifest_path.string() << "\n"
      << "  stimuli: " << spec.n_stimuli << "\n"
      << "  teacher records: " << spec.n_stimuli << "\n"
      << "  learner records: " << n_learners << "\n"
      << "  intelligible: " << n_intel << " ("
      << format_fixed(100.0 * static_cast<double>(n_intel) / static_cast<double>(n_learners), 2)
      << "%)\n"
      << "  non-intelligible: " << n_learners - n_intel << "\n"
      << "  corpus hash: " << hash_hex(corpus.manifest.content_hash) << "\n";
  return 0;
}

int cmd_score(const RunConfig& config, std::ostream& log) {
  config.validate();
  ManifestOptions options;
  options.verify_features = false;  // per-pair file problems go to the error sidecar
  const auto manifest = load_manifest(config.manifest_path, options);
  const auto outcome = score_corpus(manifest, config.distance, config.normalization, config.worker_count);

  std::filesystem::create_directories(config.output_dir);
  write_text_file(scores_path(config, config.distance), format_scores(outcome.file));
  std::string errors = "stimulus_id,learner_id,error\n";
  for (const auto& f : outcome.failures) {
    errors += csv_field(f.stimulus_id) + ',' + csv_field(f.learner_id) + ',' + csv_field(f.message) + '\n';
  }
  write_text_file(score_errors_path(config, config.distance), errors);
  echo_config(config, "score");

  log << "scored " << outcome.file.scores.size() << " pair(s) with " << to_string(config.distance)
      << " -> " << scores_path(config, config.distance).string() << "\n";
  if (!outcome.failures.empty()) {
    log << outcome.failures.size() << " pair(s) failed, see "
        << score_errors_path(config, config.distance).string() << "\n";
    return 1;
  }
  return 0;
}

int cmd_calibrate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto scores = parse_scores(read_text_file(scores_path(config, config.distance)));
  const auto parts = split(scores.scores, config.calibration_fraction, config.seed, config.stratified);

  CalibrationFile file;
  try {
    file.result = calibrate_threshold(parts.calibration, config.rate_mode);
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + " (calibration split of " +
                      std::to_string(parts.calibration.size()) +
                      " item(s); try another --seed or --stratified)");
  }
  file.result.seed = config.seed;
  file.corpus_hash = scores.meta.corpus_hash;
  file.distance = scores.meta.distance;
  file.normalization = scores.meta.normalization;
  file.calibration_fraction = config.calibration_fraction;
  file.stratified = config.stratified;
  for (const auto& s : parts.calibration) file.members.emplace_back(s.stimulus_id, s.learner_id);

  write_text_file(calibration_path(config, config.distance), format_calibration(file));
  echo_config(config, "calibrate");
  log << "calibrated " << to_string(config.distance) << " on " << file.result.calibration_size
      << " item(s): threshold=" << format_double(file.result.threshold)
      << " FAR=" << format_double(file.result.far) << " FRR=" << format_double(file.result.frr)
      << " EER=" << format_double(file.result.eer) << " (" << to_string(file.result.rate_mode)
      << ")\n";
  return 0;
}

ClassificationReport report_from_files(const ScoresFile& scores, const CalibrationFile& calibration,
                                       std::uint64_t rs_seed) {
  if (scores.meta.corpus_hash != calibration.corpus_hash) {
    throw Error("corpus hash mismatch: scores " + hash_hex(scores.meta.corpus_hash) +
                " vs calibration " + hash_hex(calibration.corpus_hash));
  }
  if (scores.meta.distance != calibration.distance ||
      scores.meta.normalization != calibration.normalization) {
    throw Error("scores and calibration files disagree on distance or normalization");
  }
  const std::set<std::pair<std::string, std::string>> members(calibration.members.begin(),
                                                              calibration.members.end());
  std::vector<PairScore> test;
  std::size_t found = 0, calib_intel = 0;
  for (const auto& s : scores.scores) {
    if (members.count({s.stimulus_id, s.learner_id})) {
      ++found;
      calib_intel += s.label == Label::intelligible;
    } else {
      test.push_back(s);
    }
  }
  if (found != members.size()) {
    throw Error("calibration members missing from the scores file (" + std::to_string(found) +
                " of " + std::to_string(members.size()) + " found)");
  }
  const double p = found == 0 ? 0.0 : static_cast<double>(calib_intel) / static_cast<double>(found);
  return build_report(test, calibration.result.threshold, calibration.distance,
                      calibration.normalization, calibration.result.rate_mode, p, rs_seed);
}

int cmd_classify(const RunConfig& config, std::optional<DistanceKind> only, std::ostream& log) {
  config.validate();
  std::vector<ClassificationReport> reports;
  std::optional<std::uint64_t> hash;
  for (auto kind : kAllDistanceKinds) {
    if (only && *only != kind) continue;
    const auto sp = scores_path(config, kind);
    const auto cp = calibration_path(config, kind);
    if (!only && !(std::filesystem::exists(sp) && std::filesystem::exists(cp))) continue;
    const auto scores = parse_scores(read_text_file(sp));
    const auto calibration = parse_calibration(read_text_file(cp));
    if (hash && *hash != scores.meta.corpus_hash) {
      throw Error("corpus hash mismatch between distance measures");
    }
    hash = scores.meta.corpus_hash;
    reports.push_back(report_from_files(scores, calibration, config.seed));
    write_text_file(config.output_dir / ("verdicts_" + std::string(to_string(kind)) + ".csv"),
                    format_verdicts_csv(reports.back()));
  }
  if (reports.empty()) {
    throw Error("no scores/calibration file pairs found in '" + config.output_dir.string() + "'");
  }
  const auto table = format_report_table(reports);
  write_text_file(config.output_dir / "report.json", format_report_json(reports, *hash));
  write_text_file(config.output_dir / "report.txt", table);
  echo_config(config, "classify");
  log << table;
  return 0;
}

int cmd_trace(const RunConfig& config, const std::string& stimulus_id, const std::string& learner_id,
              std::ostream& log) {
  ManifestOptions options;
  options.verify_features = false;
  const auto manifest = load_manifest(config.manifest_path, options);
  const auto* learner = manifest.learner(stimulus_id, learner_id);
  const auto* teacher = manifest.teacher(stimulus_id);
  if (!learner || !teacher) {
    throw Error("unknown pair: stimulus '" + stimulus_id + "', learner '" + learner_id + "'");
  }
  const auto t = read_feature_file(manifest.resolve(*teacher));
  const auto l = read_feature_file(manifest.resolve(*learner));
  const auto alignment = dtw(t, l, config.distance);

  auto j = ojson::parse(trace_to_json(alignment));
  j["stimulus_id"] = stimulus_id;
  j["learner_id"] = learner_id;
  j["label"] = static_cast<int>(*learner->label);
  j["corpus_hash"] = hash_hex(manifest.content_hash);

  const std::string stem = "trace_" + stimulus_id + "_" + learner_id + "_" +
                           std::string(to_string(config.distance));
  std::vector<BoundaryIntersection> rows;
  std::string status;
  if (!teacher->phone_boundaries || !learner->phone_boundaries) {
    status = "no_phone_boundaries";
  } else if (teacher->phone_boundaries->size() != learner->phone_boundaries->size()) {
    status = "phone_count_mismatch";
  } else {
    rows = boundary_intersections(alignment, *teacher->phone_boundaries, *learner->phone_boundaries);
    status = "ok";
  }
  j["intersections_status"] = status;
  if (status == "ok") {
    auto arr = ojson::array();
    for (const auto& r : rows) {
      arr.push_back({{"phone_label", r.phone_label},
                     {"teacher_boundary_frame", r.teacher_boundary_frame},
                     {"learner_boundary_frame", r.learner_boundary_frame},
                     {"on_path", r.on_path},
                     {"min_path_distance", r.min_path_distance}});
    }
    j["intersections"] = std::move(arr);
  } else {
    j["intersections"] = nullptr;
  }
  write_text_file(config.output_dir / (stem + ".json"), j.dump(2) + "\n");
  write_text_file(config.output_dir / (stem + "_intersections.csv"), format_intersections_csv(rows));
  echo_config(config, "trace");

  std::size_t on = 0;
  for (const auto& r : rows) on += r.on_path;
  log << "trace " << stimulus_id << "/" << learner_id << " (" << to_string(config.distance)
      << "): path length " << alignment.path.size() << ", accumulated "
      << format_double(alignment.accumulated_cost) << ", normalized "
      << format_double(alignment.normalized_distance) << "\n";
  if (status == "ok") {
    log << "  boundary intersections on path: " << on << "/" << rows.size() << "\n";
  } else {
    log << "  boundary intersections: " << status << "\n";
  }
  return 0;
}

int cmd_distributions(const RunConfig& config, std::optional<DistanceKind> only, std::ostream& log) {
  config.validate();
  ojson summary = ojson::object();
  for (auto kind : kAllDistanceKinds) {
    if (only && *only != kind) continue;
    const auto sp = scores_path(config, kind);
    if (!only && !std::filesystem::exists(sp)) continue;
    const auto scores = parse_scores(read_text_file(sp));
    const auto hist = score_distributions(scores.scores, config.bins);
    const auto scatter = phone_length_scatter(scores.scores);
    const std::string k(to_string(kind));
    write_text_file(config.output_dir / ("distributions_" + k + ".csv"), format_histogram_csv(hist));
    write_text_file(config.output_dir / ("phone_length_" + k + ".csv"), format_scatter_csv(scatter));

    double sum[2] = {0, 0};
    std::size_t n[2] = {0, 0};
    for (const auto& s : scores.scores) {
      const int c = s.label == Label::intelligible ? 0 : 1;
      sum[c] += s.score;
      ++n[c];
    }
    ojson o;
    o["corpus_hash"] = hash_hex(scores.meta.corpus_hash);
    o["bins"] = config.bins;
    o["overlap_coefficient"] = overlap_coefficient(hist);
    o["mean_intelligible"] = n[0] ? ojson(sum[0] / static_cast<double>(n[0])) : ojson(nullptr);
    o["mean_non_intelligible"] = n[1] ? ojson(sum[1] / static_cast<double>(n[1])) : ojson(nullptr);
    o["phone_length_rows"] = scatter.rows.size();
    o["phone_length_skipped"] = scatter.skipped;
    summary[k] = o;
    log << k << ": overlap " << format_fixed(overlap_coefficient(hist), 4) << ", "
        << scatter.rows.size() << " scatter row(s), " << scatter.skipped << " skipped\n";
  }
  if (summary.empty()) throw Error("no scores files found in '" + config.output_dir.string() + "'");
  write_text_file(config.output_dir / "distributions_summary.json", summary.dump(2) + "\n");
  echo_config(config, "distributions");
  return 0;
}

}  // namespace intel_align
