// intel-align: DTW alignment-distance intelligibility scoring.
//
//   intel-align synth --out corpus/ [--spec spec.json] [--seed N]
//   intel-align score --manifest corpus/synthetic.jsonl --distance cd --out run/
//   intel-align calibrate --distance cd --out run/
//   intel-align classify --out run/
//   intel-align trace --manifest ... --stimulus S0001 --learner L01 --out run/
//   intel-align distributions --out run/

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "intel_align/feature_io.hpp"
#include "intel_align/pipeline.hpp"

namespace {

using namespace intel_align;

struct Flags {
  std::string config_file;
  std::string manifest;
  std::string distance;
  std::string normalization;
  double calib_frac = 0.0;
  std::uint64_t seed = 0;
  std::string rate_mode;
  std::size_t workers = 0;
  std::string out;
  bool stratified = false;
  std::size_t bins = 0;
};

void add_common(CLI::App* cmd, Flags& f, CLI::Option*& distance_opt) {
  cmd->add_option("--config", f.config_file, "JSON config file (flags override it)");
  cmd->add_option("--manifest", f.manifest, "Corpus manifest (JSON lines)");
  distance_opt = cmd->add_option("--distance", f.distance, "Frame cost")
                     ->check(CLI::IsMember({"mae", "mse", "cd"}));
  cmd->add_option("--normalization", f.normalization, "Utterance score normalization")
      ->check(CLI::IsMember({"path", "raw"}));
  cmd->add_option("--calib-frac", f.calib_frac, "Calibration fraction");
  cmd->add_option("--seed", f.seed, "Seed for splits and the RS baseline");
  cmd->add_option("--rate-mode", f.rate_mode, "FAR/FRR denominators")
      ->check(CLI::IsMember({"paper", "class"}));
  cmd->add_option("--workers", f.workers, "Scoring threads (default $INTEL_ALIGN_WORKERS or 1)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_flag("--stratified", f.stratified, "Stratify the calibration split by label");
  cmd->add_option("--bins", f.bins, "Histogram bins");
}

RunConfig build_config(const CLI::App* cmd, const Flags& f) {
  RunConfig c;
  if (const char* env = std::getenv("INTEL_ALIGN_WORKERS"); env && *env) {
    c.worker_count = std::stoul(env);
  }
  if (!f.config_file.empty()) c = apply_config_json(read_text_file(f.config_file), c);
  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (given("--manifest")) c.manifest_path = f.manifest;
  if (given("--distance")) c.distance = *parse_distance_kind(f.distance);
  if (given("--normalization")) {
    c.normalization = f.normalization == "raw" ? Normalization::raw : Normalization::path_length;
  }
  if (given("--calib-frac")) c.calibration_fraction = f.calib_frac;
  if (given("--seed")) c.seed = f.seed;
  if (given("--rate-mode")) c.rate_mode = *parse_rate_mode(f.rate_mode);
  if (given("--workers")) c.worker_count = f.workers;
  if (given("--out")) c.output_dir = f.out;
  if (given("--stratified")) c.stratified = f.stratified;
  if (given("--bins")) c.bins = f.bins;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised speech intelligibility detection by DTW alignment distance"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  std::string spec_file, synth_out = "corpus";
  std::uint64_t synth_seed = 0;
  synth->add_option("--spec", spec_file, "Synthetic corpus spec (JSON)");
  synth->add_option("--seed", synth_seed, "Override the spec seed");
  synth->add_option("--out", synth_out, "Corpus directory");

  auto* score = app.add_subcommand("score", "Score learner utterances against their teachers");
  auto* calibrate = app.add_subcommand("calibrate", "Pick the EER threshold on a calibration split");
  auto* classify = app.add_subcommand("classify", "Classify the test split and write reports");
  auto* trace = app.add_subcommand("trace", "Write the DTW path and boundary intersections of one pair");
  auto* distributions = app.add_subcommand("distributions", "Export score histograms and phone-length scatter");

  CLI::Option* d_score = nullptr;
  CLI::Option* d_calibrate = nullptr;
  CLI::Option* d_classify = nullptr;
  CLI::Option* d_trace = nullptr;
  CLI::Option* d_dist = nullptr;
  add_common(score, f, d_score);
  add_common(calibrate, f, d_calibrate);
  add_common(classify, f, d_classify);
  add_common(trace, f, d_trace);
  add_common(distributions, f, d_dist);
  std::string stimulus, learner;
  trace->add_option("--stimulus", stimulus, "Stimulus id")->required();
  trace->add_option("--learner", learner, "Learner id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      SynthSpec spec;
      if (!spec_file.empty()) spec = parse_synth_spec(read_text_file(spec_file));
      if (synth->count("--seed")) spec.seed = synth_seed;
      spec.validate();
      return cmd_synth(spec, synth_out, std::cout);
    }
    if (score->parsed()) return cmd_score(build_config(score, f), std::cout);
    if (calibrate->parsed()) return cmd_calibrate(build_config(calibrate, f), std::cout);
    if (classify->parsed()) {
      const auto cfg = build_config(classify, f);
      std::optional<DistanceKind> only;
      if (d_classify->count()) only = cfg.distance;
      return cmd_classify(cfg, only, std::cout);
    }
    if (trace->parsed()) return cmd_trace(build_config(trace, f), stimulus, learner, std::cout);
    if (distributions->parsed()) {
      const auto cfg = build_config(distributions, f);
      std::optional<DistanceKind> only;
      if (d_dist->count()) only = cfg.distance;
      return cmd_distributions(cfg, only, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
