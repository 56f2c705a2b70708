#include "intel_align/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace intel_align {

std::string_view to_string(ConfusionMode mode) {
  return mode == ConfusionMode::cross_stimulus ? "cross_stimulus" : "heavy_noise";
}

void SynthSpec::validate() const {
  std::vector<std::string> bad;
  if (n_stimuli < 1) bad.push_back("n_stimuli must be >= 1");
  if (learners_per_stimulus < 1) bad.push_back("learners_per_stimulus must be >= 1");
  if (dim < 1) bad.push_back("dim must be >= 1");
  if (min_frames < 2) bad.push_back("min_frames must be >= 2");
  if (max_frames < min_frames) bad.push_back("max_frames must be >= min_frames");
  if (!(intelligible_fraction >= 0.0 && intelligible_fraction <= 1.0)) {
    bad.push_back("intelligible_fraction must lie in [0, 1]");
  }
  if (!(warp_strength >= 0.0) || !std::isfinite(warp_strength)) bad.push_back("warp_strength must be >= 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) bad.push_back("noise_sigma must be >= 0");
  if (corpus_name.empty()) bad.push_back("corpus_name must not be empty");
  if (!bad.empty()) {
    std::string msg = "invalid synthetic corpus spec:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw DomainError(msg);
  }
}

double heavy_noise_sigma(const SynthSpec& spec) { return std::max(10.0 * spec.noise_sigma, 1.0); }

SynthSpec parse_synth_spec(std::string_view json_text, SynthSpec s) {
  const auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw DomainError("synthetic spec must be a JSON object");
  std::vector<std::string> bad;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_stimuli") s.n_stimuli = value.get<std::uint32_t>();
      else if (key == "learners_per_stimulus") s.learners_per_stimulus = value.get<std::uint32_t>();
      else if (key == "dim") s.dim = value.get<std::uint32_t>();
      else if (key == "frames_range") {
        s.min_frames = value.at(0).get<std::uint32_t>();
        s.max_frames = value.at(1).get<std::uint32_t>();
      }
      else if (key == "intelligible_fraction") s.intelligible_fraction = value.get<double>();
      else if (key == "warp_strength") s.warp_strength = value.get<double>();
      else if (key == "noise_sigma") s.noise_sigma = value.get<double>();
      else if (key == "confusion_mode") {
        const auto m = value.get<std::string>();
        if (m == "cross_stimulus") s.confusion_mode = ConfusionMode::cross_stimulus;
        else if (m == "heavy_noise") s.confusion_mode = ConfusionMode::heavy_noise;
        else bad.push_back("confusion_mode: unknown value '" + m + "'");
      }
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else if (key == "corpus_name") s.corpus_name = value.get<std::string>();
      else bad.push_back(key + ": unknown field");
    } catch (const nlohmann::json::exception& e) {
      bad.push_back(key + ": " + e.what());
    }
  }
  if (!bad.empty()) {
    std::string msg = "invalid synthetic corpus spec:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw DomainError(msg);
  }
  s.validate();
  return s;
}

std::string format_synth_spec(const SynthSpec& s) {
  nlohmann::ordered_json j;
  j["corpus_name"] = s.corpus_name;
  j["n_stimuli"] = s.n_stimuli;
  j["learners_per_stimulus"] = s.learners_per_stimulus;
  j["dim"] = s.dim;
  j["frames_range"] = {s.min_frames, s.max_frames};
  j["intelligible_fraction"] = s.intelligible_fraction;
  j["warp_strength"] = s.warp_strength;
  j["noise_sigma"] = s.noise_sigma;
  j["confusion_mode"] = std::string(to_string(s.confusion_mode));
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

std::vector<std::uint32_t> random_warp(std::uint32_t frames, double warp_strength,
                                       const std::vector<bool>& keep, Xorshift64Star& rng) {
  const double p_event = std::min(warp_strength, 1.0);
  std::vector<std::uint32_t> out;
  out.reserve(frames * 2);
  bool dropped_last = false;
  for (std::uint32_t i = 0; i < frames; ++i) {
    const bool pinned = i < keep.size() && keep[i];
    if (!pinned && p_event > 0.0 && rng.bernoulli(p_event)) {
      const bool drop = rng.bernoulli(0.5);
      if (drop && i != 0 && !dropped_last) {
        dropped_last = true;
        continue;
      }
      if (!drop) out.push_back(i);
    }
    dropped_last = false;
    out.push_back(i);
  }
  return out;
}

namespace {

constexpr std::string_view kPhones[] = {
    "aa", "ae", "ah", "ao", "aw", "ay", "b",  "ch", "d",  "dh", "eh", "er", "ey",
    "f",  "g",  "hh", "ih", "iy", "jh", "k",  "l",  "m",  "n",  "ng", "ow", "oy",
    "p",  "r",  "s",  "sh", "t",  "th", "uh", "uw", "v",  "w",  "y",  "z",  "zh"};

struct Stimulus {
  std::string id;
  FeatureSequence::Matrix frames;
  std::vector<PhoneBoundary> boundaries;
  std::vector<std::string> categories;
};

std::string numbered(const char* prefix, std::uint32_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*u", prefix, width, n);
  return buf;
}

Stimulus make_stimulus(const SynthSpec& spec, std::uint32_t index) {
  auto rng = Xorshift64Star::substream(spec.seed, index);
  Stimulus st;
  st.id = numbered("S", index + 1, 4);

  const auto n_frames = static_cast<std::uint32_t>(rng.between(spec.min_frames, spec.max_frames));
  const std::uint32_t max_phones = std::max<std::uint32_t>(1, std::min<std::uint32_t>(12, n_frames / 2));
  const auto n_phones =
      static_cast<std::uint32_t>(rng.between(std::min<std::uint32_t>(2, max_phones), max_phones));

  // Distinct cut points in [1, n_frames - 1] split the frames into phones.
  std::vector<std::uint32_t> cuts(n_frames - 1);
  for (std::uint32_t i = 0; i < cuts.size(); ++i) cuts[i] = i + 1;
  rng.shuffle(cuts);
  cuts.resize(n_phones - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(n_frames);

  for (auto end : cuts) {
    st.boundaries.push_back(
        {std::string(kPhones[rng.below(std::size(kPhones))]), end});
  }

  Eigen::MatrixXd anchors(n_phones + 1, spec.dim);
  for (Eigen::Index r = 0; r < anchors.rows(); ++r) {
    for (Eigen::Index c = 0; c < anchors.cols(); ++c) anchors(r, c) = rng.normal();
  }
  st.frames.resize(n_frames, spec.dim);
  std::uint32_t start = 0;
  for (std::uint32_t k = 0; k < n_phones; ++k) {
    const std::uint32_t end = cuts[k];
    const double len = end - start;
    for (std::uint32_t f = start; f < end; ++f) {
      const double t = (f - start + 1) / len;
      st.frames.row(f) = ((1.0 - t) * anchors.row(k) + t * anchors.row(k + 1)).cast<float>();
    }
    start = end;
  }

  const auto first = rng.below(std::size(kPhonemeCategories));
  st.categories.emplace_back(kPhonemeCategories[first]);
  if (rng.bernoulli(0.25)) {
    auto second = rng.below(std::size(kPhonemeCategories) - 1);
    if (second >= first) ++second;
    st.categories.emplace_back(kPhonemeCategories[second]);
  }
  return st;
}

FeatureSequence::Matrix warp_and_noise(const FeatureSequence::Matrix& source,
                                       const std::vector<std::uint32_t>& warp, double sigma,
                                       Xorshift64Star& rng) {
  FeatureSequence::Matrix out(static_cast<Eigen::Index>(warp.size()), source.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      const double v = source(warp[static_cast<std::size_t>(r)], c);
      out(r, c) = static_cast<float>(sigma > 0.0 ? v + sigma * rng.normal() : v);
    }
  }
  return out;
}

std::vector<bool> boundary_mask(const Stimulus& st) {
  std::vector<bool> keep(static_cast<std::size_t>(st.frames.rows()), false);
  for (const auto& b : st.boundaries) keep[b.end_frame - 1] = true;
  return keep;
}

// Phone ends carried through the warp: last output frame drawn from each
// source phone-end frame (which the warp never drops).
std::vector<PhoneBoundary> warped_boundaries(const std::vector<PhoneBoundary>& src,
                                             const std::vector<std::uint32_t>& warp) {
  std::vector<PhoneBoundary> out;
  for (const auto& b : src) {
    std::uint32_t last = 0;
    for (std::uint32_t j = 0; j < warp.size(); ++j) {
      if (warp[j] == b.end_frame - 1) last = j + 1;
    }
    out.push_back({b.phone_label, last});
  }
  return out;
}

// Boundaries of the expected phone sequence spread proportionally over a
// learner utterance of `frames` frames; empty if it is too short.
std::vector<PhoneBoundary> proportional_boundaries(const std::vector<PhoneBoundary>& src,
                                                   std::uint32_t src_frames, std::uint32_t frames) {
  const auto n = static_cast<std::uint32_t>(src.size());
  if (frames < n) return {};
  std::vector<PhoneBoundary> out;
  std::uint32_t prev = 0;
  for (std::uint32_t k = 0; k < n; ++k) {
    auto end = static_cast<std::uint32_t>(
        std::llround(static_cast<double>(src[k].end_frame) * frames / src_frames));
    end = std::clamp(end, prev + 1, frames - (n - 1 - k));
    out.push_back({src[k].phone_label, end});
    prev = end;
  }
  return out;
}

}  // namespace

SyntheticCorpus generate(const SynthSpec& spec) {
  spec.validate();
  std::vector<Stimulus> stimuli;
  stimuli.reserve(spec.n_stimuli);
  for (std::uint32_t s = 0; s < spec.n_stimuli; ++s) stimuli.push_back(make_stimulus(spec, s));

  const std::size_t n_learners = std::size_t{spec.n_stimuli} * spec.learners_per_stimulus;
  const auto n_intel = static_cast<std::size_t>(
      std::llround(spec.intelligible_fraction * static_cast<double>(n_learners)));
  std::vector<Label> labels(n_learners, Label::non_intelligible);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_intel), Label::intelligible);
  auto label_rng = Xorshift64Star::substream(spec.seed, ~std::uint64_t{0});
  label_rng.shuffle(labels);

  SyntheticCorpus corpus;
  corpus.manifest.corpus_name = spec.corpus_name;
  const int learner_width = spec.learners_per_stimulus >= 100 ? 3 : 2;

  for (std::uint32_t s = 0; s < spec.n_stimuli; ++s) {
    const Stimulus& st = stimuli[s];
    UtteranceRecord teacher;
    teacher.stimulus_id = st.id;
    teacher.role = Role::teacher;
    teacher.feature_path = "features/" + st.id + "_teacher.fseq";
    teacher.phoneme_categories = st.categories;
    teacher.phone_boundaries = st.boundaries;
    corpus.manifest.records.push_back(teacher);
    corpus.sequences.emplace_back(st.frames, st.id + "_teacher");

    for (std::uint32_t j = 0; j < spec.learners_per_stimulus; ++j) {
      auto rng = Xorshift64Star::substream(spec.seed ^ splitmix64(std::uint64_t{s} + 1), j + 1);
      const Label label = labels[std::size_t{s} * spec.learners_per_stimulus + j];
      const std::string learner_id = numbered("L", j + 1, learner_width);

      UtteranceRecord rec;
      rec.stimulus_id = st.id;
      rec.role = Role::learner;
      rec.learner_id = learner_id;
      rec.feature_path = "features/" + st.id + "_" + learner_id + ".fseq";
      rec.label = label;
      rec.phoneme_categories = st.categories;

      const bool cross = label == Label::non_intelligible &&
                         spec.confusion_mode == ConfusionMode::cross_stimulus && spec.n_stimuli > 1;
      FeatureSequence::Matrix frames;
      if (cross) {
        auto donor = static_cast<std::uint32_t>(rng.below(spec.n_stimuli - 1));
        if (donor >= s) ++donor;
        const Stimulus& d = stimuli[donor];
        const auto warp = random_warp(static_cast<std::uint32_t>(d.frames.rows()), spec.warp_strength,
                                      boundary_mask(d), rng);
        frames = warp_and_noise(d.frames, warp, spec.noise_sigma, rng);
        auto bounds = proportional_boundaries(st.boundaries, static_cast<std::uint32_t>(st.frames.rows()),
                                              static_cast<std::uint32_t>(frames.rows()));
        if (!bounds.empty()) rec.phone_boundaries = std::move(bounds);
      } else {
        const double sigma =
            label == Label::intelligible ? spec.noise_sigma : heavy_noise_sigma(spec);
        const auto warp = random_warp(static_cast<std::uint32_t>(st.frames.rows()), spec.warp_strength,
                                      boundary_mask(st), rng);
        frames = warp_and_noise(st.frames, warp, sigma, rng);
        rec.phone_boundaries = warped_boundaries(st.boundaries, warp);
      }
      corpus.manifest.records.push_back(rec);
      corpus.sequences.emplace_back(std::move(frames), st.id + "_" + learner_id);
    }
  }

  std::string text;
  for (const auto& r : corpus.manifest.records) text += manifest_line(r) + "\n";
  corpus.manifest.content_hash = fnv1a64(text);
  return corpus;
}

std::filesystem::path write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "features");
  for (std::size_t i = 0; i < corpus.manifest.records.size(); ++i) {
    write_feature_file(corpus.sequences[i], dir / corpus.manifest.records[i].feature_path);
  }
  const auto path = dir / (corpus.manifest.corpus_name + ".jsonl");
  write_manifest(corpus.manifest, path);
  return path;
}

}  // namespace intel_align
