#ifndef INTEL_ALIGN_SYNTHETIC_HPP
#define INTEL_ALIGN_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "intel_align/feature_io.hpp"
#include "intel_align/random.hpp"

namespace intel_align {

enum class ConfusionMode { cross_stimulus, heavy_noise };

std::string_view to_string(ConfusionMode mode);

/// Parameters of a synthetic teacher/learner corpus.
///
/// Teachers are smooth piecewise-linear trajectories, one linear segment per
/// phone. Intelligible learners are the teacher under a random monotone time
/// warp plus Gaussian noise. Non-intelligible learners are either another
/// stimulus's teacher, warped and noised (cross_stimulus), or their own
/// teacher under heavy noise (heavy_noise).
struct SynthSpec {
  std::uint32_t n_stimuli = 100;
  std::uint32_t learners_per_stimulus = 8;
  std::uint32_t dim = 64;
  std::uint32_t min_frames = 20;
  std::uint32_t max_frames = 80;
  double intelligible_fraction = 0.88;
  /// Per-frame probability (capped at 1) of a tempo event: dropping the
  /// frame or repeating it once. 0 leaves timing untouched.
  double warp_strength = 0.3;
  double noise_sigma = 0.1;
  ConfusionMode confusion_mode = ConfusionMode::cross_stimulus;
  std::uint64_t seed = 1;
  std::string corpus_name = "synthetic";

  /// Throws DomainError naming every invalid field.
  void validate() const;
};

/// Noise level used for heavy_noise non-intelligible learners.
double heavy_noise_sigma(const SynthSpec& spec);

SynthSpec parse_synth_spec(std::string_view json_text, SynthSpec defaults = {});
std::string format_synth_spec(const SynthSpec& spec);

struct SyntheticCorpus {
  Manifest manifest;
  /// Parallel to manifest.records.
  std::vector<FeatureSequence> sequences;
};

SyntheticCorpus generate(const SynthSpec& spec);

/// Writes `<corpus_name>.jsonl` and the FSEQ files under `dir`; returns the
/// manifest path.
std::filesystem::path write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

/// Indices of source frames making up a warped copy of a sequence with
/// `frames` frames. Each event drops a frame or repeats it once; no two
/// consecutive frames are dropped, so local tempo stays within 2x either way.
/// Frames listed in `keep` appear exactly once; frame 0 is never dropped.
std::vector<std::uint32_t> random_warp(std::uint32_t frames, double warp_strength,
                                       const std::vector<bool>& keep, Xorshift64Star& rng);

}  // namespace intel_align

#endif  // INTEL_ALIGN_SYNTHETIC_HPP
