#ifndef INTEL_ALIGN_FEATURE_IO_HPP
#define INTEL_ALIGN_FEATURE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "intel_align/error.hpp"

namespace intel_align {

template <typename Scalar>
using FrameMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One utterance as a frames x dim matrix of embedding vectors.
///
/// Construction validates shape and finiteness, so every instance that
/// exists satisfies frames >= 1, dim >= 1 and contains no NaN/Inf.
template <typename Scalar>
class BasicFeatureSequence {
 public:
  using Matrix = FrameMatrix<Scalar>;

  explicit BasicFeatureSequence(Matrix data, std::string source_id = {})
      : data_(std::move(data)), source_id_(std::move(source_id)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw DomainError("feature sequence needs at least one frame and one dimension");
    }
    if (!data_.allFinite()) {
      throw DomainError("feature sequence '" + source_id_ + "' contains non-finite values");
    }
  }

  Eigen::Index frames() const { return data_.rows(); }
  Eigen::Index dim() const { return data_.cols(); }
  const Matrix& data() const { return data_; }
  const std::string& source_id() const { return source_id_; }

  auto frame(Eigen::Index i) const { return data_.row(i); }

  friend bool operator==(const BasicFeatureSequence& a, const BasicFeatureSequence& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           a.data_ == b.data_;
  }

 private:
  Matrix data_;
  std::string source_id_;
};

using FeatureSequence = BasicFeatureSequence<float>;

struct FseqHeader {
  std::uint32_t version = 0;
  std::uint32_t frames = 0;
  std::uint32_t dim = 0;
};

inline constexpr std::uint32_t kFseqVersion = 1;
inline constexpr std::size_t kFseqHeaderBytes = 16;

/// Decodes an FSEQ byte buffer. Errors carry the failing byte offset.
FeatureSequence decode_feature_bytes(std::span<const unsigned char> bytes,
                                     std::string source_id = {});
std::vector<unsigned char> encode_feature_bytes(const FeatureSequence& seq);

FeatureSequence read_feature_file(const std::filesystem::path& path);
/// Reads and checks only the 16-byte header.
FseqHeader read_feature_header(const std::filesystem::path& path);
void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path);

enum class Role { teacher, learner };
enum class Label { non_intelligible = 0, intelligible = 1 };

std::string_view to_string(Role role);
std::string_view to_string(Label label);

struct PhoneBoundary {
  std::string phone_label;
  std::uint32_t end_frame = 0;  // 1-based index of the last frame of the phone

  friend bool operator==(const PhoneBoundary&, const PhoneBoundary&) = default;
};

struct UtteranceRecord {
  std::string stimulus_id;
  Role role = Role::learner;
  std::optional<std::string> learner_id;
  std::filesystem::path feature_path;  // as written in the manifest
  std::optional<Label> label;
  std::vector<std::string> phoneme_categories;
  std::optional<std::vector<PhoneBoundary>> phone_boundaries;

  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

/// Phoneme-category taxonomy used for per-category reporting.
inline constexpr std::string_view kPhonemeCategories[] = {
    "Fricatives", "Stops",      "Nasals",     "Semi-Vowels",
    "Glides",     "Vowels",     "Diphthongs", "Consonant Clusters"};

struct Manifest {
  std::string corpus_name;
  std::vector<UtteranceRecord> records;
  /// Directory that relative feature paths resolve against.
  std::filesystem::path base_dir;
  /// FNV-1a 64 over the manifest bytes as read.
  std::uint64_t content_hash = 0;

  std::filesystem::path resolve(const UtteranceRecord& r) const;
  const UtteranceRecord* teacher(std::string_view stimulus_id) const;
  const UtteranceRecord* learner(std::string_view stimulus_id, std::string_view learner_id) const;
};

struct ManifestOptions {
  /// Open every feature file and check it exists, and that phone
  /// boundaries end at the sequence's frame count.
  bool verify_features = true;
};

/// Parses manifest text. All problems are collected and reported together
/// in one ManifestError (one line per problem) so none is silently dropped.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                        std::string corpus_name, ManifestOptions options = {});
Manifest load_manifest(const std::filesystem::path& path, ManifestOptions options = {});

std::string manifest_line(const UtteranceRecord& record);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t hash);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace intel_align

#endif  // INTEL_ALIGN_FEATURE_IO_HPP
