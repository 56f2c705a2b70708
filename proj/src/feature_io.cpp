#include "intel_align/feature_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace intel_align {

namespace {

constexpr unsigned char kMagic[4] = {'F', 'S', 'E', 'Q'};

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

FseqHeader decode_header(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4) throw FormatError("truncated header", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected FSEQ", 0);
  if (bytes.size() < kFseqHeaderBytes) throw FormatError("truncated header", bytes.size());
  FseqHeader h;
  h.version = load_u32(bytes.data() + 4);
  if (h.version != kFseqVersion) {
    throw FormatError("unsupported FSEQ version " + std::to_string(h.version), 4);
  }
  h.frames = load_u32(bytes.data() + 8);
  h.dim = load_u32(bytes.data() + 12);
  if (h.frames == 0) throw FormatError("frame count must be >= 1", 8);
  if (h.dim == 0) throw FormatError("dimension must be >= 1", 12);
  return h;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

FeatureSequence decode_feature_bytes(std::span<const unsigned char> bytes, std::string source_id) {
  const FseqHeader h = decode_header(bytes);
  const std::uint64_t count = std::uint64_t{h.frames} * h.dim;
  const std::uint64_t expected = kFseqHeaderBytes + count * 4;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload: header declares " + std::to_string(h.frames) + "x" +
                          std::to_string(h.dim) + " values but only " +
                          std::to_string((bytes.size() - kFseqHeaderBytes) / 4) + " present",
                      bytes.size());
  }
  if (bytes.size() > expected) throw FormatError("trailing data after payload", expected);

  FeatureSequence::Matrix data(h.frames, h.dim);
  float* out = data.data();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t offset = kFseqHeaderBytes + i * 4;
    const float v = std::bit_cast<float>(load_u32(bytes.data() + offset));
    if (!std::isfinite(v)) throw FormatError("non-finite value", offset);
    out[i] = v;
  }
  return FeatureSequence(std::move(data), std::move(source_id));
}

std::vector<unsigned char> encode_feature_bytes(const FeatureSequence& seq) {
  std::vector<unsigned char> out;
  const auto n = static_cast<std::size_t>(seq.frames() * seq.dim());
  out.reserve(kFseqHeaderBytes + 4 * n);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  store_u32(out, kFseqVersion);
  store_u32(out, static_cast<std::uint32_t>(seq.frames()));
  store_u32(out, static_cast<std::uint32_t>(seq.dim()));
  const float* p = seq.data().data();
  for (std::size_t i = 0; i < n; ++i) store_u32(out, std::bit_cast<std::uint32_t>(p[i]));
  return out;
}

FeatureSequence read_feature_file(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_feature_bytes(bytes, path.string());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

FseqHeader read_feature_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  unsigned char buf[kFseqHeaderBytes];
  in.read(reinterpret_cast<char*>(buf), kFseqHeaderBytes);
  return decode_header(std::span<const unsigned char>(buf, static_cast<std::size_t>(in.gcount())));
}

void write_feature_file(const FeatureSequence& seq, const std::filesystem::path& path) {
  // FeatureSequence cannot hold non-finite values, so no re-check here.
  const auto bytes = encode_feature_bytes(seq);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string_view to_string(Role role) { return role == Role::teacher ? "teacher" : "learner"; }

std::string_view to_string(Label label) {
  return label == Label::intelligible ? "intelligible" : "non_intelligible";
}

std::filesystem::path Manifest::resolve(const UtteranceRecord& r) const {
  return r.feature_path.is_absolute() ? r.feature_path : base_dir / r.feature_path;
}

const UtteranceRecord* Manifest::teacher(std::string_view stimulus_id) const {
  for (const auto& r : records) {
    if (r.role == Role::teacher && r.stimulus_id == stimulus_id) return &r;
  }
  return nullptr;
}

const UtteranceRecord* Manifest::learner(std::string_view stimulus_id,
                                         std::string_view learner_id) const {
  for (const auto& r : records) {
    if (r.role == Role::learner && r.stimulus_id == stimulus_id && r.learner_id &&
        *r.learner_id == learner_id) {
      return &r;
    }
  }
  return nullptr;
}

namespace {

using nlohmann::json;

UtteranceRecord parse_record(const json& j) {
  if (!j.is_object()) throw ManifestError("record is not a JSON object");
  UtteranceRecord r;
  r.stimulus_id = j.at("stimulus_id").get<std::string>();
  if (r.stimulus_id.empty()) throw ManifestError("empty stimulus_id");

  const auto role = j.at("role").get<std::string>();
  if (role == "teacher") {
    r.role = Role::teacher;
  } else if (role == "learner") {
    r.role = Role::learner;
  } else {
    throw ManifestError("unknown role '" + role + "'");
  }

  if (auto it = j.find("learner_id"); it != j.end() && !it->is_null()) {
    r.learner_id = it->get<std::string>();
  }
  r.feature_path = j.at("feature_path").get<std::string>();

  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    const int v = it->get<int>();
    if (v != 0 && v != 1) throw ManifestError("label must be 0 or 1");
    r.label = v == 1 ? Label::intelligible : Label::non_intelligible;
  }
  if (auto it = j.find("phoneme_categories"); it != j.end() && !it->is_null()) {
    r.phoneme_categories = it->get<std::vector<std::string>>();
  }
  if (auto it = j.find("phone_boundaries"); it != j.end() && !it->is_null()) {
    std::vector<PhoneBoundary> bounds;
    for (const auto& pair : *it) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ManifestError("phone_boundaries entries must be [label, end_frame]");
      }
      const auto end = pair[1].get<std::int64_t>();
      if (end < 1) throw ManifestError("phone boundary end_frame must be >= 1");
      bounds.push_back({pair[0].get<std::string>(), static_cast<std::uint32_t>(end)});
    }
    r.phone_boundaries = std::move(bounds);
  }

  if (r.role == Role::learner) {
    if (!r.learner_id || r.learner_id->empty()) throw ManifestError("learner record without learner_id");
    if (!r.label) throw ManifestError("learner record without label");
  } else if (r.label) {
    throw ManifestError("teacher record must not carry a label");
  }
  if (r.phone_boundaries) {
    const auto& b = *r.phone_boundaries;
    if (b.empty()) throw ManifestError("phone_boundaries present but empty");
    for (std::size_t i = 1; i < b.size(); ++i) {
      if (b[i].end_frame <= b[i - 1].end_frame) {
        throw ManifestError("phone_boundaries end_frame values must be strictly increasing");
      }
    }
  }
  return r;
}

std::string describe(const UtteranceRecord& r) {
  std::string s = "stimulus '" + r.stimulus_id + "' " + std::string(to_string(r.role));
  if (r.learner_id) s += " '" + *r.learner_id + "'";
  return s;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                        std::string corpus_name, ManifestOptions options) {
  Manifest m;
  m.corpus_name = std::move(corpus_name);
  m.base_dir = base_dir;
  m.content_hash = fnv1a64(text);

  std::vector<std::string> problems;
  std::vector<std::size_t> line_of;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      m.records.push_back(parse_record(json::parse(line)));
      line_of.push_back(line_no);
    } catch (const std::exception& e) {
      problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::set<std::tuple<std::string, int, std::string>> seen;
  std::map<std::string, int> teachers;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& r = m.records[i];
    auto key = std::make_tuple(r.stimulus_id, static_cast<int>(r.role), r.learner_id.value_or(""));
    if (!seen.insert(key).second) {
      problems.push_back("line " + std::to_string(line_of[i]) + ": duplicate record for " +
                         describe(r));
    }
    if (r.role == Role::teacher) ++teachers[r.stimulus_id];
  }
  std::set<std::string> reported;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const auto& r = m.records[i];
    if (r.role != Role::learner) continue;
    const auto it = teachers.find(r.stimulus_id);
    if (it == teachers.end() && reported.insert(r.stimulus_id).second) {
      problems.push_back("line " + std::to_string(line_of[i]) + ": missing teacher for stimulus '" +
                         r.stimulus_id + "'");
    }
  }
  for (const auto& [stim, count] : teachers) {
    if (count > 1) problems.push_back("multiple teacher records for stimulus '" + stim + "'");
  }

  if (options.verify_features) {
    for (std::size_t i = 0; i < m.records.size(); ++i) {
      const auto& r = m.records[i];
      const auto path = m.resolve(r);
      if (!std::filesystem::exists(path)) {
        problems.push_back("line " + std::to_string(line_of[i]) + ": dangling feature path '" +
                           path.string() + "'");
        continue;
      }
      try {
        const auto header = read_feature_header(path);
        if (r.phone_boundaries && r.phone_boundaries->back().end_frame != header.frames) {
          problems.push_back("line " + std::to_string(line_of[i]) + ": last phone boundary " +
                             std::to_string(r.phone_boundaries->back().end_frame) +
                             " does not equal frame count " + std::to_string(header.frames));
        }
      } catch (const std::exception& e) {
        problems.push_back("line " + std::to_string(line_of[i]) + ": " + e.what());
      }
    }
  }

  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " manifest problem(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ManifestError(msg);
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, ManifestOptions options) {
  const std::string text = read_text_file(path);
  return parse_manifest(text, path.parent_path(), path.stem().string(), options);
}

std::string manifest_line(const UtteranceRecord& r) {
  nlohmann::ordered_json j;
  j["stimulus_id"] = r.stimulus_id;
  j["role"] = std::string(to_string(r.role));
  j["learner_id"] = r.learner_id ? nlohmann::ordered_json(*r.learner_id) : nullptr;
  j["feature_path"] = r.feature_path.generic_string();
  j["label"] = r.label ? nlohmann::ordered_json(static_cast<int>(*r.label)) : nullptr;
  j["phoneme_categories"] = r.phoneme_categories;
  if (r.phone_boundaries) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : *r.phone_boundaries) arr.push_back({b.phone_label, b.end_frame});
    j["phone_boundaries"] = std::move(arr);
  }
  return j.dump();
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::string text;
  for (const auto& r : manifest.records) {
    text += manifest_line(r);
    text += '\n';
  }
  write_text_file(path, text);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = kDigits[hash & 0xF];
    hash >>= 4;
  }
  return s;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace intel_align
