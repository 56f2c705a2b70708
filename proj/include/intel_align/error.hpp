#ifndef INTEL_ALIGN_ERROR_HPP
#define INTEL_ALIGN_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace intel_align {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed FSEQ data. `offset` is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace intel_align

#endif  // INTEL_ALIGN_ERROR_HPP
