#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcalign {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define PCALIGN_DECLARE_ERROR(Name, Kind)                             \
  class Name : public Error {                                         \
   public:                                                            \
    using Error::Error;                                               \
    const char* kind() const noexcept override { return Kind; }       \
  };

PCALIGN_DECLARE_ERROR(ShapeError, "shape_error")
PCALIGN_DECLARE_ERROR(IndexError, "index_error")
PCALIGN_DECLARE_ERROR(DomainError, "domain_error")
PCALIGN_DECLARE_ERROR(NumericError, "numeric_error")
PCALIGN_DECLARE_ERROR(DegenerateActivity, "degenerate_activity")
PCALIGN_DECLARE_ERROR(ContractViolation, "contract_violation")
PCALIGN_DECLARE_ERROR(InferenceDiverged, "inference_diverged")
PCALIGN_DECLARE_ERROR(IoError, "io_error")

#undef PCALIGN_DECLARE_ERROR

/// Malformed binary input; carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  const char* kind() const noexcept override { return "format_error"; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Invalid experiment configuration; `fields` names every offending key.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> fields)
      : Error(join(fields)), fields_(std::move(fields)) {}
  const char* kind() const noexcept override { return "validation_error"; }
  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  static std::string join(const std::vector<std::string>& fields) {
    std::string out = "invalid config:";
    for (const auto& f : fields) out += " " + f + ";";
    return out;
  }
  std::vector<std::string> fields_;
};

}  // namespace pcalign
