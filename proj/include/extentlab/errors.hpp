#ifndef EXTENTLAB_ERRORS_HPP_
#define EXTENTLAB_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace extentlab {

// Base of every error raised by the library. `code()` is a stable
// machine-readable identifier used by the CLI and the annotation wire
// protocol ({"code","message"}).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define EXTENTLAB_DEFINE_ERROR(Name, code_string)                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message)                      \
        : Error(code_string, message) {}                           \
  }

EXTENTLAB_DEFINE_ERROR(IngestError, "ingest_error");
EXTENTLAB_DEFINE_ERROR(AlignmentError, "alignment_error");
EXTENTLAB_DEFINE_ERROR(ConsistencyError, "consistency_error");
EXTENTLAB_DEFINE_ERROR(CanonicalizationError, "canonicalization_error");
EXTENTLAB_DEFINE_ERROR(SplitError, "split_error");
EXTENTLAB_DEFINE_ERROR(SchemaVersionError, "schema_version_error");
EXTENTLAB_DEFINE_ERROR(ContractError, "contract_error");
EXTENTLAB_DEFINE_ERROR(CapabilityError, "capability_error");
EXTENTLAB_DEFINE_ERROR(ValidationError, "validation_error");
EXTENTLAB_DEFINE_ERROR(ConflictError, "conflict_error");
EXTENTLAB_DEFINE_ERROR(NotFoundError, "not_found");
EXTENTLAB_DEFINE_ERROR(InvalidArgument, "invalid_argument");
EXTENTLAB_DEFINE_ERROR(IoError, "io_error");

#undef EXTENTLAB_DEFINE_ERROR

// Malformed structured input. Carries the 1-based line of the offending
// record (0 when the input is not line oriented).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("parse_error", message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace extentlab

#endif  // EXTENTLAB_ERRORS_HPP_
