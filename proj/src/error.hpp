#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace toolexpander {

// Values double as CLI exit codes and C API status codes.
enum class ErrorCode : int {
  Config = 1,
  Data = 2,
  Runtime = 3,
  InvalidArgument = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error config_error(const std::string& msg) { return Error(ErrorCode::Config, msg); }
inline Error data_error(const std::string& msg) { return Error(ErrorCode::Data, msg); }
inline Error runtime_error(const std::string& msg) { return Error(ErrorCode::Runtime, msg); }
inline Error invalid_argument(const std::string& msg) {
  return Error(ErrorCode::InvalidArgument, msg);
}

enum class ParseErrorKind {
  UnclosedTag,
  OverlappingTags,
  JsonInvalid,
  MissingField,
  ArgumentsNotObject,
};

/// Failure to parse model output. `tag`/`position` are set for tag errors,
/// `field` for MissingField.
class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, const std::string& message, std::string tag = {},
             std::size_t position = 0, std::string field = {})
      : Error(ErrorCode::Data, message),
        kind_(kind),
        tag_(std::move(tag)),
        position_(position),
        field_(std::move(field)) {}

  ParseErrorKind kind() const noexcept { return kind_; }
  const std::string& tag() const noexcept { return tag_; }
  std::size_t position() const noexcept { return position_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ParseErrorKind kind_;
  std::string tag_;
  std::size_t position_;
  std::string field_;
};

}  // namespace toolexpander
