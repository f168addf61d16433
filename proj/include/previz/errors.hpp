#pragma once

#include <stdexcept>
#include <string>

namespace previz {

// Exit-code families used by the CLI. Library code throws typed errors;
// the CLI maps them to process exit codes.
enum class ErrorCode {
  internal = 1,
  invalid_input = 2,
  configuration = 3,
  backend = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct PlacementInfeasible : Error {
  explicit PlacementInfeasible(const std::string& what) : Error(ErrorCode::invalid_input, what) {}
};

struct ParseError : Error {
  ParseError(const std::string& location, const std::string& what)
      : Error(ErrorCode::invalid_input, location + ": " + what), location(location) {}
  std::string location;
};

struct UnparseableOutput : ParseError {
  using ParseError::ParseError;
};

struct BackendError : Error {
  explicit BackendError(const std::string& what) : Error(ErrorCode::backend, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCode::configuration, what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorCode::invalid_input, what) {}
};

struct NoPath : Error {
  explicit NoPath(const std::string& what) : Error(ErrorCode::invalid_input, what) {}
};

struct InvalidParams : Error {
  explicit InvalidParams(const std::string& what) : Error(ErrorCode::invalid_input, what) {}
};

struct EmptyCatalog : Error {
  explicit EmptyCatalog(const std::string& what) : Error(ErrorCode::invalid_input, what) {}
};

struct NoCandidates : Error {
  explicit NoCandidates(const std::string& what) : Error(ErrorCode::invalid_input, what) {}
};

}  // namespace previz
