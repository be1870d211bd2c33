#pragma once

#include <stdexcept>
#include <string>

namespace verienv {

enum class ErrorCode {
  schema_error,
  not_registered,
  duplicate_id,
  port_conflict,
  missing_script,
  lifecycle_error,
  start_timeout,
  script_exit,
  port_bind_failure,
  reset_drift,
  env_unavailable,
  corpus_format_error,
  unknown_policy,
  bad_argument,
  io_error,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class SchemaError : public Error {
 public:
  // `path` points at the offending field, e.g. "checks[2].expected".
  SchemaError(std::string path, const std::string& message)
      : Error(ErrorCode::schema_error, path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace verienv
