#pragma once

#include <stdexcept>
#include <string>

namespace ctxrerank {

// Bad input data or configuration: maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure during an otherwise valid run: maps to CLI exit code 2.
class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ctxrerank
