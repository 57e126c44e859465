#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace loqi {

enum class ErrorCategory { validation, format, environment, external_tool, numeric, io };

std::string_view category_name(ErrorCategory c);

/// Base for every error the library raises on purpose. The CLI maps
/// categories onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what) : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::format, what) {}
  FormatError(const std::string& source, std::size_t line, const std::string& what)
      : Error(ErrorCategory::format, source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class EnvironmentError : public Error {
 public:
  explicit EnvironmentError(const std::string& what) : Error(ErrorCategory::environment, what) {}
};

class ExternalToolError : public Error {
 public:
  ExternalToolError(const std::string& what, int exit_code, std::string stderr_text)
      : Error(ErrorCategory::external_tool, what + " (exit " + std::to_string(exit_code) + "): " + stderr_text),
        exit_code_(exit_code),
        stderr_(std::move(stderr_text)) {}
  int exit_code() const noexcept { return exit_code_; }
  const std::string& stderr_text() const noexcept { return stderr_; }

 private:
  int exit_code_;
  std::string stderr_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

}  // namespace loqi
