#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace therafuzz {

/// 1-based position in a source document.
struct Location {
  std::size_t line = 1;
  std::size_t column = 1;

  friend bool operator==(const Location&, const Location&) = default;
};

enum class Severity { error, warning };

inline const char* to_string(Severity s) { return s == Severity::error ? "error" : "warning"; }

struct Diagnostic {
  Severity severity = Severity::error;
  Location location;
  std::string message;
  std::string code;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::error) return true;
  return false;
}

/// `line:col: severity[code] message`, the form printed by the CLI after the file name.
inline std::string format_diagnostic(const Diagnostic& d) {
  return std::to_string(d.location.line) + ":" + std::to_string(d.location.column) + ": " +
         to_string(d.severity) + "[" + d.code + "] " + d.message;
}

/// Base for every error thrown by the library. `code()` is a stable machine tag.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// A value lies outside the domain of an operation (e.g. input outside a universe).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message) : Error("out-of-range", message) {}
};

/// A structural invariant was violated while constructing a value.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message, std::string code = "invalid")
      : Error(std::move(code), message) {}
};

/// Every rule fired at strength 0, so the aggregated output set is empty.
class NoRuleFired : public Error {
 public:
  explicit NoRuleFired(const std::string& message) : Error("no-rule-fired", message) {}
};

/// A consultation could not run: missing inputs, out-of-range inputs, dangling clauses.
class ConsultationError : public Error {
 public:
  ConsultationError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

/// Parsing or validation failed; carries every diagnostic that was produced.
class DiagnosticsError : public Error {
 public:
  explicit DiagnosticsError(std::vector<Diagnostic> diags, const std::string& message = "invalid knowledge base")
      : Error("diagnostics", message), diagnostics_(std::move(diags)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace therafuzz
