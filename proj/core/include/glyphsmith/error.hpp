#pragma once

#include <stdexcept>
#include <string>

namespace glyphsmith {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (tables, path strings, config files). Carries the
/// 1-based line number when one is known, 0 otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Operand shapes or sizes that do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Binary/structured file that fails its format checks (magic, version,
/// truncated payload, tensor manifest mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that is well formed but unusable (empty dataset, missing glyph).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or singular matrices.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace glyphsmith
