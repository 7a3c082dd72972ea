#ifndef CRN_ERRORS_HPP
#define CRN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace crn {

/// Network-file syntax or semantic error, with 1-based location.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

/// Enlargement validity failure. `certificate()` carries an exact witness of
/// the violated rank condition (a dependency or separating functional).
class EnlargeError : public std::runtime_error {
 public:
  explicit EnlargeError(const std::string& msg, std::string certificate = {})
      : std::runtime_error(msg), certificate_(std::move(certificate)) {}
  const std::string& certificate() const { return certificate_; }

 private:
  std::string certificate_;
};

/// Mass-action evaluation failure: non-finite result or fractional power of a
/// non-positive concentration.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrator failure (step-size underflow, repeated evaluation failures).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton/shooting failure or an ill-posed numerical request.
class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

} // namespace crn

#endif
