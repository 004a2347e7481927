#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace visgrade {

/// Base of every error raised by the grader. `kind()` is the stable
/// class name used in reports and in the instructor sidecar.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define VISGRADE_SIMPLE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// dom-snapshot
VISGRADE_SIMPLE_ERROR(UnparseableDocument);
VISGRADE_SIMPLE_ERROR(InvalidSelector);
VISGRADE_SIMPLE_ERROR(UnknownColor);

class MalformedTransform : public Error {
 public:
  MalformedTransform(std::string token, const std::string& message)
      : Error("MalformedTransform", message), token_(std::move(token)) {}
  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

class NonNumericAttribute : public Error {
 public:
  NonNumericAttribute(std::string attribute, const std::string& value)
      : Error("NonNumericAttribute",
              "attribute '" + attribute + "' is not numeric: '" + value + "'"),
        attribute_(std::move(attribute)) {}
  const std::string& attribute() const noexcept { return attribute_; }

 private:
  std::string attribute_;
};

// rubric-spec
class YamlSyntax : public Error {
 public:
  YamlSyntax(int line, const std::string& message)
      : Error("YamlSyntax", "line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string path, const std::string& message)
      : Error("SchemaViolation", path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DanglingReference : public Error {
 public:
  DanglingReference(std::string owner, std::string missing)
      : Error("DanglingReference", "'" + owner + "' references undeclared '" + missing + "'"),
        owner_(std::move(owner)),
        missing_(std::move(missing)) {}
  const std::string& owner() const noexcept { return owner_; }
  const std::string& missing() const noexcept { return missing_; }

 private:
  std::string owner_;
  std::string missing_;
};

// layout-inspector
VISGRADE_SIMPLE_ERROR(NoSvgFound);

class MultipleSvg : public Error {
 public:
  explicit MultipleSvg(std::size_t count)
      : Error("MultipleSvg", "svg selector matched " + std::to_string(count) + " elements"),
        count_(count) {}
  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t count_;
};

// scale-inference
VISGRADE_SIMPLE_ERROR(AxisNotFound);
VISGRADE_SIMPLE_ERROR(NoTicks);
VISGRADE_SIMPLE_ERROR(DomainViolation);
VISGRADE_SIMPLE_ERROR(UnknownCategory);
VISGRADE_SIMPLE_ERROR(QuantileMismatch);

class InsufficientTicks : public Error {
 public:
  InsufficientTicks(std::size_t count, const std::string& message)
      : Error("InsufficientTicks", message), count_(count) {}
  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t count_;
};

class PoorFit : public Error {
 public:
  PoorFit(double r2, std::string kind, const std::string& message)
      : Error("PoorFit", message), r2_(r2), scale_kind_(std::move(kind)) {}
  double r2() const noexcept { return r2_; }
  const std::string& scale_kind() const noexcept { return scale_kind_; }

 private:
  double r2_;
  std::string scale_kind_;
};

class WrongColorCount : public Error {
 public:
  WrongColorCount(std::size_t found, std::size_t expected)
      : Error("WrongColorCount", "found " + std::to_string(found) + " distinct colors, expected " +
                                     std::to_string(expected)),
        found_(found),
        expected_(expected) {}
  std::size_t found() const noexcept { return found_; }
  std::size_t expected() const noexcept { return expected_; }

 private:
  std::size_t found_;
  std::size_t expected_;
};

// checkers
VISGRADE_SIMPLE_ERROR(InsufficientMarks);

// interaction-engine
VISGRADE_SIMPLE_ERROR(ServerUnreachable);
VISGRADE_SIMPLE_ERROR(PageLoadTimeout);
VISGRADE_SIMPLE_ERROR(PageNotFound);
VISGRADE_SIMPLE_ERROR(JavascriptFatal);
VISGRADE_SIMPLE_ERROR(ScreenshotFailed);
VISGRADE_SIMPLE_ERROR(ProtocolError);

class TargetNotFound : public Error {
 public:
  TargetNotFound(std::string selector, std::size_t step)
      : Error("TargetNotFound",
              "step " + std::to_string(step) + ": no element matches '" + selector + "'"),
        selector_(std::move(selector)),
        step_(step) {}
  const std::string& selector() const noexcept { return selector_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::string selector_;
  std::size_t step_;
};

class ChainInterrupted : public Error {
 public:
  ChainInterrupted(std::size_t step, const std::string& cause)
      : Error("ChainInterrupted", "step " + std::to_string(step) + ": " + cause), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// grader-harness
VISGRADE_SIMPLE_ERROR(PortExhausted);
VISGRADE_SIMPLE_ERROR(RubricInvalid);
VISGRADE_SIMPLE_ERROR(SessionFailure);
VISGRADE_SIMPLE_ERROR(PathTraversalAttempt);

#undef VISGRADE_SIMPLE_ERROR

}  // namespace visgrade
