#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conjscope {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected);
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnknownFunction : public Error {
 public:
  explicit UnknownFunction(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnboundName : public Error {
 public:
  explicit UnboundName(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Evaluation left the function's domain (log of a non-positive value,
// division by zero, ...). Carries the printed offending subexpression.
class DomainError : public Error {
 public:
  DomainError(std::string what, std::string subexpression);
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(double t, double h);
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class NonFiniteState : public Error {
 public:
  explicit NonFiniteState(double t);
  double time() const noexcept { return t_; }

 private:
  double t_;
};

// (R1), (R2) or (I) failed numerically.
class RegularityViolation : public Error {
 public:
  RegularityViolation(std::string condition, std::string detail);
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

class SingularFrame : public Error {
 public:
  using Error::Error;
};

class ZeroDirection : public Error {
 public:
  using Error::Error;
};

class EndpointNotZero : public Error {
 public:
  using Error::Error;
};

class DegenerateMetric : public Error {
 public:
  using Error::Error;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

class UnknownEntry : public Error {
 public:
  explicit UnknownEntry(const std::string& name);
};

class MissingParam : public Error {
 public:
  MissingParam(const std::string& entry, const std::string& param);
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace conjscope
