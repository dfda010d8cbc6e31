#include "conjscope/errors.hpp"

#include <sstream>
#include <utility>

namespace conjscope {

namespace {

std::string syntax_message(std::size_t offset, const std::string& expected) {
  std::ostringstream os;
  os << "syntax error at offset " << offset << ": expected " << expected;
  return os.str();
}

std::string step_message(double t, double h) {
  std::ostringstream os;
  os.precision(17);
  os << "step size underflow at t=" << t << " (h=" << h << ")";
  return os.str();
}

std::string nonfinite_message(double t) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite state at t=" << t;
  return os.str();
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::string expected)
    : Error(syntax_message(offset, expected)), offset_(offset), expected_(std::move(expected)) {}

UnknownFunction::UnknownFunction(std::string name)
    : Error("unknown function '" + name + "'"), name_(std::move(name)) {}

UnboundName::UnboundName(std::string name)
    : Error("unbound name '" + name + "'"), name_(std::move(name)) {}

DomainError::DomainError(std::string what, std::string subexpression)
    : Error(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

StepSizeUnderflow::StepSizeUnderflow(double t, double h) : Error(step_message(t, h)), t_(t) {}

NonFiniteState::NonFiniteState(double t) : Error(nonfinite_message(t)), t_(t) {}

RegularityViolation::RegularityViolation(std::string condition, std::string detail)
    : Error("regularity violation " + condition + ": " + detail), condition_(std::move(condition)) {}

UnknownEntry::UnknownEntry(const std::string& name) : Error("unknown catalog entry '" + name + "'") {}

MissingParam::MissingParam(const std::string& entry, const std::string& param)
    : Error("catalog entry '" + entry + "' requires parameter '" + param + "'") {}

}  // namespace conjscope
