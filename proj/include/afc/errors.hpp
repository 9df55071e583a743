#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace afc {

/// Base class of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  /// Stable identifier of the failure, e.g. "NotStabilizable".
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define AFC_DEFINE_ERROR(Name)                                          \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(#Name, what) {}      \
  };

AFC_DEFINE_ERROR(DimensionMismatch)
AFC_DEFINE_ERROR(AssumptionViolated)
AFC_DEFINE_ERROR(NoValidStress)
AFC_DEFINE_ERROR(NotLocalizable)
AFC_DEFINE_ERROR(NotStabilizable)
AFC_DEFINE_ERROR(NotDetectable)
AFC_DEFINE_ERROR(NoStabilizingSolution)
AFC_DEFINE_ERROR(NumericalDivergence)
AFC_DEFINE_ERROR(InvalidConstants)
AFC_DEFINE_ERROR(UnknownPreset)
AFC_DEFINE_ERROR(ParseError)
AFC_DEFINE_ERROR(IoError)

#undef AFC_DEFINE_ERROR

/// Raised when a leader target cannot be made an equilibrium of the closed
/// loop. Carries the offending leaders (0-based) and their residuals.
class InfeasibleTarget : public Error {
 public:
  InfeasibleTarget(const std::string& what,
                   std::vector<std::pair<int, double>> offenders)
      : Error("InfeasibleTarget", what), offenders_(std::move(offenders)) {}

  const std::vector<std::pair<int, double>>& offenders() const noexcept {
    return offenders_;
  }

 private:
  std::vector<std::pair<int, double>> offenders_;
};

/// Scenario validation failure listing every violated constraint.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error("ValidationError", join(violations)),
        violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace afc
