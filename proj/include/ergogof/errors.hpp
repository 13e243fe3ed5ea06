#pragma once

#include <stdexcept>
#include <string>

namespace ergogof {

/// Broad failure class; the CLI maps it to an exit code.
enum class ErrorCategory { config, numerical };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorCategory category, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), category_(category) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string kind_;
  ErrorCategory category_;
};

#define ERGOGOF_DEFINE_ERROR(Name, Category)                                  \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(#Name, Category, what) {} \
  };

ERGOGOF_DEFINE_ERROR(QuadratureDivergence, ErrorCategory::numerical)
ERGOGOF_DEFINE_ERROR(NormalizationFailure, ErrorCategory::numerical)
ERGOGOF_DEFINE_ERROR(TailDivergence, ErrorCategory::numerical)
ERGOGOF_DEFINE_ERROR(BlowupError, ErrorCategory::numerical)
ERGOGOF_DEFINE_ERROR(GridTooNarrow, ErrorCategory::numerical)
ERGOGOF_DEFINE_ERROR(WeightVanishes, ErrorCategory::numerical)
ERGOGOF_DEFINE_ERROR(DomainError, ErrorCategory::config)
ERGOGOF_DEFINE_ERROR(GridMismatch, ErrorCategory::config)
ERGOGOF_DEFINE_ERROR(LevelNotTabulated, ErrorCategory::config)
ERGOGOF_DEFINE_ERROR(InsufficientSamples, ErrorCategory::config)
ERGOGOF_DEFINE_ERROR(VersionMismatch, ErrorCategory::config)
ERGOGOF_DEFINE_ERROR(CorruptFile, ErrorCategory::config)
ERGOGOF_DEFINE_ERROR(ConfigError, ErrorCategory::config)
ERGOGOF_DEFINE_ERROR(MissingInputs, ErrorCategory::config)

#undef ERGOGOF_DEFINE_ERROR

}  // namespace ergogof
