#pragma once

#include <stdexcept>
#include <string>

namespace rum {

/// Broad failure families; the CLI maps them onto process exit codes.
enum class ErrorCategory { config, input, numerical, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define RUM_DEFINE_ERROR(Name, Category)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorCategory::Category, \
                                                   #Name ": " + what) {}   \
  }

RUM_DEFINE_ERROR(ConfigError, config);
RUM_DEFINE_ERROR(IoError, input);
RUM_DEFINE_ERROR(ParseError, input);
RUM_DEFINE_ERROR(EmptyGraph, input);
RUM_DEFINE_ERROR(UnknownNode, input);
RUM_DEFINE_ERROR(MissingNode, input);
RUM_DEFINE_ERROR(DimensionMismatch, input);
RUM_DEFINE_ERROR(ImportFormatError, input);
RUM_DEFINE_ERROR(CommunityTooLarge, input);
RUM_DEFINE_ERROR(NoCommunitiesFound, input);
RUM_DEFINE_ERROR(EmptyTrainingSet, input);
RUM_DEFINE_ERROR(SingleClassSplit, input);
RUM_DEFINE_ERROR(DivergenceDetected, numerical);

#undef RUM_DEFINE_ERROR

}  // namespace rum
