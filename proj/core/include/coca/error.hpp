#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace coca {

/// Base for every error raised by the library. `name()` is a stable
/// identifier that the CLI reports in its structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string_view name, const std::string& what)
      : std::runtime_error(what), name_(name) {}

  [[nodiscard]] std::string_view name() const noexcept { return name_; }

 private:
  std::string_view name_;
};

#define COCA_DEFINE_ERROR(Type)                                          \
  class Type : public Error {                                            \
   public:                                                               \
    explicit Type(const std::string& what) : Error(#Type, what) {}       \
  };

COCA_DEFINE_ERROR(InvalidData)
COCA_DEFINE_ERROR(InvalidInput)
COCA_DEFINE_ERROR(InvalidDimension)
COCA_DEFINE_ERROR(InvalidRadius)
COCA_DEFINE_ERROR(InvalidVector)
COCA_DEFINE_ERROR(NumericalError)
COCA_DEFINE_ERROR(NotPsd)
COCA_DEFINE_ERROR(DegenerateIterate)
COCA_DEFINE_ERROR(AllZeroSolution)

#undef COCA_DEFINE_ERROR

/// A column with zero spread; rank and moment based estimators cannot scale it.
class DegenerateColumn : public Error {
 public:
  explicit DegenerateColumn(std::size_t column);
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

}  // namespace coca
