#pragma once

#include <stdexcept>
#include <string>

namespace lds {

/// Base class for every error raised by the library.
///
/// The category maps onto the CLI exit codes: configuration problems exit
/// with 2, data problems with 3 and numerical failures with 4.
class Error : public std::runtime_error {
 public:
  enum class Category { kConfig, kData, kNumerical };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

  int exit_code() const noexcept {
    switch (category_) {
      case Category::kConfig: return 2;
      case Category::kData: return 3;
      case Category::kNumerical: return 4;
    }
    return 1;
  }

 private:
  Category category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Category::kData, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Category::kNumerical, what) {}
};

}  // namespace lds
