#pragma once

#include <stdexcept>
#include <string>

namespace ewgn {

// Error taxonomy mapped to process exit codes:
//   config/dimension -> 2, data/io -> 3, numeric -> 4.
class Error : public std::runtime_error {
 public:
  enum class Kind { Config, Dimension, Data, Io, Numeric };

  Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  Kind kind() const { return kind_; }

  int exit_code() const {
    switch (kind_) {
      case Kind::Config:
      case Kind::Dimension:
        return 2;
      case Kind::Data:
      case Kind::Io:
        return 3;
      case Kind::Numeric:
        return 4;
    }
    return 1;
  }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(Kind::Config, msg) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(Kind::Dimension, msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(Kind::Data, msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(Kind::Io, msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(Kind::Numeric, msg) {}
};

}  // namespace ewgn
