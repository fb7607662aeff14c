#pragma once

#include <stdexcept>
#include <string>

namespace segsem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments or mismatched shapes.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File-system and parse failures. The message always names the offending path.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace segsem
