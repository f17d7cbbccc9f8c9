#pragma once

#include <stdexcept>
#include <string>

namespace ember {

// Every failure raised by the library carries a short machine-readable kind
// ("dimension", "format", ...) so the CLI can emit one parsable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& m) : Error("dimension", m) {}
};

struct EmptyInputError : Error {
  explicit EmptyInputError(const std::string& m) : Error("empty_input", m) {}
};

struct LabelError : Error {
  explicit LabelError(const std::string& m) : Error("label", m) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format", m) {}
};

struct IoError : Error {
  IoError(const std::string& path, const std::string& m)
      : Error("io", m + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};

struct DecodeError : Error {
  explicit DecodeError(const std::string& m) : Error("decode", m) {}
};

}  // namespace ember
