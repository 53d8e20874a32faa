#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace colorgs {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A raw parameter is non-finite or otherwise unusable.
class InvalidParameterError : public Error {
 public:
  InvalidParameterError(std::size_t primitive, const std::string& what);
  [[nodiscard]] std::size_t primitive() const noexcept { return primitive_; }

 private:
  std::size_t primitive_;
};

/// Mismatched shapes or inconsistent configuration between components.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared while rendering.
class RenderError : public Error {
 public:
  RenderError(int x, int y, std::size_t primitive, const std::string& what);
};

/// Missing, malformed or inconsistent dataset files.
class DatasetError : public Error {
 public:
  DatasetError(std::string path, const std::string& what);
  [[nodiscard]] const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Non-finite gradient or parameter update.
class GradientError : public Error {
 public:
  using Error::Error;
};

/// Training loss blew up.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace colorgs
