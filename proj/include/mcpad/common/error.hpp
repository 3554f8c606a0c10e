#pragma once

#include <stdexcept>
#include <string>

namespace mcpad {

/// Base class of every error raised by the framework.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

/// Manifest or file schema violation; the message carries the offending field path.
class SchemaError : public Error {
public:
  SchemaError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class RectificationError : public GeometryError {
public:
  using GeometryError::GeometryError;
};

class AlignmentError : public Error {
public:
  using Error::Error;
};

class StackingError : public Error {
public:
  using Error::Error;
};

class ProtocolError : public Error {
public:
  using Error::Error;
};

class ModelError : public Error {
public:
  using Error::Error;
};

class EvaluationError : public Error {
public:
  using Error::Error;
};

}  // namespace mcpad
