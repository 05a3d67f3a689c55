#pragma once

#include <stdexcept>
#include <string>

namespace cntuple {

// Base class for all engine errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid schema: bad field name, duplicate qualified name, malformed tree.
class SchemaError : public Error {
public:
  using Error::Error;
};

// Data that cannot be decoded: bad magic, short section, size mismatch,
// digest mismatch, unknown codec or format version.
class CorruptionError : public Error {
public:
  using Error::Error;
};

// Underlying storage failure (filesystem or simulated store).
class IoError : public Error {
public:
  using Error::Error;
};

// fetch/read of a key that was never written.
class NotFoundError : public Error {
public:
  using Error::Error;
};

// API misuse: commit after close, empty cluster, duplicate batch keys, ...
class UsageError : public Error {
public:
  using Error::Error;
};

// Malformed location string (path or daos:// URI).
class UriError : public Error {
public:
  using Error::Error;
};

} // namespace cntuple
