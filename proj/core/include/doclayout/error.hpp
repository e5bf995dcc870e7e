#pragma once

#include <stdexcept>
#include <string>

namespace doclayout {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input files or values that violate a documented format or invariant.
class MalformedInput : public Error {
 public:
  using Error::Error;
};

// Two masks (or a mask and a document) with incompatible sizes.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Lookup of a document id that is not present.
class MissingDocument : public Error {
 public:
  explicit MissingDocument(const std::string& id, const std::string& where)
      : Error("document '" + id + "' missing from " + where), id_(id) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

}  // namespace doclayout
