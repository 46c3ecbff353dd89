#pragma once

#include <stdexcept>
#include <string>

namespace mvforge {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Unrecoverable problem reading a manifest or corpus store.
class IngestError : public Error {
 public:
  using Error::Error;
};

// Audio or video could not be decoded.
class MediaError : public Error {
 public:
  using Error::Error;
};

class NoRhythmicContent : public Error {
 public:
  NoRhythmicContent() : Error("no rhythmic content") {}
};

class NoTonalContent : public Error {
 public:
  NoTonalContent() : Error("no tonal content") {}
};

// Backend could not be reached or asked us to back off. Safe to retry.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Backend answered, but not in the shape we asked for.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string raw_payload)
      : Error(what), raw_(std::move(raw_payload)) {}
  const std::string& raw_payload() const { return raw_; }

 private:
  std::string raw_;
};

class TaggingError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvforge
