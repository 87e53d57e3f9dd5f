#pragma once

#include <stdexcept>
#include <string>

namespace zeqr {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reader asked to answer with nothing to read.
class NoContextError : public Error {
 public:
  using Error::Error;
};

// Remote service unreachable after all attempts.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::string endpoint, int attempts)
      : Error(what), endpoint_(std::move(endpoint)), attempts_(attempts) {}
  const std::string& endpoint() const { return endpoint_; }
  int attempts() const { return attempts_; }

 private:
  std::string endpoint_;
  int attempts_;
};

// Remote service answered, but the answer breaks the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// External retriever failed; names the endpoint.
class RetrievalError : public Error {
 public:
  RetrievalError(const std::string& what, std::string endpoint)
      : Error(what), endpoint_(std::move(endpoint)) {}
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
};

}  // namespace zeqr
