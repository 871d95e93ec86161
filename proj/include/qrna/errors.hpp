#pragma once

#include <stdexcept>
#include <string>

namespace qrna {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidBaseError : public Error {
 public:
  InvalidBaseError(int position, char symbol)
      : Error("invalid base '" + std::string(1, symbol) + "' at position " +
              std::to_string(position)),
        position(position),
        symbol(symbol) {}
  int position;
  char symbol;
};

class MissingEntryError : public Error {
 public:
  explicit MissingEntryError(const std::string& key)
      : Error("no table entry for " + key), key(key) {}
  std::string key;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class WrongWeightModeError : public Error {
 public:
  using Error::Error;
};

class WrongCandidateKindError : public Error {
 public:
  using Error::Error;
};

class ForbiddenLoopError : public Error {
 public:
  ForbiddenLoopError(int candidate, int loop_size)
      : Error("candidate " + std::to_string(candidate) + " has forbidden hairpin loop of size " +
              std::to_string(loop_size)),
        candidate(candidate),
        loop_size(loop_size) {}
  int candidate;
  int loop_size;
};

class ConflictingPairsError : public Error {
 public:
  explicit ConflictingPairsError(int base)
      : Error("base " + std::to_string(base) + " assigned two pairing partners"), base(base) {}
  int base;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

class EmptySampleError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class MalformedRowError : public ParseError {
 public:
  MalformedRowError(int line, const std::string& what)
      : ParseError("line " + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

class InconsistentPairingError : public ParseError {
 public:
  InconsistentPairingError(int i, int j)
      : ParseError("inconsistent pairing between bases " + std::to_string(i) + " and " +
                   std::to_string(j)),
        i(i),
        j(j) {}
  int i;
  int j;
};

class MissingFileError : public Error {
 public:
  explicit MissingFileError(const std::string& path) : Error("missing file: " + path), path(path) {}
  std::string path;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(const std::string& id) : Error("duplicate dataset id: " + id), id(id) {}
  std::string id;
};

}  // namespace qrna
