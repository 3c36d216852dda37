#pragma once

#include <stdexcept>
#include <string>

namespace pkgrelax {

// Base of every error raised by the library. The CLI maps each subclass to a
// stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text: CSV cells, JSON documents, flag values.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A reference to an attribute that the item table does not have.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that breaks a data invariant (duplicate ids, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Caller broke a precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Instance exceeds a hard enumeration cap (brute force, optimal relaxation).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Search budget (node limit) exhausted before optimality was proven.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Workload generation could not produce a feasible query.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace pkgrelax
