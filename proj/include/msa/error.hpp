#pragma once

#include <stdexcept>
#include <string>

namespace msa {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor/layer dimension mismatches. Messages name the offending shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value outside its documented domain (e.g. sentiment score outside [-3,+3]).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A violated API precondition (non-scalar loss, empty fold, task-set mismatch...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files: datasets, manifests, checkpoints.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates the documented schema
/// (wrong feature dimension, bad fold name, ...).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace msa
