#pragma once

#include <stdexcept>
#include <string>

namespace hlwnet {

/// Invalid or inconsistent experiment configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine was called outside its domain (e.g. coincident AP/UE).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// More UEs than a fixed-capacity structure can hold, or a search budget overrun.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Model missing, untrained, or shape-inconsistent with its input.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or mismatched artifact file (dataset, model, report).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hlwnet
