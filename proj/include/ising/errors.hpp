#pragma once

#include <stdexcept>
#include <string>

namespace ising {

/// Input model violates a structural precondition (bad index, self-loop, ...).
class InvalidModelError : public std::runtime_error {
 public:
  explicit InvalidModelError(const std::string& what) : std::runtime_error(what) {}
};

/// The model contains a nonplanar triconnected component larger than the
/// configured enumeration bound; it is outside the tractable family.
class UnsupportedTopologyError : public std::runtime_error {
 public:
  explicit UnsupportedTopologyError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal consistency failure (broken invariant, numerical breakdown with
/// no remaining fallback). Indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ising
