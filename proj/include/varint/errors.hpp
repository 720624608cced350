// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT

#ifndef VARINT_ERRORS_HPP
#define VARINT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace varint {

/// Input left the injectivity/convergence domain of a retraction map.
/// Usually means the time step is too large for the displacement.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed scene document (syntax level).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Well-formed document or arguments violating a model invariant.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Articulated-inertia pivot collapsed (degenerate inertia along a joint axis).
class SingularJointError : public std::runtime_error {
public:
  explicit SingularJointError(const std::string& what) : std::runtime_error(what) {}
};

/// Root-finder hit its iteration budget; carries the frame it happened on
/// when thrown from a stepping loop.
class NonConvergenceError : public std::runtime_error {
public:
  explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace varint

#endif
