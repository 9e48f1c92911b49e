#pragma once

#include <stdexcept>
#include <string>

namespace ionsim {

// Thrown when omega_y <= omega_x or omega_z <= omega_x (imaginary rocking frequency).
class RockingUnstable : public std::runtime_error {
 public:
  explicit RockingUnstable(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidSideband : public std::runtime_error {
 public:
  explicit InvalidSideband(const std::string& msg) : std::runtime_error(msg) {}
};

// Population reached the top Fock levels beyond tail tolerance and regrowth cap.
class TruncationOverflow : public std::runtime_error {
 public:
  explicit TruncationOverflow(const std::string& msg) : std::runtime_error(msg) {}
};

class FitDiverged : public std::runtime_error {
 public:
  explicit FitDiverged(const std::string& msg) : std::runtime_error(msg) {}
};

class NoRoot : public std::runtime_error {
 public:
  explicit NoRoot(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ionsim
