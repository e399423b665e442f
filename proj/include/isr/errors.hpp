#pragma once

#include <stdexcept>
#include <string>

namespace isr {

// Parameters that no protocol instance can satisfy (e.g. q < 1.95 for B_Y,
// rho = 0 in the compression scheme). The CLI maps this to exit code 3.
class InfeasibleParameters : public std::domain_error {
 public:
  explicit InfeasibleParameters(const std::string& what) : std::domain_error(what) {}
};

// Malformed experiment configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isr
