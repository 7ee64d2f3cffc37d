#pragma once
#include <stdexcept>
#include <string>

namespace coulomb {

// Error classes map to CLI exit codes: usage errors exit 2, solver
// failures exit 3, reproduction mismatches exit 4.
struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& m) : std::runtime_error(m) {}
};
struct singularity_error : std::runtime_error {
  explicit singularity_error(const std::string& m) : std::runtime_error(m) {}
};
struct iteration_error : std::runtime_error {
  double last_residual;
  iteration_error(const std::string& m, double r) : std::runtime_error(m), last_residual(r) {}
};
struct solver_error : std::runtime_error {
  explicit solver_error(const std::string& m) : std::runtime_error(m) {}
};
struct box_too_small_error : std::runtime_error {
  explicit box_too_small_error(const std::string& m) : std::runtime_error(m) {}
};
struct capability_error : std::runtime_error {
  explicit capability_error(const std::string& m) : std::runtime_error(m) {}
};
struct usage_error : std::runtime_error {
  explicit usage_error(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace coulomb
