#pragma once

// Self-validation suite: every cross-check the model can run on itself
// without external data.  Used by the `validate` subcommand and callable
// from tests.  Each check reports a measured residual against a bound;
// bounds scale with `tolerance_scale` so a tightened run re-evaluates the
// same residuals against stricter limits.

#include <cstdint>
#include <string>
#include <vector>

#include "cptsim/angular.hpp"
#include "cptsim/levels.hpp"

namespace cptsim {

struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct ValidationOptions {
  double tolerance_scale = 1.0; // < 1 tightens all bounds
  uint64_t seed = 1;            // randomized steady-vs-evolve configurations
  int randomized_configs = 5;
  // Test hook: perturb one cached CG entry before running, to prove the
  // table-vs-recomputation check catches corruption.
  bool inject_cg_fault = false;
  double cg_fault_epsilon = 1e-3;
};

std::vector<ValidationCheck> run_validation(const AtomicData& atom,
                                            const ValidationOptions& options = {});

} // namespace cptsim
