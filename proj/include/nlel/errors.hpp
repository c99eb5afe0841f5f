#pragma once

#include <stdexcept>

namespace nlel {

// a hypothesis of the model fails (kernel hypotheses, ellipticity, compatibility)
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// the linear solver did not deliver (stagnation, indefinite matrix)
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nlel
