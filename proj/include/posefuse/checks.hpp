#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "posefuse/lie.hpp"

namespace posefuse {

struct CheckResult {
  std::string name;
  bool passed = false;
  int cases = 0;        // how many instances were exercised
  std::string detail;   // worst error, counts, etc.
};

// Geometry properties: exp/log roundtrip, group axioms, oplus/ominus duality,
// adjoint homomorphism, series-branch continuity.
std::vector<CheckResult> run_lie_checks(std::uint64_t seed = 2024);

// Loss properties: analytic gradients vs central finite differences,
// stationary point of the per-residual objective, iterative fit vs
// closed-form MLE.
std::vector<CheckResult> run_loss_checks(std::uint64_t seed = 2024);

// Closed-form transition Jacobian candidate, keyed by the control mean.
// Injectable so a deliberately broken form can be shown to fail the
// cross-check; defaults to the filter's own formula.
using TransitionJacobianFn = std::function<Matrix6d(const GroupPose&)>;

// Filter properties: transition Jacobian vs finite differences, identity
// measurement Jacobian, scalar correction vs the grid-integration oracle,
// covariance contraction, NEES calibration.
std::vector<CheckResult> run_filter_checks(
    std::uint64_t seed = 2024,
    const TransitionJacobianFn& transition_candidate = {});

}  // namespace posefuse
