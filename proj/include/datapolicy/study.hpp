#pragma once

#include <vector>

#include "datapolicy/clqr.hpp"
#include "datapolicy/policy.hpp"
#include "datapolicy/safe_set.hpp"

namespace datapolicy {

/// Input weight of the double-integrator benchmark cost x'x + 0.01 u'u.
inline constexpr double kStudyInputWeight = 0.01;

QuadStageCost study_cost(double input_weight = kStudyInputWeight);

/// (-1, 3).
Vector study_seed_state();
/// (2.9033, 1.2959): seed of the second optimal trajectory.
Vector study_second_seed_state();

/// The eleven benchmark initial states; the first is the seed state.
std::vector<Vector> study_initial_states();

/// ClqrConfig defaults with exact_terminal set.
ClqrConfig study_clqr_config();

/// Single-CLQR-trajectory store for the double integrator.
SafeSetStore seed_store(const Vector& x0 = study_seed_state(), double input_weight = kStudyInputWeight,
                        const ClqrConfig& config = study_clqr_config());

}  // namespace datapolicy
