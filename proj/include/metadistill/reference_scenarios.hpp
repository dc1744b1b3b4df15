#pragma once

#include "metadistill/engine.hpp"

namespace metadistill {

/// The two bundled 3-token reference scenarios, also shipped as
/// scenarios/appendix_a_anchored.json and scenarios/appendix_a_drift.json.
/// T0 = (0.6, 0.3, 0.1), S0 = (0.2, 0.5, 0.3).

/// Convex mixture with alpha = 0.3, exact realizability, 10 generations.
Scenario reference_anchored_scenario();

/// Unanchored recursion with calibrated drift epsilon = 0.05 per generation.
Scenario reference_drift_scenario();

}  // namespace metadistill
