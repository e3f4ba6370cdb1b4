#pragma once

#include <string>
#include <vector>

#include "ounts/calibration.hpp"
#include "ounts/config.hpp"

namespace ounts {

struct CommandResult {
    std::string payload;             // file or stdout content
    std::vector<std::string> notes;  // human-readable lines for stderr
};

// Spot (or factor) paths on a uniform grid; CSV columns path_id,t,S (or N).
CommandResult cmd_simulate(const RunConfig& c);
// Cumulant suite per scheme, step and path count, plus the lch-vs-quadrature grid.
CommandResult cmd_validate(const RunConfig& c);
// Dispatches to the pricing engine selected by contract.type.
CommandResult cmd_price(const RunConfig& c);
// Calibration pipeline on CSV inputs, or on a synthetic market when `synthetic` is set.
CommandResult cmd_calibrate(const RunConfig& c, bool synthetic);

// JSON whose "model" section loads back through build_config.
std::string calibration_json(const CalibrationResult& r, int indent = 2);

}  // namespace ounts
