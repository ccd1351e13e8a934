#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "uslam/io/calibration.hpp"
#include "uslam/sim/scenario.hpp"

namespace uslam {

/// A complete simulation recipe: survey pattern, landmark world, sensor
/// configuration, and optionally an inline calibration. The file-level seed
/// is mirrored into both the survey and the sensor config.
struct Scenario {
    std::string name;
    SurveySpec survey;
    WorldSpec world;
    SimConfig config;
    std::optional<CalibrationFile> calibration;
};

/// JSON document; unknown keys are rejected nowhere, absent keys keep the
/// C++ defaults. Structural problems throw SchemaError.
Scenario load_scenario(std::istream& in);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Single straight-down camera (1600x1200, f = 920.3) with identity DVL and
/// IMU extrinsics; the fallback whenever a scenario has no inline
/// calibration.
CalibrationFile default_calibration();

}  // namespace uslam
