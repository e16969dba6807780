#ifndef MORPHOGAIT_RUN_CONFIG_HPP_
#define MORPHOGAIT_RUN_CONFIG_HPP_

#include <array>
#include <string>

#include "morphogait/gait_engine.hpp"
#include "morphogait/locomotion_sim.hpp"

namespace morphogait {

// File-based run configuration (JSON). The schema is validated before any
// run; unknown keys are rejected. All angles are radians, lengths meters,
// times seconds.

struct ExperimentConfig {
    std::string kind = "line"; // "line" or "corner"
    double distance = 1.0;     // meters, line experiment
    int trials = 7;
};

struct RunConfig {
    std::array<LimbGeometry, 4> geometry = default_chassis();
    JointLimits limits{};
    GaitConfig gait{};
    PerturbationModel perturbation{};
    ExperimentConfig experiment{};

    void validate() const; // throws ConfigError / GaitError
};

/// Parses and validates a configuration document. Throws ConfigError with
/// the offending key on schema violations.
RunConfig parse_run_config(const std::string &json_text);

/// Reads the file and delegates to parse_run_config.
RunConfig load_run_config(const std::string &path);

/// Canonical JSON re-serialization (defaults filled in); feeds the
/// trajectory metadata sidecar.
std::string run_config_to_json(const RunConfig &config);

} // namespace morphogait

#endif // MORPHOGAIT_RUN_CONFIG_HPP_
