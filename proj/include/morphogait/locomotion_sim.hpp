#ifndef MORPHOGAIT_LOCOMOTION_SIM_HPP_
#define MORPHOGAIT_LOCOMOTION_SIM_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morphogait/gait_engine.hpp"

namespace morphogait {

// Kinematic (no-slip, quasi-static) locomotion simulator. Feet flagged as
// stance in the FootPlan are pinned to their world touchdown points; the
// base pose follows from aligning the base-frame foot positions to those
// anchors, the height from the stance limbs' vertical kinematics. Noise
// enters only at touchdown.

struct BasePose {
    double x = 0.0;       // world, meters
    double y = 0.0;       // world, meters
    double z = 0.0;       // base height above ground, meters
    double heading = 0.0; // radians, normalized to (-pi, pi]
};

struct LogSample {
    double t = 0.0;
    BasePose pose{};
    std::array<JointAngles, 4> joints{};
};

struct TrajectoryLog {
    std::vector<LogSample> samples;
    std::string gait;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    double travel_azimuth = 0.0; // world heading of intended travel
};

/// Per-limb yaw miscalibration plus touchdown placement noise. The sway
/// bias displaces canter touchdowns laterally, alternating sides with the
/// stance diagonal; trial start positions scatter with
/// initial_position_sigma.
struct PerturbationModel {
    std::array<double, 4> yaw_calibration_offset{}; // radians
    double foot_placement_noise_sigma = 0.0;        // meters
    double lateral_sway_bias = 0.0;                 // meters
    double initial_position_sigma = 0.0048;         // meters
    std::uint64_t rng_seed = 0;

    void validate() const; // throws ConfigError on negative sigmas
};

/// One stance constraint: where the foot sits in the base frame, where it
/// is pinned in the world, and the base height the limb implies.
struct ContactConstraint {
    Vec2 base_xy{};
    Vec2 world_xy{};
    double implied_height = 0.0;
};

/// Planar rigid alignment of base-frame contacts onto their world anchors
/// (least squares; exact for two points), height as the mean of the
/// per-limb implied heights. Throws SimulationError with fewer than two
/// contacts or coincident base-frame contacts.
BasePose solve_base_pose(std::span<const ContactConstraint> contacts);

struct SimStart {
    BasePose pose{};
    double t0 = 0.0;
};

/// Steps the plan for `steps` full cycles. Deterministic for a fixed
/// (plan, steps, perturb) triple. The default start stands the base at the
/// origin headed so that travel runs along the world +x axis.
TrajectoryLog simulate_walk(const FootPlan &plan, int steps,
                            const PerturbationModel &perturb,
                            std::optional<SimStart> start = {});

/// Net displacement along the travel axis over one unperturbed cycle.
double step_length(const FootPlan &plan);

/// Repeats unperturbed-start walks, one log per trial with per-trial
/// sub-seeds, until forward progress reaches `distance`.
std::vector<TrajectoryLog> run_line_experiment(
    const GaitConfig &config, const PerturbationModel &perturb,
    double distance, int trials,
    const std::array<LimbGeometry, 4> &geometry = default_chassis(),
    const JointLimits &limits = {});

/// Four forward cycles, then four cycles with the travel direction turned
/// by `turn` (a right angle by default) without rotating the body.
TrajectoryLog run_corner_experiment(
    const GaitConfig &config, const PerturbationModel &perturb,
    double turn = -kPi / 2.0,
    const std::array<LimbGeometry, 4> &geometry = default_chassis(),
    const JointLimits &limits = {});

/// Limb permutation under reflection about the travel axis; used to build
/// mirrored perturbations.
std::array<int, 4> mirror_permutation(
    const std::array<LimbGeometry, 4> &geometry, double direction);

/// Mirror of a perturbation model about the travel axis: yaw offsets move
/// to the reflected limb with flipped sign, the sway bias flips.
PerturbationModel mirrored_perturbation(
    const PerturbationModel &perturb,
    const std::array<LimbGeometry, 4> &geometry, double direction);

/// CSV with header t,x,y,z,heading,l0_t0,...,l3_t2 at full precision.
void write_log_csv(const TrajectoryLog &log, std::ostream &out);
TrajectoryLog read_log_csv(std::istream &in);

/// Sidecar metadata: {"gait", "config", "seed", "schema_version"}.
/// `config_json` must hold a serialized JSON object.
void write_log_meta(const TrajectoryLog &log, const std::string &config_json,
                    std::ostream &out);

} // namespace morphogait

#endif // MORPHOGAIT_LOCOMOTION_SIM_HPP_
