#ifndef MORPHOGAIT_GAIT_ENGINE_HPP_
#define MORPHOGAIT_GAIT_ENGINE_HPP_

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "morphogait/limb_kinematics.hpp"

namespace morphogait {

// Gait generation for a four-limb chassis with limbs mounted at 90 deg
// increments. Limb indices are fixed as 0 = front-right, 1 = front-left,
// 2 = hind-left, 3 = hind-right; limbs i and i+2 form a diagonal pair.
//
// Each gait works in a travel frame: the engine assigns every limb a
// working azimuth relative to the travel direction and generates joint
// trajectories around it.
//
//   Trot:   the lead diagonal pair stands perpendicular to travel and
//           drags the base forward with a pinned yaw sweep, raising the
//           hips mid-sweep to compensate the pivot compression; the other
//           pair rests along the travel axis and re-plants between sweeps.
//   Canter: all four feet traverse the same annular path (ground segment
//           closed by a spiral arc) in planes parallel to travel, front
//           and rear copies oppositely directed, diagonals half a cycle
//           apart.
//   Gallop: the lead diagonal performs the trot sweep while the other
//           diagonal simultaneously runs the canter ring, so the base
//           never pauses.

enum class GaitType { Trot, Canter, Gallop };
enum class LeadDiagonal { FR_HL, FL_HR };

inline constexpr int kFrontRight = 0;
inline constexpr int kFrontLeft = 1;
inline constexpr int kHindLeft = 2;
inline constexpr int kHindRight = 3;
inline constexpr std::array<const char *, 4> kLimbNames = {"FR", "FL", "HL",
                                                           "HR"};

/// Diagonal index of a limb: 0 for FR/HL, 1 for FL/HR.
constexpr int diagonal_of(int limb) { return limb % 2; }

std::string to_string(GaitType g);
std::string to_string(LeadDiagonal d);
GaitType gait_from_string(const std::string &s);
LeadDiagonal lead_from_string(const std::string &s);

struct GaitConfig {
    GaitType gait = GaitType::Trot;
    double theta1_init = deg2rad(30.0);   // initial downward hip pitch
    double yaw_amplitude = deg2rad(20.0); // sweep amplitude, radians
    double step_period = 2.0;             // seconds per cycle
    int samples_per_step = 240;
    double spiral_slope = 0.05;           // meters per radian, swing arc
    LeadDiagonal lead_diagonal = LeadDiagonal::FR_HL;
    // Travel heading in the base frame. When unset each gait picks the
    // heading its geometry is exact for: trot/gallop walk along the
    // bisector of the lead diagonal, canter along the chassis x-axis.
    std::optional<double> direction;
    double trot_part1_fraction = 0.5;  // share of the cycle spent re-planting
    double swing_raise_fraction = 0.3; // swing foot clearance, fraction of x0

    double resolved_direction() const;
    /// Throws GaitError on the first violated parameter constraint.
    void validate() const;
};

/// One sampled joint-space waypoint of a limb.
struct PlanSample {
    double phase = 0.0;
    JointAngles angles{};
    bool contact = false; // stance (foot pinned) at this sample
};

struct LimbPlan {
    double phase_offset = 0.0; // stance-onset phase of this limb's diagonal
    std::vector<PlanSample> samples; // samples_per_step + 1, closed cycle
};

/// A full gait cycle for all four limbs, immutable after construction.
struct FootPlan {
    GaitConfig config{};
    std::array<LimbGeometry, 4> geometry{};
    JointLimits limits{};
    std::array<LimbPlan, 4> limbs{};
    double nominal_height = 0.0;   // standing base height H
    double travel_direction = 0.0; // resolved base-frame heading of travel

    int samples_per_cycle() const { return config.samples_per_step; }
    /// Joint angles at an arbitrary phase, linear between samples.
    JointAngles interpolate(int limb, double phase) const;
};

/// Horizontal compression of the stance span caused by a hip-yaw pivot of
/// theta0 at horizontal reach l: delta = 2*(1 - cos(theta0)) * l.
double horizontal_shift(double theta0, double reach);

/// Hip-pitch increment that lifts the base enough to absorb the pivot
/// compression at yaw theta0:
/// xi = arccos((2*cos(theta0) - 1) * cos(theta1_init)) - theta1_init.
/// Throws GaitError when the arccos argument leaves [-1, 1] (yaw amplitude
/// too large for the initial pitch).
double lift_angle(double theta0, double theta1_init);

/// Foot position along the annular canter path of a front limb, by phase.
/// [0, 0.5): ground segment from x0 to the hip projection; [0.5, 1):
/// spiral arc back, strictly above ground except at its endpoints.
SagittalPoint canter_foot_path(const LimbGeometry &geom, double theta1_init,
                               double spiral_slope, double phase);

FootPlan trot_step(const GaitConfig &config,
                   const std::array<LimbGeometry, 4> &geometry,
                   const JointLimits &limits = {});
FootPlan canter_step(const GaitConfig &config,
                     const std::array<LimbGeometry, 4> &geometry,
                     const JointLimits &limits = {});
FootPlan gallop_step(const GaitConfig &config,
                     const std::array<LimbGeometry, 4> &geometry,
                     const JointLimits &limits = {});

/// Dispatches on config.gait.
FootPlan build_plan(const GaitConfig &config,
                    const std::array<LimbGeometry, 4> &geometry,
                    const JointLimits &limits = {});

/// Default chassis: identical limbs mounted on the diagonals of a square
/// base (FR -45, FL +45, HL +135, HR -135 degrees).
std::array<LimbGeometry, 4> default_chassis(double femur_length = 0.30,
                                            double tibia_length = 0.25,
                                            double mount_radius = 0.25);

/// Writes `limb_id,phase,theta0_rad,theta1_rad,theta2_rad` rows, one per
/// sample, header included.
void write_plan_csv(const FootPlan &plan, std::ostream &out);

} // namespace morphogait

#endif // MORPHOGAIT_GAIT_ENGINE_HPP_
