#ifndef MORPHOGAIT_LIMB_KINEMATICS_HPP_
#define MORPHOGAIT_LIMB_KINEMATICS_HPP_

#include <array>

#include "morphogait/geometry.hpp"

namespace morphogait {

// Planar two-link kinematics of one limb (femur + tibia) in its sagittal
// plane, plus the hip-yaw placement of that plane around the base.
//
// Sagittal frame convention: +x points outward from the hip along the limb
// azimuth, +y points up, the hip is the origin. A standing foot therefore
// sits at (l_F*cos(pitch_down), -H) with the ground plane at y = -H.
//
// Joint conventions: hip pitch is the femur angle measured counterclockwise
// from +x in the sagittal plane, so the standing posture has a negative
// pitch. The knee angle is the tibia deflection from the femur axis and is
// always <= 0 on the supported (knee-backward) branch; the mirrored branch
// is obtained by negating the knee angle and recomputing the pitch.

/// One limb: link lengths and the hip mount pose on the base.
struct LimbGeometry {
    double femur_length = 0.30;  // meters
    double tibia_length = 0.25;  // meters
    Vec2 mount_offset{};         // hip position in the base frame, meters
    double mount_heading = 0.0;  // limb-plane azimuth at zero hip yaw, radians
};

/// Per-limb joint configuration, radians.
struct JointAngles {
    double hip_yaw = 0.0;    // rotation of the limb plane about vertical
    double hip_pitch = 0.0;  // femur angle in the sagittal plane (ccw from +x)
    double knee = 0.0;       // tibia deflection from the femur axis, <= 0
};

/// Mechanical ranges, radians. Defaults cover +-90 deg hips and a
/// backward-folding knee.
struct JointLimits {
    double hip_yaw_min = -kPi / 2.0;
    double hip_yaw_max = kPi / 2.0;
    double hip_pitch_min = -kPi / 2.0;
    double hip_pitch_max = kPi / 2.0;
    double knee_min = -kPi;
    double knee_max = 0.0;

    bool contains(const JointAngles &q) const {
        return q.hip_yaw >= hip_yaw_min && q.hip_yaw <= hip_yaw_max &&
               q.hip_pitch >= hip_pitch_min && q.hip_pitch <= hip_pitch_max &&
               q.knee >= knee_min && q.knee <= knee_max;
    }
};

/// Foot position in the sagittal plane of a limb.
struct SagittalPoint {
    double x = 0.0;  // outward from the hip, meters
    double y = 0.0;  // up, meters (negative below the hip)
};

/// Pitch/knee pair returned by the planar inverse kinematics.
struct PitchKnee {
    double hip_pitch = 0.0;
    double knee = 0.0;
};

/// Standing height of the base above the ground for a given initial hip
/// pitch (measured downward) with the tibia vertical:
/// H = sin(theta1_init) * l_F + l_T.
/// Throws KinematicsError unless theta1_init is in (0, pi/2).
double robot_height(const LimbGeometry &geom, double theta1_init);

/// Horizontal distance from the hip projection to the farthest ground
/// contact of a fully outstretched limb: x0 = sqrt((l_F+l_T)^2 - H^2).
/// Throws KinematicsError if H is not in (0, l_F+l_T).
double stance_reach(const LimbGeometry &geom, double height);

/// Planar inverse kinematics on the knee-backward branch (knee <= 0).
/// Cosines within 1e-12 of the [-1, 1] boundary are clamped; beyond that
/// the point is unreachable and an UnreachableError carrying the offending
/// cosine is thrown. forward_kinematics of the result reproduces `p`.
PitchKnee inverse_kinematics(const LimbGeometry &geom, const SagittalPoint &p);

/// Planar forward kinematics: foot position in the sagittal plane.
SagittalPoint forward_kinematics(const LimbGeometry &geom, double hip_pitch,
                                 double knee);

/// Places a sagittal-plane foot point into the base frame: rotates the
/// sagittal x-axis by (mount_heading + hip_yaw) about vertical and
/// translates by the mount offset; z carries the sagittal y.
Vec3 place_in_base_frame(const LimbGeometry &geom, double hip_yaw,
                         const SagittalPoint &p);

/// Standing posture for a given downward initial pitch: hip over the foot
/// with a vertical tibia. hip_pitch = -theta1_init, knee closes the chain.
JointAngles standing_pose(double theta1_init);

/// Posture with a vertical tibia at an arbitrary downward pitch. The foot
/// lands at (l_F*cos(pitch_down), -(l_F*sin(pitch_down) + l_T)).
PitchKnee vertical_tibia_pose(double pitch_down);

/// True when the four mount headings differ pairwise by multiples of 90 deg.
bool mounts_square(const std::array<LimbGeometry, 4> &limbs,
                   double tol = 1e-9);

} // namespace morphogait

#endif // MORPHOGAIT_LIMB_KINEMATICS_HPP_
