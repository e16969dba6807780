#include "morphogait/limb_kinematics.hpp"

#include <cmath>
#include <sstream>

#include "morphogait/errors.hpp"

namespace morphogait {

namespace {
// Boundary-reachable points may push |cos| marginally past 1 through
// rounding; this band is clamped, anything beyond is a hard error.
constexpr double kCosClampTol = 1e-12;
} // namespace

double robot_height(const LimbGeometry &geom, double theta1_init) {
    if (!(theta1_init > 0.0 && theta1_init < kPi / 2.0)) {
        std::ostringstream os;
        os << "initial hip pitch " << theta1_init
           << " rad outside (0, pi/2)";
        throw KinematicsError(os.str());
    }
    return std::sin(theta1_init) * geom.femur_length + geom.tibia_length;
}

double stance_reach(const LimbGeometry &geom, double height) {
    const double full = geom.femur_length + geom.tibia_length;
    // height == l_F + l_T is the fully vertical outstretched limb, x0 = 0.
    if (!(height > 0.0 && height <= full)) {
        std::ostringstream os;
        os << "height " << height << " m not reachable with outstretched limb (l_F+l_T = "
           << full << " m)";
        throw KinematicsError(os.str());
    }
    return std::sqrt(full * full - height * height);
}

PitchKnee inverse_kinematics(const LimbGeometry &geom, const SagittalPoint &p) {
    const double lf = geom.femur_length;
    const double lt = geom.tibia_length;
    const double r2 = p.x * p.x + p.y * p.y;

    double cos_knee = (r2 - lf * lf - lt * lt) / (2.0 * lf * lt);
    if (std::abs(cos_knee) > 1.0 + kCosClampTol) {
        std::ostringstream os;
        os << "point (" << p.x << ", " << p.y << ") outside limb workspace, |cos knee| = "
           << std::abs(cos_knee);
        throw UnreachableError(os.str(), cos_knee);
    }
    cos_knee = std::clamp(cos_knee, -1.0, 1.0);

    // Knee-backward branch: the knee angle is the negated arccos while the
    // pitch correction uses the positive sine root.
    const double knee = -std::acos(cos_knee);
    const double sin_knee = std::sqrt(1.0 - cos_knee * cos_knee);
    const double pitch = std::atan2(p.y, p.x) +
                         std::atan2(lt * sin_knee, lf + lt * cos_knee);
    return {pitch, knee};
}

SagittalPoint forward_kinematics(const LimbGeometry &geom, double hip_pitch,
                                 double knee) {
    const double lf = geom.femur_length;
    const double lt = geom.tibia_length;
    return {lf * std::cos(hip_pitch) + lt * std::cos(hip_pitch + knee),
            lf * std::sin(hip_pitch) + lt * std::sin(hip_pitch + knee)};
}

Vec3 place_in_base_frame(const LimbGeometry &geom, double hip_yaw,
                         const SagittalPoint &p) {
    const double azimuth = geom.mount_heading + hip_yaw;
    return {geom.mount_offset.x + p.x * std::cos(azimuth),
            geom.mount_offset.y + p.x * std::sin(azimuth), p.y};
}

JointAngles standing_pose(double theta1_init) {
    const PitchKnee pk = vertical_tibia_pose(theta1_init);
    return {0.0, pk.hip_pitch, pk.knee};
}

PitchKnee vertical_tibia_pose(double pitch_down) {
    // Tibia straight down: pitch + knee = -pi/2.
    return {-pitch_down, -kPi / 2.0 + pitch_down};
}

bool mounts_square(const std::array<LimbGeometry, 4> &limbs, double tol) {
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const double d =
                wrap_angle(limbs[i].mount_heading - limbs[j].mount_heading);
            const double rem = std::remainder(d, kPi / 2.0);
            if (std::abs(rem) > tol) return false;
        }
    }
    return true;
}

} // namespace morphogait
