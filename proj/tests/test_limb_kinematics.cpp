#include <cmath>
#include <random>

#include <doctest.h>

#include "morphogait/errors.hpp"
#include "morphogait/limb_kinematics.hpp"

using namespace morphogait;

namespace {

LimbGeometry make_geom(double femur, double tibia) {
    LimbGeometry g;
    g.femur_length = femur;
    g.tibia_length = tibia;
    return g;
}

const LimbGeometry kUnit = make_geom(1.0, 1.0);
const LimbGeometry kDefault = make_geom(0.30, 0.25);

} // namespace

TEST_CASE("robot height from initial pitch") {
    CHECK(robot_height(kUnit, deg2rad(30.0)) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(robot_height(kDefault, deg2rad(30.0)) ==
          doctest::Approx(0.4).epsilon(1e-12));
    // Independent evaluation: sin(45 deg) * 0.3 + 0.25.
    const double expected = std::sin(kPi / 4.0) * 0.3 + 0.25;
    CHECK(robot_height(kDefault, deg2rad(45.0)) ==
          doctest::Approx(expected).epsilon(1e-15));
    CHECK(robot_height(kDefault, deg2rad(45.0)) ==
          doctest::Approx(0.46213).epsilon(1e-5));

    CHECK_THROWS_AS(robot_height(kDefault, 0.0), KinematicsError);
    CHECK_THROWS_AS(robot_height(kDefault, kPi / 2.0), KinematicsError);
    CHECK_THROWS_AS(robot_height(kDefault, -0.1), KinematicsError);
}

TEST_CASE("stance reach from height") {
    // Fully vertical outstretched limb.
    CHECK(stance_reach(kUnit, 2.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(stance_reach(kUnit, 1.5) ==
          doctest::Approx(std::sqrt(4.0 - 2.25)).epsilon(1e-15));
    CHECK(stance_reach(kUnit, 1.5) == doctest::Approx(1.32288).epsilon(1e-5));
    // sqrt(0.55^2 - 0.4^2) evaluated independently.
    CHECK(stance_reach(kDefault, 0.4) ==
          doctest::Approx(std::sqrt(0.55 * 0.55 - 0.4 * 0.4)).epsilon(1e-15));
    CHECK(stance_reach(kDefault, 0.4) ==
          doctest::Approx(0.3774917).epsilon(1e-6));

    CHECK_THROWS_AS(stance_reach(kDefault, 0.551), KinematicsError);
    CHECK_THROWS_AS(stance_reach(kDefault, 0.0), KinematicsError);
    CHECK_THROWS_AS(stance_reach(kDefault, -0.2), KinematicsError);
}

TEST_CASE("height and reach sit on the full-extension circle") {
    for (double femur : {0.2, 0.3, 1.0}) {
        for (double tibia : {0.15, 0.25, 1.0}) {
            const LimbGeometry g = make_geom(femur, tibia);
            for (double pitch = 0.05; pitch < kPi / 2.0; pitch += 0.07) {
                const double h = robot_height(g, pitch);
                const double x0 = stance_reach(g, h);
                CHECK(std::abs(std::hypot(x0, h) - (femur + tibia)) < 1e-12);
            }
        }
    }
}

TEST_CASE("inverse kinematics on the named points") {
    SUBCASE("fully outstretched along x") {
        const PitchKnee pk = inverse_kinematics(kUnit, {2.0, 0.0});
        CHECK(pk.hip_pitch == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(pk.knee == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("right-angle knee straight below") {
        const PitchKnee pk =
            inverse_kinematics(kUnit, {0.0, -std::sqrt(2.0)});
        CHECK(pk.knee == doctest::Approx(-kPi / 2.0).epsilon(1e-12));
        CHECK(pk.hip_pitch == doctest::Approx(-kPi / 4.0).epsilon(1e-12));
    }
    SUBCASE("default geometry round trip") {
        const SagittalPoint target{0.2, -0.3};
        const PitchKnee pk = inverse_kinematics(kDefault, target);
        const SagittalPoint back =
            forward_kinematics(kDefault, pk.hip_pitch, pk.knee);
        CHECK(std::abs(back.x - target.x) < 1e-9);
        CHECK(std::abs(back.y - target.y) < 1e-9);
    }
}

TEST_CASE("forward kinematics on the named postures") {
    const SagittalPoint straight = forward_kinematics(kUnit, 0.0, 0.0);
    CHECK(straight.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(straight.y == doctest::Approx(0.0).epsilon(1e-12));

    const SagittalPoint down = forward_kinematics(kUnit, -kPi / 2.0, 0.0);
    CHECK(down.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(down.y == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("round trip on a posture grid") {
    // Knee-backward branch: knee in [-pi, 0], any pitch.
    for (double pitch = -1.4; pitch <= 0.7; pitch += 0.11) {
        for (double knee = -2.9; knee <= -0.05; knee += 0.13) {
            const SagittalPoint p = forward_kinematics(kDefault, pitch, knee);
            const PitchKnee pk = inverse_kinematics(kDefault, p);
            const SagittalPoint back =
                forward_kinematics(kDefault, pk.hip_pitch, pk.knee);
            CHECK(std::abs(back.x - p.x) < 1e-9);
            CHECK(std::abs(back.y - p.y) < 1e-9);
            CHECK(pk.knee <= 0.0);
            CHECK(pk.knee == doctest::Approx(knee).epsilon(1e-9));
            CHECK(pk.hip_pitch == doctest::Approx(pitch).epsilon(1e-9));
        }
    }
}

TEST_CASE("round trip on random reachable points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> radius(
        std::abs(kDefault.femur_length - kDefault.tibia_length) + 1e-6,
        kDefault.femur_length + kDefault.tibia_length - 1e-6);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int i = 0; i < 2000; ++i) {
        const double r = radius(rng);
        const double a = angle(rng);
        const SagittalPoint p{r * std::cos(a), r * std::sin(a)};
        const PitchKnee pk = inverse_kinematics(kDefault, p);
        const SagittalPoint back =
            forward_kinematics(kDefault, pk.hip_pitch, pk.knee);
        CHECK(std::abs(back.x - p.x) < 1e-9);
        CHECK(std::abs(back.y - p.y) < 1e-9);
        CHECK(pk.knee <= 0.0);
    }
}

TEST_CASE("unreachable points carry the offending cosine") {
    try {
        inverse_kinematics(kUnit, {3.0, 0.0});
        FAIL("expected UnreachableError");
    } catch (const UnreachableError &e) {
        CHECK(e.cos_knee() > 1.0);
    }
    // Inside the inner workspace boundary.
    CHECK_THROWS_AS(inverse_kinematics(make_geom(0.3, 0.1), {0.05, 0.0}),
                    UnreachableError);
    // Marginal overshoot of the boundary is clamped, not rejected.
    const double full = 2.0;
    const SagittalPoint nearly{full + 1e-14, 0.0};
    const PitchKnee pk = inverse_kinematics(kUnit, nearly);
    CHECK(pk.knee == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("placement into the base frame") {
    LimbGeometry g = kDefault;

    SUBCASE("identity yaw") {
        const Vec3 out = place_in_base_frame(g, 0.0, {1.0, -0.4});
        CHECK(out.x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out.y == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(out.z == doctest::Approx(-0.4).epsilon(1e-12));
    }
    SUBCASE("quarter turn") {
        const Vec3 out = place_in_base_frame(g, kPi / 2.0, {1.0, -0.4});
        CHECK(std::abs(out.x) < 1e-12);
        CHECK(out.y == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out.z == doctest::Approx(-0.4).epsilon(1e-12));
    }
    SUBCASE("rotation-matrix oracle") {
        g.mount_heading = deg2rad(45.0);
        g.mount_offset = {0.2, 0.2};
        const double yaw = deg2rad(20.0);
        const SagittalPoint p{0.335, -0.4};
        const Vec3 out = place_in_base_frame(g, yaw, p);
        // Plain 2-D rotation of (p.x, 0) by the total azimuth.
        const double az = g.mount_heading + yaw;
        const double ox = 0.2 + std::cos(az) * p.x - std::sin(az) * 0.0;
        const double oy = 0.2 + std::sin(az) * p.x + std::cos(az) * 0.0;
        CHECK(out.x == doctest::Approx(ox).epsilon(1e-15));
        CHECK(out.y == doctest::Approx(oy).epsilon(1e-15));
        CHECK(out.z == doctest::Approx(p.y).epsilon(1e-15));
    }
    SUBCASE("distance preserved with zero mount offset") {
        g.mount_heading = deg2rad(-135.0);
        g.mount_offset = {0.0, 0.0};
        for (double yaw = -1.5; yaw <= 1.5; yaw += 0.25) {
            const Vec3 out = place_in_base_frame(g, yaw, {0.31, -0.27});
            CHECK(std::hypot(out.x, out.y) ==
                  doctest::Approx(0.31).epsilon(1e-12));
        }
    }
}

TEST_CASE("standing posture has a vertical tibia at height H") {
    const double theta1 = deg2rad(30.0);
    const JointAngles q = standing_pose(theta1);
    CHECK(q.hip_yaw == 0.0);
    CHECK(q.hip_pitch == doctest::Approx(-theta1).epsilon(1e-15));
    CHECK(q.hip_pitch + q.knee == doctest::Approx(-kPi / 2.0).epsilon(1e-15));

    const SagittalPoint foot =
        forward_kinematics(kDefault, q.hip_pitch, q.knee);
    const double h = robot_height(kDefault, theta1);
    CHECK(foot.x ==
          doctest::Approx(0.3 * std::cos(theta1)).epsilon(1e-12));
    CHECK(foot.y == doctest::Approx(-h).epsilon(1e-12));
}

TEST_CASE("square mounting detection") {
    std::array<LimbGeometry, 4> limbs{};
    const double base = deg2rad(-45.0);
    for (int i = 0; i < 4; ++i) {
        limbs[i].mount_heading = base + i * kPi / 2.0;
    }
    CHECK(mounts_square(limbs));
    limbs[2].mount_heading += 0.01;
    CHECK_FALSE(mounts_square(limbs));
}

TEST_CASE("joint limits contain the default working range") {
    const JointLimits limits;
    CHECK(limits.contains({0.0, -deg2rad(30.0), deg2rad(30.0) - kPi / 2.0}));
    CHECK_FALSE(limits.contains({2.0, 0.0, 0.0}));
    CHECK_FALSE(limits.contains({0.0, 0.0, 0.1}));
}
