#ifndef MORPHOGAIT_GEOMETRY_HPP_
#define MORPHOGAIT_GEOMETRY_HPP_

#include <cmath>

namespace morphogait {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2 &o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2 &o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 &operator+=(const Vec2 &o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(const Vec2 &o) const { return x * o.x + y * o.y; }
    double cross(const Vec2 &o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    /// Counterclockwise rotation by `angle` radians.
    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
};

/// Unit vector at azimuth `a` (radians, counterclockwise from +x).
inline Vec2 unit_vec(double a) { return {std::cos(a), std::sin(a)}; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

} // namespace morphogait

#endif // MORPHOGAIT_GEOMETRY_HPP_
