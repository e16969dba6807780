#include "morphogait/gait_engine.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "morphogait/errors.hpp"
#include "morphogait/numfmt.hpp"

namespace morphogait {

namespace {

double wrap01(double phase) {
    double p = std::fmod(phase, 1.0);
    if (p < 0.0) p += 1.0;
    return p;
}

struct LimbFrame {
    double yaw_offset = 0.0; // working azimuth relative to the mount
    double sweep_sign = 1.0; // +1 when +psi moves the foot toward travel
    bool on_lead = false;    // member of the lead diagonal
    bool rear = false;       // ring traversal direction (canter/gallop)
    double height = 0.0;     // standing height H of this limb
    double stand_x = 0.0;    // standing horizontal reach l_F*cos(theta1)
    double reach_x0 = 0.0;   // full-extension ground reach at H
    double raise = 0.0;      // swing foot clearance
};

int lead_limb_a(LeadDiagonal lead) {
    return lead == LeadDiagonal::FR_HL ? kFrontRight : kFrontLeft;
}

// Assigns working azimuths in the travel frame. The lead diagonal takes
// the two lateral azimuths (d +- 90 deg), each limb the one nearest its
// mount; the other diagonal takes d and d + 180.
std::array<LimbFrame, 4> make_frames(const GaitConfig &config,
                                     const std::array<LimbGeometry, 4> &geom) {
    const double d = config.resolved_direction();
    std::array<LimbFrame, 4> frames{};

    for (int i = 0; i < 4; ++i) {
        LimbFrame &f = frames[i];
        f.on_lead = diagonal_of(i) ==
                    (config.lead_diagonal == LeadDiagonal::FR_HL ? 0 : 1);
        f.height = robot_height(geom[i], config.theta1_init);
        f.stand_x = geom[i].femur_length * std::cos(config.theta1_init);
        f.reach_x0 = stance_reach(geom[i], f.height);
        f.raise = config.swing_raise_fraction * f.reach_x0;
    }

    const int a = lead_limb_a(config.lead_diagonal);
    const int b = (a + 2) % 4;
    const double right = d - kPi / 2.0;
    const double left = d + kPi / 2.0;
    const bool a_is_right =
        std::abs(wrap_angle(right - geom[a].mount_heading)) <=
        std::abs(wrap_angle(left - geom[a].mount_heading));
    frames[a].yaw_offset =
        wrap_angle((a_is_right ? right : left) - geom[a].mount_heading);
    frames[a].sweep_sign = a_is_right ? 1.0 : -1.0;
    frames[b].yaw_offset =
        wrap_angle((a_is_right ? left : right) - geom[b].mount_heading);
    frames[b].sweep_sign = a_is_right ? -1.0 : 1.0;

    for (int i = 0; i < 4; ++i) {
        if (frames[i].on_lead) continue;
        const bool front =
            std::abs(wrap_angle(geom[i].mount_heading - d)) <= kPi / 2.0;
        frames[i].rear = !front;
        frames[i].yaw_offset =
            wrap_angle((front ? d : d + kPi) - geom[i].mount_heading);
    }
    return frames;
}

// Canter working frame: everything aims along travel, front copies toward
// +d and rear copies toward d + 180.
std::array<LimbFrame, 4> make_canter_frames(
    const GaitConfig &config, const std::array<LimbGeometry, 4> &geom) {
    const double d = config.resolved_direction();
    std::array<LimbFrame, 4> frames{};
    for (int i = 0; i < 4; ++i) {
        LimbFrame &f = frames[i];
        f.on_lead = diagonal_of(i) ==
                    (config.lead_diagonal == LeadDiagonal::FR_HL ? 0 : 1);
        f.height = robot_height(geom[i], config.theta1_init);
        f.stand_x = geom[i].femur_length * std::cos(config.theta1_init);
        f.reach_x0 = stance_reach(geom[i], f.height);
        const bool front =
            std::abs(wrap_angle(geom[i].mount_heading - d)) <= kPi / 2.0;
        f.rear = !front;
        f.yaw_offset =
            wrap_angle((front ? d : d + kPi) - geom[i].mount_heading);
    }
    return frames;
}

PitchKnee limb_ik(const LimbGeometry &geom, const SagittalPoint &p, int limb,
                  double phase) {
    try {
        return inverse_kinematics(geom, p);
    } catch (const UnreachableError &e) {
        std::ostringstream os;
        os << "limb " << kLimbNames[limb] << " at phase " << phase << ": "
           << e.what();
        throw GaitError(os.str());
    }
}

void check_limits(const JointLimits &limits, const JointAngles &q, int limb,
                  double phase) {
    if (!limits.contains(q)) {
        std::ostringstream os;
        os << "limb " << kLimbNames[limb] << " at phase " << phase
           << " leaves the mechanical range (yaw " << q.hip_yaw << ", pitch "
           << q.hip_pitch << ", knee " << q.knee << ")";
        throw GaitError(os.str());
    }
}

// Ring point for a rear limb: same path, oppositely directed.
SagittalPoint mirror_ring(const SagittalPoint &p, double x0) {
    return {x0 - p.x, p.y};
}

FootPlan static_plan(const GaitConfig &config,
                     const std::array<LimbGeometry, 4> &geometry,
                     const JointLimits &limits) {
    FootPlan plan;
    plan.config = config;
    plan.geometry = geometry;
    plan.limits = limits;
    plan.travel_direction = config.resolved_direction();
    plan.nominal_height = robot_height(geometry[0], config.theta1_init);

    const int n = config.samples_per_step;
    const JointAngles stand = standing_pose(config.theta1_init);
    for (int i = 0; i < 4; ++i) {
        const bool lead = diagonal_of(i) ==
                          (config.lead_diagonal == LeadDiagonal::FR_HL ? 0 : 1);
        plan.limbs[i].phase_offset = lead ? 0.5 : 0.0;
        plan.limbs[i].samples.reserve(n + 1);
        for (int k = 0; k <= n; ++k) {
            const double phase = static_cast<double>(k) / n;
            check_limits(limits, stand, i, phase);
            plan.limbs[i].samples.push_back({phase, stand, true});
        }
    }
    return plan;
}

// Trot trajectory of one pusher limb at wrapped phase g.
PlanSample eval_trot_pusher(const GaitConfig &cfg, const LimbGeometry &geom,
                            const LimbFrame &f, int limb, double phase,
                            double g) {
    const double f1 = cfg.trot_part1_fraction;
    const double amp = cfg.yaw_amplitude;
    PlanSample out;
    out.phase = phase;
    if (g < f1) {
        // Re-planting: yaw forward while the foot clears the ground.
        const double s = g / f1;
        const double psi = -amp + 2.0 * amp * s;
        const SagittalPoint foot{f.stand_x,
                                 -f.height + f.raise * std::sin(kPi * s)};
        const PitchKnee pk = limb_ik(geom, foot, limb, phase);
        out.angles = {f.yaw_offset + f.sweep_sign * psi, pk.hip_pitch, pk.knee};
        out.contact = false;
    } else {
        // Pinned sweep. The compensation angle runs 0 -> amp -> 0 while the
        // signed yaw crosses monotonically, so the base rises mid-sweep and
        // returns to H at touchdown and liftoff.
        const double u = (g - f1) / (1.0 - f1);
        const double psi = amp - 2.0 * amp * u;
        const double comp = amp - std::abs(psi);
        const double pitch_down =
            cfg.theta1_init + lift_angle(comp, cfg.theta1_init);
        const PitchKnee pk = vertical_tibia_pose(pitch_down);
        out.angles = {f.yaw_offset + f.sweep_sign * psi, pk.hip_pitch, pk.knee};
        out.contact = true;
    }
    return out;
}

// Trot trajectory of one resting limb at wrapped phase g.
PlanSample eval_trot_rest(const GaitConfig &cfg, const LimbGeometry &geom,
                          const LimbFrame &f, int limb, double phase,
                          double g) {
    const double f1 = cfg.trot_part1_fraction;
    PlanSample out;
    out.phase = phase;
    if (g < f1) {
        const JointAngles stand = standing_pose(cfg.theta1_init);
        out.angles = {f.yaw_offset, stand.hip_pitch, stand.knee};
        out.contact = true;
    } else {
        // Raised in place while the sweep carries the base forward.
        const double s = (g - f1) / (1.0 - f1);
        const SagittalPoint foot{f.stand_x,
                                 -f.height + f.raise * std::sin(kPi * s)};
        const PitchKnee pk = limb_ik(geom, foot, limb, phase);
        out.angles = {f.yaw_offset, pk.hip_pitch, pk.knee};
        out.contact = false;
    }
    return out;
}

PlanSample eval_canter_limb(const GaitConfig &cfg, const LimbGeometry &geom,
                            const LimbFrame &f, int limb, double phase,
                            double local) {
    SagittalPoint p =
        canter_foot_path(geom, cfg.theta1_init, cfg.spiral_slope, local);
    if (f.rear) p = mirror_ring(p, f.reach_x0);
    const PitchKnee pk = limb_ik(geom, p, limb, phase);
    // Stance keeps the handoff instant (local 0.5, foot at the hip
    // projection) so the final drive increment is pinned.
    return {phase, {f.yaw_offset, pk.hip_pitch, pk.knee}, local <= 0.5};
}

// Gallop pusher: pinned sweep in the first half (stance closed at the
// handoff sample so the last increment drives), swing-back in the second.
PlanSample eval_gallop_pusher(const GaitConfig &cfg, const LimbGeometry &geom,
                              const LimbFrame &f, int limb, double phase,
                              double g) {
    const double amp = cfg.yaw_amplitude;
    PlanSample out;
    out.phase = phase;
    if (g <= 0.5) {
        const double u = g / 0.5;
        const double psi = amp - 2.0 * amp * u;
        const double comp = amp - std::abs(psi);
        const double pitch_down =
            cfg.theta1_init + lift_angle(comp, cfg.theta1_init);
        const PitchKnee pk = vertical_tibia_pose(pitch_down);
        out.angles = {f.yaw_offset + f.sweep_sign * psi, pk.hip_pitch, pk.knee};
        out.contact = true;
    } else {
        const double s = (g - 0.5) / 0.5;
        const double psi = -amp + 2.0 * amp * s;
        const SagittalPoint foot{f.stand_x,
                                 -f.height + f.raise * std::sin(kPi * s)};
        const PitchKnee pk = limb_ik(geom, foot, limb, phase);
        out.angles = {f.yaw_offset + f.sweep_sign * psi, pk.hip_pitch, pk.knee};
        out.contact = false;
    }
    return out;
}

// Gallop ring limb: the canter path shifted half a cycle, so the spiral
// arc runs while the pushers sweep and the ground segment drives the base
// while they re-plant.
PlanSample eval_gallop_ring(const GaitConfig &cfg, const LimbGeometry &geom,
                            const LimbFrame &f, int limb, double phase,
                            double g) {
    return eval_canter_limb(cfg, geom, f, limb, phase, wrap01(g + 0.5));
}

} // namespace

std::string to_string(GaitType g) {
    switch (g) {
    case GaitType::Trot: return "trot";
    case GaitType::Canter: return "canter";
    case GaitType::Gallop: return "gallop";
    }
    return "?";
}

std::string to_string(LeadDiagonal d) {
    return d == LeadDiagonal::FR_HL ? "fr_hl" : "fl_hr";
}

GaitType gait_from_string(const std::string &s) {
    if (s == "trot") return GaitType::Trot;
    if (s == "canter") return GaitType::Canter;
    if (s == "gallop") return GaitType::Gallop;
    throw ConfigError("unknown gait '" + s + "'");
}

LeadDiagonal lead_from_string(const std::string &s) {
    if (s == "fr_hl") return LeadDiagonal::FR_HL;
    if (s == "fl_hr") return LeadDiagonal::FL_HR;
    throw ConfigError("unknown lead diagonal '" + s + "'");
}

double GaitConfig::resolved_direction() const {
    if (direction) return *direction;
    if (gait == GaitType::Canter) return 0.0;
    // Trot and gallop drag the base along the bisector of the lead
    // diagonal, where the pinned sweep is an exact translation.
    return lead_diagonal == LeadDiagonal::FR_HL ? kPi / 4.0 : -kPi / 4.0;
}

void GaitConfig::validate() const {
    if (!(theta1_init > 0.0 && theta1_init < kPi / 2.0)) {
        throw GaitError("theta1_init must lie in (0, pi/2)");
    }
    if (!(yaw_amplitude >= 0.0 && yaw_amplitude < kPi / 2.0)) {
        throw GaitError("yaw amplitude must lie in [0, pi/2)");
    }
    if (samples_per_step < 8) {
        throw GaitError("samples_per_step must be at least 8");
    }
    if (!(step_period > 0.0)) {
        throw GaitError("step_period must be positive");
    }
    if (spiral_slope < 0.0) {
        throw GaitError("spiral slope must be non-negative");
    }
    if (!(trot_part1_fraction > 0.0 && trot_part1_fraction < 1.0)) {
        throw GaitError("trot part-1 fraction must lie in (0, 1)");
    }
    if (swing_raise_fraction < 0.0) {
        throw GaitError("swing raise fraction must be non-negative");
    }
    // The lift compensation must stay defined across the whole sweep.
    const double arg = (2.0 * std::cos(yaw_amplitude) - 1.0) *
                       std::cos(theta1_init);
    if (arg < -1.0 || arg > 1.0) {
        throw GaitError("yaw amplitude too large for theta1_init: lift "
                        "compensation undefined at the sweep peak");
    }
}

JointAngles FootPlan::interpolate(int limb, double phase) const {
    const auto &samples = limbs[limb].samples;
    const int n = samples_per_cycle();
    const double p = wrap01(phase);
    const double pos = p * n;
    const int k = std::min(static_cast<int>(pos), n - 1);
    const double t = pos - k;
    const JointAngles &a = samples[k].angles;
    const JointAngles &b = samples[k + 1].angles;
    return {a.hip_yaw + t * (b.hip_yaw - a.hip_yaw),
            a.hip_pitch + t * (b.hip_pitch - a.hip_pitch),
            a.knee + t * (b.knee - a.knee)};
}

double horizontal_shift(double theta0, double reach) {
    return 2.0 * (1.0 - std::cos(theta0)) * reach;
}

double lift_angle(double theta0, double theta1_init) {
    const double arg = (2.0 * std::cos(theta0) - 1.0) * std::cos(theta1_init);
    if (arg < -1.0 || arg > 1.0) {
        std::ostringstream os;
        os << "lift compensation undefined: (2 cos theta0 - 1) cos theta1 = "
           << arg << " outside [-1, 1]";
        throw GaitError(os.str());
    }
    return std::acos(arg) - theta1_init;
}

SagittalPoint canter_foot_path(const LimbGeometry &geom, double theta1_init,
                               double spiral_slope, double phase) {
    const double height = robot_height(geom, theta1_init);
    const double x0 = stance_reach(geom, height);
    const double p = wrap01(phase);
    if (p < 0.5) {
        // Ground segment, constant speed from x0 to the hip projection.
        return {x0 * (1.0 - 2.0 * p), -height};
    }
    // Two mirrored spiral arcs about the segment midpoint; slope zero
    // degenerates to a semicircle.
    const double phi = kPi * (2.0 * p - 1.0);
    const double r = x0 / 2.0 + spiral_slope * std::min(phi, kPi - phi);
    return {x0 / 2.0 - r * std::cos(phi), -height + r * std::sin(phi)};
}

FootPlan trot_step(const GaitConfig &config,
                   const std::array<LimbGeometry, 4> &geometry,
                   const JointLimits &limits) {
    GaitConfig cfg = config;
    cfg.gait = GaitType::Trot;
    cfg.validate();
    if (cfg.yaw_amplitude == 0.0) return static_plan(cfg, geometry, limits);

    const auto frames = make_frames(cfg, geometry);
    FootPlan plan;
    plan.config = cfg;
    plan.geometry = geometry;
    plan.limits = limits;
    plan.travel_direction = cfg.resolved_direction();
    plan.nominal_height = frames[0].height;

    const int n = cfg.samples_per_step;
    for (int i = 0; i < 4; ++i) {
        plan.limbs[i].phase_offset = frames[i].on_lead ? 0.5 : 0.0;
        plan.limbs[i].samples.reserve(n + 1);
        for (int k = 0; k < n; ++k) {
            const double phase = static_cast<double>(k) / n;
            const PlanSample s =
                frames[i].on_lead
                    ? eval_trot_pusher(cfg, geometry[i], frames[i], i, phase,
                                       phase)
                    : eval_trot_rest(cfg, geometry[i], frames[i], i, phase,
                                     phase);
            check_limits(limits, s.angles, i, phase);
            plan.limbs[i].samples.push_back(s);
        }
        PlanSample closing = plan.limbs[i].samples[0];
        closing.phase = 1.0;
        // The cycle closes with all four feet down: the pusher pair ends
        // its sweep on the ground exactly as the resting pair re-plants.
        closing.contact = true;
        plan.limbs[i].samples.push_back(closing);
    }
    return plan;
}

FootPlan canter_step(const GaitConfig &config,
                     const std::array<LimbGeometry, 4> &geometry,
                     const JointLimits &limits) {
    GaitConfig cfg = config;
    cfg.gait = GaitType::Canter;
    cfg.validate();

    const auto frames = make_canter_frames(cfg, geometry);
    FootPlan plan;
    plan.config = cfg;
    plan.geometry = geometry;
    plan.limits = limits;
    plan.travel_direction = cfg.resolved_direction();
    plan.nominal_height = frames[0].height;

    const int n = cfg.samples_per_step;
    for (int i = 0; i < 4; ++i) {
        const double offset = frames[i].on_lead ? 0.0 : 0.5;
        plan.limbs[i].phase_offset = offset;
        plan.limbs[i].samples.reserve(n + 1);
        for (int k = 0; k < n; ++k) {
            const double phase = static_cast<double>(k) / n;
            const double local = wrap01(phase + offset);
            const PlanSample s =
                eval_canter_limb(cfg, geometry[i], frames[i], i, phase, local);
            check_limits(limits, s.angles, i, phase);
            plan.limbs[i].samples.push_back(s);
        }
        PlanSample closing = plan.limbs[i].samples[0];
        closing.phase = 1.0;
        plan.limbs[i].samples.push_back(closing);
    }
    return plan;
}

FootPlan gallop_step(const GaitConfig &config,
                     const std::array<LimbGeometry, 4> &geometry,
                     const JointLimits &limits) {
    GaitConfig cfg = config;
    cfg.gait = GaitType::Gallop;
    cfg.validate();
    if (cfg.yaw_amplitude == 0.0 && cfg.spiral_slope == 0.0) {
        return static_plan(cfg, geometry, limits);
    }

    const auto frames = make_frames(cfg, geometry);
    FootPlan plan;
    plan.config = cfg;
    plan.geometry = geometry;
    plan.limits = limits;
    plan.travel_direction = cfg.resolved_direction();
    plan.nominal_height = frames[0].height;

    const int n = cfg.samples_per_step;
    for (int i = 0; i < 4; ++i) {
        plan.limbs[i].phase_offset = frames[i].on_lead ? 0.0 : 0.5;
        plan.limbs[i].samples.reserve(n + 1);
        for (int k = 0; k < n; ++k) {
            const double phase = static_cast<double>(k) / n;
            const PlanSample s =
                frames[i].on_lead
                    ? eval_gallop_pusher(cfg, geometry[i], frames[i], i,
                                         phase, phase)
                    : eval_gallop_ring(cfg, geometry[i], frames[i], i, phase,
                                       phase);
            check_limits(limits, s.angles, i, phase);
            plan.limbs[i].samples.push_back(s);
        }
        PlanSample closing = plan.limbs[i].samples[0];
        closing.phase = 1.0;
        plan.limbs[i].samples.push_back(closing);
    }
    return plan;
}

FootPlan build_plan(const GaitConfig &config,
                    const std::array<LimbGeometry, 4> &geometry,
                    const JointLimits &limits) {
    switch (config.gait) {
    case GaitType::Trot: return trot_step(config, geometry, limits);
    case GaitType::Canter: return canter_step(config, geometry, limits);
    case GaitType::Gallop: return gallop_step(config, geometry, limits);
    }
    throw GaitError("unknown gait type");
}

std::array<LimbGeometry, 4> default_chassis(double femur_length,
                                            double tibia_length,
                                            double mount_radius) {
    const std::array<double, 4> headings = {-kPi / 4.0, kPi / 4.0,
                                            3.0 * kPi / 4.0, -3.0 * kPi / 4.0};
    std::array<LimbGeometry, 4> limbs{};
    for (int i = 0; i < 4; ++i) {
        limbs[i].femur_length = femur_length;
        limbs[i].tibia_length = tibia_length;
        limbs[i].mount_heading = headings[i];
        limbs[i].mount_offset = unit_vec(headings[i]) * mount_radius;
    }
    return limbs;
}

void write_plan_csv(const FootPlan &plan, std::ostream &out) {
    out << "limb_id,phase,theta0_rad,theta1_rad,theta2_rad\n";
    for (int i = 0; i < 4; ++i) {
        for (const PlanSample &s : plan.limbs[i].samples) {
            out << i << ',' << format_double(s.phase) << ','
                << format_double(s.angles.hip_yaw) << ','
                << format_double(s.angles.hip_pitch) << ','
                << format_double(s.angles.knee) << '\n';
        }
    }
}

} // namespace morphogait
