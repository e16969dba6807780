#include "morphogait/locomotion_sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "morphogait/errors.hpp"
#include "morphogait/numfmt.hpp"

namespace morphogait {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
    return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

std::uint64_t fnv1a64(const std::string &s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical_config_string(const GaitConfig &cfg,
                                    const PerturbationModel &perturb) {
    std::ostringstream os;
    os << to_string(cfg.gait) << '|' << format_double(cfg.theta1_init) << '|'
       << format_double(cfg.yaw_amplitude) << '|'
       << format_double(cfg.step_period) << '|' << cfg.samples_per_step << '|'
       << format_double(cfg.spiral_slope) << '|'
       << to_string(cfg.lead_diagonal) << '|'
       << format_double(cfg.resolved_direction()) << '|'
       << format_double(cfg.trot_part1_fraction) << '|'
       << format_double(cfg.swing_raise_fraction);
    for (double v : perturb.yaw_calibration_offset) {
        os << '|' << format_double(v);
    }
    os << '|' << format_double(perturb.foot_placement_noise_sigma) << '|'
       << format_double(perturb.lateral_sway_bias) << '|'
       << format_double(perturb.initial_position_sigma);
    return os.str();
}

Vec2 rotate_to_world(const BasePose &pose, const Vec2 &base_xy) {
    return Vec2{pose.x, pose.y} + base_xy.rotated(pose.heading);
}

Vec2 foot_base_xy(const FootPlan &plan, int limb, const JointAngles &q) {
    const SagittalPoint p =
        forward_kinematics(plan.geometry[limb], q.hip_pitch, q.knee);
    const Vec3 b = place_in_base_frame(plan.geometry[limb], q.hip_yaw, p);
    return {b.x, b.y};
}

double implied_height(const FootPlan &plan, int limb, const JointAngles &q) {
    return -forward_kinematics(plan.geometry[limb], q.hip_pitch, q.knee).y;
}

class Walker {
  public:
    Walker(const FootPlan &plan, const PerturbationModel &perturb,
           std::mt19937_64 &rng)
        : plan_(plan), perturb_(perturb), rng_(rng),
          lead_diag_(plan.config.lead_diagonal == LeadDiagonal::FR_HL ? 0 : 1) {
    }

    // Executed joints: the servo zero of the hip yaw may be miscalibrated.
    JointAngles executed(int limb, const JointAngles &q) const {
        JointAngles e = q;
        e.hip_yaw += perturb_.yaw_calibration_offset[limb];
        return e;
    }

    void start(const SimStart &s) {
        pose_ = s.pose;
        t0_ = s.t0;
        double zsum = 0.0;
        int zcount = 0;
        for (int i = 0; i < 4; ++i) {
            const PlanSample &smp = plan_.limbs[i].samples[0];
            pinned_[i] = smp.contact;
            if (!smp.contact) continue;
            const JointAngles q = executed(i, smp.angles);
            anchors_[i] = rotate_to_world(pose_, foot_base_xy(plan_, i, q));
            zsum += implied_height(plan_, i, smp.angles);
            ++zcount;
        }
        if (zcount > 0) pose_.z = zsum / zcount;
    }

    void run(int steps, TrajectoryLog &log) {
        const int n = plan_.samples_per_cycle();
        const double dt = plan_.config.step_period / n;
        log.samples.reserve(log.samples.size() + steps * n);
        for (int cycle = 0; cycle < steps; ++cycle) {
            for (int k = 1; k <= n; ++k) {
                advance_sample(k);
                LogSample rec;
                rec.t = t0_ + (static_cast<double>(cycle) * n + k) * dt;
                rec.pose = pose_;
                for (int i = 0; i < 4; ++i) {
                    rec.joints[i] = plan_.limbs[i].samples[k].angles;
                }
                log.samples.push_back(rec);
            }
        }
    }

    const BasePose &pose() const { return pose_; }

  private:
    void advance_sample(int k) {
        std::array<JointAngles, 4> exec;
        std::array<bool, 4> flags;
        std::vector<int> continuing, landing;
        for (int i = 0; i < 4; ++i) {
            const PlanSample &smp = plan_.limbs[i].samples[k];
            exec[i] = executed(i, smp.angles);
            flags[i] = smp.contact;
            if (!smp.contact) continue;
            (pinned_[i] ? continuing : landing).push_back(i);
        }

        std::vector<ContactConstraint> constraints;
        const auto make_constraint = [&](int i) {
            return ContactConstraint{foot_base_xy(plan_, i, exec[i]),
                                     anchors_[i],
                                     implied_height(plan_, i, exec[i])};
        };

        try {
            if (continuing.size() >= 2) {
                // Pose first from the feet that stayed pinned, then anchor
                // the landing feet where they actually come down.
                constraints.reserve(continuing.size());
                for (int i : continuing) constraints.push_back(make_constraint(i));
                apply_pose(constraints, flags, exec, k);
                for (int i : landing) place_anchor(i, exec[i]);
            } else {
                for (int i : landing) place_anchor(i, exec[i]);
                constraints.reserve(continuing.size() + landing.size());
                for (int i : continuing) constraints.push_back(make_constraint(i));
                for (int i : landing) constraints.push_back(make_constraint(i));
                apply_pose(constraints, flags, exec, k);
            }
        } catch (const SimulationError &e) {
            std::ostringstream os;
            os << e.what() << " (sample " << k << ", phase "
               << plan_.limbs[0].samples[k].phase << ")";
            throw SimulationError(os.str());
        }
        pinned_ = flags;
    }

    void apply_pose(const std::vector<ContactConstraint> &constraints,
                    const std::array<bool, 4> &flags,
                    const std::array<JointAngles, 4> &exec, int k) {
        BasePose solved = solve_base_pose(constraints);
        // Height from every limb on the ground at this sample.
        double zsum = 0.0;
        int zcount = 0;
        for (int i = 0; i < 4; ++i) {
            if (!flags[i]) continue;
            zsum += implied_height(plan_, i, exec[i]);
            ++zcount;
        }
        solved.z = zcount > 0 ? zsum / zcount : pose_.z;
        pose_ = solved;
        (void)k;
    }

    void place_anchor(int limb, const JointAngles &q) {
        Vec2 w = rotate_to_world(pose_, foot_base_xy(plan_, limb, q));
        const double az = pose_.heading + plan_.travel_direction;
        if (perturb_.foot_placement_noise_sigma > 0.0) {
            std::normal_distribution<double> noise(
                0.0, perturb_.foot_placement_noise_sigma);
            const double along = noise(rng_);
            const double lateral = noise(rng_);
            w += unit_vec(az) * along + unit_vec(az + kPi / 2.0) * lateral;
        }
        if (plan_.config.gait == GaitType::Canter &&
            perturb_.lateral_sway_bias != 0.0) {
            const double side = diagonal_of(limb) == lead_diag_ ? 1.0 : -1.0;
            w += unit_vec(az + kPi / 2.0) * (side * perturb_.lateral_sway_bias);
        }
        anchors_[limb] = w;
    }

    const FootPlan &plan_;
    const PerturbationModel &perturb_;
    std::mt19937_64 &rng_;
    int lead_diag_;
    BasePose pose_{};
    double t0_ = 0.0;
    std::array<bool, 4> pinned_{};
    std::array<Vec2, 4> anchors_{};
};

SimStart default_start(const FootPlan &plan) {
    SimStart s;
    s.pose = {0.0, 0.0, plan.nominal_height,
              wrap_angle(-plan.travel_direction)};
    return s;
}

TrajectoryLog walk(const FootPlan &plan, int steps,
                   const PerturbationModel &perturb, const SimStart &start,
                   std::mt19937_64 &rng, std::uint64_t seed) {
    if (steps < 1) throw ConfigError("steps must be at least 1");
    perturb.validate();

    TrajectoryLog log;
    log.gait = to_string(plan.config.gait);
    log.config_hash = fnv1a64(canonical_config_string(plan.config, perturb));
    log.seed = seed;
    log.travel_azimuth = wrap_angle(start.pose.heading + plan.travel_direction);

    Walker walker(plan, perturb, rng);
    walker.start(start);
    walker.run(steps, log);
    return log;
}

} // namespace

void PerturbationModel::validate() const {
    if (foot_placement_noise_sigma < 0.0 || initial_position_sigma < 0.0) {
        throw ConfigError("perturbation sigmas must be non-negative");
    }
}

BasePose solve_base_pose(std::span<const ContactConstraint> contacts) {
    const std::size_t n = contacts.size();
    if (n < 2) {
        std::ostringstream os;
        os << "base pose underdetermined: " << n
           << " stance contact(s), need at least 2";
        throw SimulationError(os.str());
    }
    Vec2 cb{}, cw{};
    for (const auto &c : contacts) {
        cb += c.base_xy;
        cw += c.world_xy;
    }
    cb = cb * (1.0 / static_cast<double>(n));
    cw = cw * (1.0 / static_cast<double>(n));

    double dot = 0.0, cross = 0.0, spread = 0.0;
    double zsum = 0.0;
    for (const auto &c : contacts) {
        const Vec2 da = c.base_xy - cb;
        const Vec2 dw = c.world_xy - cw;
        dot += da.dot(dw);
        cross += da.cross(dw);
        spread += da.dot(da);
        zsum += c.implied_height;
    }
    if (spread < 1e-18) {
        throw SimulationError("degenerate stance: contacts coincide");
    }
    const double heading = std::atan2(cross, dot);
    const Vec2 t = cw - cb.rotated(heading);
    return {t.x, t.y, zsum / static_cast<double>(n), wrap_angle(heading)};
}

TrajectoryLog simulate_walk(const FootPlan &plan, int steps,
                            const PerturbationModel &perturb,
                            std::optional<SimStart> start) {
    std::mt19937_64 rng(perturb.rng_seed);
    return walk(plan, steps, perturb, start.value_or(default_start(plan)), rng,
                perturb.rng_seed);
}

double step_length(const FootPlan &plan) {
    PerturbationModel none;
    none.initial_position_sigma = 0.0;
    const TrajectoryLog log = simulate_walk(plan, 1, none);
    const Vec2 axis = unit_vec(log.travel_azimuth);
    const BasePose &end = log.samples.back().pose;
    return Vec2{end.x, end.y}.dot(axis);
}

std::vector<TrajectoryLog> run_line_experiment(
    const GaitConfig &config, const PerturbationModel &perturb,
    double distance, int trials, const std::array<LimbGeometry, 4> &geometry,
    const JointLimits &limits) {
    if (!(distance > 0.0)) throw ConfigError("distance must be positive");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    perturb.validate();

    const FootPlan plan = build_plan(config, geometry, limits);
    const double ideal_step = step_length(plan);
    if (!(ideal_step > 1e-9)) {
        throw GaitError("plan makes no forward progress; nothing to walk");
    }
    const int base_steps =
        static_cast<int>(std::ceil(distance / ideal_step));

    std::vector<TrajectoryLog> logs;
    logs.reserve(trials);
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = trial_seed(perturb.rng_seed, trial);
        int steps = base_steps;
        for (;;) {
            std::mt19937_64 rng(seed);
            SimStart start;
            start.pose = {0.0, 0.0, plan.nominal_height,
                          wrap_angle(-plan.travel_direction)};
            if (perturb.initial_position_sigma > 0.0) {
                std::normal_distribution<double> jitter(
                    0.0, perturb.initial_position_sigma);
                start.pose.x = jitter(rng);
                start.pose.y = jitter(rng);
            }
            TrajectoryLog log = walk(plan, steps, perturb, start, rng, seed);
            const Vec2 axis = unit_vec(log.travel_azimuth);
            const BasePose &end = log.samples.back().pose;
            const double progress =
                (Vec2{end.x, end.y} - Vec2{start.pose.x, start.pose.y})
                    .dot(axis);
            if (progress >= distance) {
                logs.push_back(std::move(log));
                break;
            }
            const int extra = static_cast<int>(
                std::ceil((distance - progress) / ideal_step));
            steps += std::max(extra, 1);
            if (steps > base_steps * 16 + 64) {
                throw SimulationError(
                    "line experiment cannot reach the target distance");
            }
        }
    }
    return logs;
}

TrajectoryLog run_corner_experiment(const GaitConfig &config,
                                    const PerturbationModel &perturb,
                                    double turn,
                                    const std::array<LimbGeometry, 4> &geometry,
                                    const JointLimits &limits) {
    if (config.gait != GaitType::Trot) {
        throw GaitError("the corner experiment runs the trot gait");
    }
    perturb.validate();

    const FootPlan leg1 = build_plan(config, geometry, limits);

    GaitConfig cfg2 = config;
    cfg2.direction = wrap_angle(leg1.travel_direction + turn);
    cfg2.lead_diagonal = config.lead_diagonal == LeadDiagonal::FR_HL
                             ? LeadDiagonal::FL_HR
                             : LeadDiagonal::FR_HL;
    const FootPlan leg2 = build_plan(cfg2, geometry, limits);

    std::mt19937_64 rng(perturb.rng_seed);
    SimStart start;
    start.pose = {0.0, 0.0, leg1.nominal_height,
                  wrap_angle(-leg1.travel_direction)};
    TrajectoryLog log =
        walk(leg1, 4, perturb, start, rng, perturb.rng_seed);

    SimStart start2;
    start2.pose = log.samples.back().pose;
    start2.t0 = log.samples.back().t;
    TrajectoryLog second =
        walk(leg2, 4, perturb, start2, rng, perturb.rng_seed);
    log.samples.insert(log.samples.end(), second.samples.begin(),
                       second.samples.end());
    return log;
}

std::array<int, 4> mirror_permutation(
    const std::array<LimbGeometry, 4> &geometry, double direction) {
    std::array<int, 4> perm{};
    for (int i = 0; i < 4; ++i) {
        const double reflected =
            wrap_angle(2.0 * direction - geometry[i].mount_heading);
        int best = -1;
        double best_err = 1e9;
        for (int j = 0; j < 4; ++j) {
            const double err = std::abs(
                wrap_angle(geometry[j].mount_heading - reflected));
            if (err < best_err) {
                best_err = err;
                best = j;
            }
        }
        if (best_err > 1e-6) {
            throw ConfigError("chassis is not mirror-symmetric about the "
                              "travel axis");
        }
        perm[i] = best;
    }
    return perm;
}

PerturbationModel mirrored_perturbation(
    const PerturbationModel &perturb,
    const std::array<LimbGeometry, 4> &geometry, double direction) {
    const auto perm = mirror_permutation(geometry, direction);
    PerturbationModel out = perturb;
    for (int i = 0; i < 4; ++i) {
        out.yaw_calibration_offset[perm[i]] =
            -perturb.yaw_calibration_offset[i];
    }
    out.lateral_sway_bias = -perturb.lateral_sway_bias;
    return out;
}

void write_log_csv(const TrajectoryLog &log, std::ostream &out) {
    out << "t,x,y,z,heading";
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) {
            out << ",l" << i << "_t" << j;
        }
    }
    out << '\n';
    for (const LogSample &s : log.samples) {
        out << format_double(s.t) << ',' << format_double(s.pose.x) << ','
            << format_double(s.pose.y) << ',' << format_double(s.pose.z)
            << ',' << format_double(s.pose.heading);
        for (int i = 0; i < 4; ++i) {
            out << ',' << format_double(s.joints[i].hip_yaw) << ','
                << format_double(s.joints[i].hip_pitch) << ','
                << format_double(s.joints[i].knee);
        }
        out << '\n';
    }
}

TrajectoryLog read_log_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("empty trajectory file");
    }
    std::string expected = "t,x,y,z,heading";
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) {
            expected += ",l" + std::to_string(i) + "_t" + std::to_string(j);
        }
    }
    if (line != expected) {
        throw ConfigError("unexpected trajectory header: '" + line + "'");
    }

    TrajectoryLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            if (next == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, next - pos));
            pos = next + 1;
        }
        if (fields.size() != 17) {
            throw ConfigError("trajectory row with " +
                              std::to_string(fields.size()) +
                              " fields, expected 17");
        }
        LogSample s;
        s.t = parse_double(fields[0]);
        s.pose = {parse_double(fields[1]), parse_double(fields[2]),
                  parse_double(fields[3]), parse_double(fields[4])};
        for (int i = 0; i < 4; ++i) {
            s.joints[i] = {parse_double(fields[5 + 3 * i]),
                           parse_double(fields[6 + 3 * i]),
                           parse_double(fields[7 + 3 * i])};
        }
        log.samples.push_back(s);
    }
    return log;
}

void write_log_meta(const TrajectoryLog &log, const std::string &config_json,
                    std::ostream &out) {
    nlohmann::ordered_json meta;
    meta["gait"] = log.gait;
    meta["config"] = nlohmann::ordered_json::parse(config_json);
    meta["seed"] = log.seed;
    meta["schema_version"] = 1;
    out << meta.dump(2) << '\n';
}

} // namespace morphogait
