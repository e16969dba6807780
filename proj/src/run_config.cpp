#include "morphogait/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "morphogait/errors.hpp"

namespace morphogait {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json &obj, const std::string &where,
                    const std::set<std::string> &allowed) {
    for (const auto &item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

double get_number(const json &obj, const std::string &where,
                  const std::string &key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        throw ConfigError("'" + where + "." + key + "' must be a number");
    }
    return obj[key].get<double>();
}

std::int64_t get_integer(const json &obj, const std::string &where,
                         const std::string &key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) {
        throw ConfigError("'" + where + "." + key + "' must be an integer");
    }
    return obj[key].get<std::int64_t>();
}

std::string get_string(const json &obj, const std::string &where,
                       const std::string &key, const std::string &fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) {
        throw ConfigError("'" + where + "." + key + "' must be a string");
    }
    return obj[key].get<std::string>();
}

void parse_geometry(const json &obj, RunConfig &config) {
    reject_unknown(obj, "geometry",
                   {"femur_length", "tibia_length", "mount_radius",
                    "mount_headings"});
    const double femur = get_number(obj, "geometry", "femur_length", 0.30);
    const double tibia = get_number(obj, "geometry", "tibia_length", 0.25);
    const double radius = get_number(obj, "geometry", "mount_radius", 0.25);
    if (!(femur > 0.0) || !(tibia > 0.0)) {
        throw ConfigError("limb lengths must be positive");
    }
    if (radius < 0.0) {
        throw ConfigError("mount radius must be non-negative");
    }
    config.geometry = default_chassis(femur, tibia, radius);
    if (obj.contains("mount_headings")) {
        const json &arr = obj["mount_headings"];
        if (!arr.is_array() || arr.size() != 4) {
            throw ConfigError("'geometry.mount_headings' must hold 4 radians");
        }
        for (int i = 0; i < 4; ++i) {
            if (!arr[i].is_number()) {
                throw ConfigError("'geometry.mount_headings' must hold "
                                  "numbers");
            }
            const double heading = arr[i].get<double>();
            config.geometry[i].mount_heading = heading;
            config.geometry[i].mount_offset = unit_vec(heading) * radius;
        }
        if (!mounts_square(config.geometry, 1e-6)) {
            throw ConfigError("mount headings must differ by multiples of "
                              "90 degrees");
        }
    }
}

void parse_range(const json &obj, const std::string &key, double &lo,
                 double &hi) {
    if (!obj.contains(key)) return;
    const json &arr = obj[key];
    if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number() ||
        !arr[1].is_number()) {
        throw ConfigError("'joint_limits." + key +
                          "' must be [min, max] radians");
    }
    lo = arr[0].get<double>();
    hi = arr[1].get<double>();
    if (!(lo < hi)) {
        throw ConfigError("'joint_limits." + key + "' has min >= max");
    }
}

void parse_limits(const json &obj, RunConfig &config) {
    reject_unknown(obj, "joint_limits", {"hip_yaw", "hip_pitch", "knee"});
    parse_range(obj, "hip_yaw", config.limits.hip_yaw_min,
                config.limits.hip_yaw_max);
    parse_range(obj, "hip_pitch", config.limits.hip_pitch_min,
                config.limits.hip_pitch_max);
    parse_range(obj, "knee", config.limits.knee_min, config.limits.knee_max);
}

void parse_gait(const json &obj, RunConfig &config) {
    reject_unknown(obj, "gait",
                   {"type", "theta1_init", "yaw_amplitude", "step_period",
                    "samples_per_step", "spiral_slope", "lead_diagonal",
                    "direction", "trot_part1_fraction",
                    "swing_raise_fraction"});
    GaitConfig &g = config.gait;
    g.gait = gait_from_string(get_string(obj, "gait", "type", "trot"));
    g.theta1_init = get_number(obj, "gait", "theta1_init", g.theta1_init);
    g.yaw_amplitude =
        get_number(obj, "gait", "yaw_amplitude", g.yaw_amplitude);
    g.step_period = get_number(obj, "gait", "step_period", g.step_period);
    g.samples_per_step = static_cast<int>(get_integer(
        obj, "gait", "samples_per_step", g.samples_per_step));
    g.spiral_slope = get_number(obj, "gait", "spiral_slope", g.spiral_slope);
    g.lead_diagonal = lead_from_string(
        get_string(obj, "gait", "lead_diagonal", to_string(g.lead_diagonal)));
    if (obj.contains("direction") && !obj["direction"].is_null()) {
        if (!obj["direction"].is_number()) {
            throw ConfigError("'gait.direction' must be a number or null");
        }
        g.direction = obj["direction"].get<double>();
    }
    g.trot_part1_fraction =
        get_number(obj, "gait", "trot_part1_fraction", g.trot_part1_fraction);
    g.swing_raise_fraction = get_number(obj, "gait", "swing_raise_fraction",
                                        g.swing_raise_fraction);
}

void parse_perturbation(const json &obj, RunConfig &config) {
    reject_unknown(obj, "perturbation",
                   {"yaw_calibration_offsets", "foot_placement_noise_sigma",
                    "lateral_sway_bias", "initial_position_sigma",
                    "rng_seed"});
    PerturbationModel &p = config.perturbation;
    if (obj.contains("yaw_calibration_offsets")) {
        const json &arr = obj["yaw_calibration_offsets"];
        if (!arr.is_array() || arr.size() != 4) {
            throw ConfigError("'perturbation.yaw_calibration_offsets' must "
                              "hold 4 radians");
        }
        for (int i = 0; i < 4; ++i) {
            if (!arr[i].is_number()) {
                throw ConfigError("'perturbation.yaw_calibration_offsets' "
                                  "must hold numbers");
            }
            p.yaw_calibration_offset[i] = arr[i].get<double>();
        }
    }
    p.foot_placement_noise_sigma =
        get_number(obj, "perturbation", "foot_placement_noise_sigma",
                   p.foot_placement_noise_sigma);
    p.lateral_sway_bias = get_number(obj, "perturbation", "lateral_sway_bias",
                                     p.lateral_sway_bias);
    p.initial_position_sigma =
        get_number(obj, "perturbation", "initial_position_sigma",
                   p.initial_position_sigma);
    const std::int64_t seed =
        get_integer(obj, "perturbation", "rng_seed",
                    static_cast<std::int64_t>(p.rng_seed));
    if (seed < 0) throw ConfigError("'perturbation.rng_seed' must be >= 0");
    p.rng_seed = static_cast<std::uint64_t>(seed);
}

void parse_experiment(const json &obj, RunConfig &config) {
    reject_unknown(obj, "experiment", {"kind", "distance", "trials"});
    ExperimentConfig &e = config.experiment;
    e.kind = get_string(obj, "experiment", "kind", e.kind);
    if (e.kind != "line" && e.kind != "corner") {
        throw ConfigError("'experiment.kind' must be 'line' or 'corner'");
    }
    e.distance = get_number(obj, "experiment", "distance", e.distance);
    e.trials =
        static_cast<int>(get_integer(obj, "experiment", "trials", e.trials));
}

} // namespace

void RunConfig::validate() const {
    gait.validate();
    perturbation.validate();
    if (!(experiment.distance > 0.0)) {
        throw ConfigError("'experiment.distance' must be positive");
    }
    if (experiment.trials < 1) {
        throw ConfigError("'experiment.trials' must be at least 1");
    }
    if (!mounts_square(geometry, 1e-6)) {
        throw ConfigError("mount headings must differ by multiples of 90 "
                          "degrees");
    }
}

RunConfig parse_run_config(const std::string &json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") +
                          e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("configuration root must be a JSON object");
    }
    reject_unknown(doc, "configuration root",
                   {"geometry", "joint_limits", "gait", "perturbation",
                    "experiment"});

    RunConfig config;
    if (doc.contains("geometry")) parse_geometry(doc["geometry"], config);
    if (doc.contains("joint_limits")) parse_limits(doc["joint_limits"], config);
    if (doc.contains("gait")) parse_gait(doc["gait"], config);
    if (doc.contains("perturbation")) {
        parse_perturbation(doc["perturbation"], config);
    }
    if (doc.contains("experiment")) parse_experiment(doc["experiment"], config);
    config.validate();
    return config;
}

RunConfig load_run_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open configuration file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::string run_config_to_json(const RunConfig &config) {
    json doc;
    doc["geometry"] = {
        {"femur_length", config.geometry[0].femur_length},
        {"tibia_length", config.geometry[0].tibia_length},
        {"mount_radius", config.geometry[0].mount_offset.norm()},
        {"mount_headings",
         {config.geometry[0].mount_heading, config.geometry[1].mount_heading,
          config.geometry[2].mount_heading,
          config.geometry[3].mount_heading}}};
    doc["joint_limits"] = {
        {"hip_yaw", {config.limits.hip_yaw_min, config.limits.hip_yaw_max}},
        {"hip_pitch",
         {config.limits.hip_pitch_min, config.limits.hip_pitch_max}},
        {"knee", {config.limits.knee_min, config.limits.knee_max}}};
    json gait = {
        {"type", to_string(config.gait.gait)},
        {"theta1_init", config.gait.theta1_init},
        {"yaw_amplitude", config.gait.yaw_amplitude},
        {"step_period", config.gait.step_period},
        {"samples_per_step", config.gait.samples_per_step},
        {"spiral_slope", config.gait.spiral_slope},
        {"lead_diagonal", to_string(config.gait.lead_diagonal)},
        {"trot_part1_fraction", config.gait.trot_part1_fraction},
        {"swing_raise_fraction", config.gait.swing_raise_fraction}};
    gait["direction"] = config.gait.direction
                            ? json(*config.gait.direction)
                            : json(nullptr);
    doc["gait"] = std::move(gait);
    doc["perturbation"] = {
        {"yaw_calibration_offsets",
         {config.perturbation.yaw_calibration_offset[0],
          config.perturbation.yaw_calibration_offset[1],
          config.perturbation.yaw_calibration_offset[2],
          config.perturbation.yaw_calibration_offset[3]}},
        {"foot_placement_noise_sigma",
         config.perturbation.foot_placement_noise_sigma},
        {"lateral_sway_bias", config.perturbation.lateral_sway_bias},
        {"initial_position_sigma", config.perturbation.initial_position_sigma},
        {"rng_seed", config.perturbation.rng_seed}};
    doc["experiment"] = {{"kind", config.experiment.kind},
                         {"distance", config.experiment.distance},
                         {"trials", config.experiment.trials}};
    return doc.dump(2);
}

} // namespace morphogait
