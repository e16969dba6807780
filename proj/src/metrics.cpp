#include "morphogait/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "morphogait/errors.hpp"
#include "morphogait/numfmt.hpp"

namespace morphogait {

namespace {

double point_segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double polyline_distance(const Vec2 &p, const ReferencePath &ref) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < ref.waypoints.size(); ++i) {
        best = std::min(best, point_segment_distance(p, ref.waypoints[i],
                                                     ref.waypoints[i + 1]));
    }
    return best;
}

std::string fixed_decimals(double v, int decimals) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr);
}

} // namespace

void ReferencePath::validate() const {
    if (waypoints.size() < 2) {
        throw ConfigError("reference path needs at least two waypoints");
    }
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        if ((waypoints[i + 1] - waypoints[i]).norm() == 0.0) {
            throw ConfigError("reference path has coincident consecutive "
                              "waypoints");
        }
    }
}

ReferencePath parse_reference(const std::string &spec) {
    ReferencePath ref;
    if (spec.rfind("line:", 0) == 0) {
        const double len = parse_double(spec.substr(5));
        ref.waypoints = {{0.0, 0.0}, {len, 0.0}};
    } else if (spec.rfind("corner:", 0) == 0) {
        const double len = parse_double(spec.substr(7));
        ref.waypoints = {{0.0, 0.0}, {len, 0.0}, {len, -len}};
    } else {
        std::stringstream ss(spec);
        std::string pair;
        while (std::getline(ss, pair, ';')) {
            const std::size_t comma = pair.find(',');
            if (comma == std::string::npos) {
                throw ConfigError("bad waypoint '" + pair +
                                  "' in reference spec");
            }
            ref.waypoints.push_back({parse_double(pair.substr(0, comma)),
                                     parse_double(pair.substr(comma + 1))});
        }
    }
    ref.validate();
    return ref;
}

std::vector<double> crosstrack_errors(const TrajectoryLog &log,
                                      const ReferencePath &ref) {
    ref.validate();
    if (log.samples.empty()) {
        throw ConfigError("cannot analyze an empty trajectory log");
    }
    std::vector<double> errors;
    errors.reserve(log.samples.size());
    for (const LogSample &s : log.samples) {
        errors.push_back(polyline_distance({s.pose.x, s.pose.y}, ref));
    }
    return errors;
}

ErrorReport error_report(const std::vector<TrajectoryLog> &logs,
                         const ReferencePath &ref) {
    if (logs.empty()) {
        throw ConfigError("error report needs at least one log");
    }
    ErrorReport report;
    double pooled_sq = 0.0;
    std::size_t pooled_n = 0;
    double rmse_sum = 0.0;
    for (const TrajectoryLog &log : logs) {
        const std::vector<double> errors = crosstrack_errors(log, ref);
        TrialError trial;
        trial.samples = errors.size();
        double sq = 0.0;
        for (double e : errors) {
            sq += e * e;
            trial.max_error = std::max(trial.max_error, e);
        }
        trial.rmse = std::sqrt(sq / static_cast<double>(errors.size()));
        pooled_sq += sq;
        pooled_n += errors.size();
        rmse_sum += trial.rmse;
        report.overall_max = std::max(report.overall_max, trial.max_error);
        report.trials.push_back(trial);
    }
    report.overall_rmse =
        std::sqrt(pooled_sq / static_cast<double>(pooled_n));
    report.trial_mean_rmse = rmse_sum / static_cast<double>(logs.size());
    return report;
}

std::string render_table(const ErrorReport &report, Unit unit) {
    const bool cm = unit == Unit::Centimeters;
    const double scale = cm ? 100.0 : 1.0;
    const int decimals = cm ? 1 : 4;
    const std::string rmse_head = cm ? "RMSE, cm" : "RMSE, m";
    const std::string max_head = cm ? "Max Error, cm" : "Max Error, m";

    std::ostringstream os;
    os << "        | " << rmse_head << " | " << max_head << '\n';
    const auto row = [&](const std::string &label, double rmse, double max) {
        std::string r = fixed_decimals(rmse * scale, decimals);
        std::string m = fixed_decimals(max * scale, decimals);
        os << label << " | ";
        os << std::string(rmse_head.size() > r.size()
                              ? rmse_head.size() - r.size()
                              : 0,
                          ' ')
           << r << " | ";
        os << std::string(max_head.size() > m.size()
                              ? max_head.size() - m.size()
                              : 0,
                          ' ')
           << m << '\n';
    };
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
        row("Trial " + std::to_string(i + 1), report.trials[i].rmse,
            report.trials[i].max_error);
    }
    row("Overall", report.overall_rmse, report.overall_max);
    os << "Trial-mean RMSE: "
       << fixed_decimals(report.trial_mean_rmse * scale, decimals)
       << (cm ? " cm" : " m") << '\n';
    return os.str();
}

void write_report_json(const ErrorReport &report, std::ostream &out) {
    nlohmann::ordered_json j;
    j["trials"] = nlohmann::ordered_json::array();
    for (const TrialError &t : report.trials) {
        j["trials"].push_back({{"rmse_m", t.rmse}, {"max_m", t.max_error}});
    }
    j["overall"] = {{"rmse_m", report.overall_rmse},
                    {"max_m", report.overall_max}};
    out << j.dump(2) << '\n';
}

} // namespace morphogait
