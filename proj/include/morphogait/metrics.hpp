#ifndef MORPHOGAIT_METRICS_HPP_
#define MORPHOGAIT_METRICS_HPP_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "morphogait/geometry.hpp"
#include "morphogait/locomotion_sim.hpp"

namespace morphogait {

// Crosstrack-error analysis of trajectory logs against a reference
// polyline: per-sample perpendicular distance to the nearest point of the
// path, summarized per trial and pooled across trials.

struct ReferencePath {
    std::vector<Vec2> waypoints; // polyline, at least two distinct points

    void validate() const; // throws ConfigError
};

/// `line:L` -> segment (0,0)-(L,0); `corner:L` -> right angle
/// (0,0)-(L,0)-(L,-L); otherwise `x1,y1;x2,y2;...`.
ReferencePath parse_reference(const std::string &spec);

struct TrialError {
    double rmse = 0.0;      // meters
    double max_error = 0.0; // meters
    std::size_t samples = 0;
};

struct ErrorReport {
    std::vector<TrialError> trials;
    double overall_rmse = 0.0; // RMS over all samples of all trials pooled
    double overall_max = 0.0;
    /// Plain mean of the per-trial RMSE values, emitted alongside the
    /// pooled figure for comparison.
    double trial_mean_rmse = 0.0;
};

/// Unsigned distance from every log sample to the reference polyline.
/// Throws ConfigError on an empty log.
std::vector<double> crosstrack_errors(const TrajectoryLog &log,
                                      const ReferencePath &ref);

ErrorReport error_report(const std::vector<TrajectoryLog> &logs,
                         const ReferencePath &ref);

enum class Unit { Centimeters, Meters };

/// Text table shaped like the experiment write-ups: one row per trial plus
/// an Overall row, one decimal in centimeters or four in meters.
std::string render_table(const ErrorReport &report,
                         Unit unit = Unit::Centimeters);

/// {"trials":[{"rmse_m":..,"max_m":..},...],"overall":{"rmse_m":..,"max_m":..}}
void write_report_json(const ErrorReport &report, std::ostream &out);

} // namespace morphogait

#endif // MORPHOGAIT_METRICS_HPP_
