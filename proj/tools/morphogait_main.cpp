// Command-line harness: gait generation, walking experiments, crosstrack
// metrics, and the joint-command stream.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 I/O or
// transport error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "morphogait/command_stream.hpp"
#include "morphogait/errors.hpp"
#include "morphogait/gait_engine.hpp"
#include "morphogait/locomotion_sim.hpp"
#include "morphogait/metrics.hpp"
#include "morphogait/numfmt.hpp"
#include "morphogait/run_config.hpp"

namespace fs = std::filesystem;
using namespace morphogait;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

int verbosity() {
    const char *env = std::getenv("MORPHOGAIT_LOG");
    if (env == nullptr) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string &msg) {
    if (verbosity() >= 1) std::cerr << "[morphogait] " << msg << '\n';
}

void write_file_atomic(const fs::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw TransportError("cannot open '" + tmp.string() +
                                 "' for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw TransportError("short write to '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

RunConfig load_or_default(const std::string &config_path) {
    if (config_path.empty()) {
        RunConfig config;
        config.validate();
        return config;
    }
    return load_run_config(config_path);
}

int cmd_gait(const std::string &config_path, const std::string &out_path) {
    const RunConfig config = load_or_default(config_path);
    const FootPlan plan =
        build_plan(config.gait, config.geometry, config.limits);
    std::ostringstream csv;
    write_plan_csv(plan, csv);
    write_file_atomic(out_path, csv.str());
    log_info("wrote " + out_path);
    return kExitOk;
}

int cmd_simulate(const std::string &config_path, const std::string &out_dir,
                 long long seed_override, int trials_override) {
    RunConfig config = load_or_default(config_path);
    if (seed_override >= 0) {
        config.perturbation.rng_seed =
            static_cast<std::uint64_t>(seed_override);
    }
    if (trials_override > 0) config.experiment.trials = trials_override;
    config.validate();
    const std::string config_json = run_config_to_json(config);

    const auto write_log = [&](const TrajectoryLog &log,
                               const std::string &stem) {
        std::ostringstream csv;
        write_log_csv(log, csv);
        write_file_atomic(fs::path(out_dir) / (stem + ".csv"), csv.str());
        std::ostringstream meta;
        write_log_meta(log, config_json, meta);
        write_file_atomic(fs::path(out_dir) / (stem + ".meta.json"),
                          meta.str());
    };

    if (config.experiment.kind == "corner") {
        const TrajectoryLog log = run_corner_experiment(
            config.gait, config.perturbation, -kPi / 2.0, config.geometry,
            config.limits);
        write_log(log, "corner");
        std::cout << "corner experiment: " << log.samples.size()
                  << " samples -> " << out_dir << "/corner.csv\n";
        return kExitOk;
    }

    const std::vector<TrajectoryLog> logs = run_line_experiment(
        config.gait, config.perturbation, config.experiment.distance,
        config.experiment.trials, config.geometry, config.limits);
    for (std::size_t i = 0; i < logs.size(); ++i) {
        write_log(logs[i], "trial_" + std::to_string(i + 1));
    }
    std::cout << "line experiment: " << logs.size() << " trial(s) of "
              << format_double(config.experiment.distance) << " m -> "
              << out_dir << "/trial_*.csv\n";
    return kExitOk;
}

int cmd_metrics(const std::vector<std::string> &log_paths,
                const std::string &reference_spec,
                const std::string &out_path) {
    const ReferencePath ref = parse_reference(reference_spec);
    std::vector<TrajectoryLog> logs;
    logs.reserve(log_paths.size());
    for (const std::string &path : log_paths) {
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("cannot open trajectory log '" + path + "'");
        }
        logs.push_back(read_log_csv(in));
    }
    const ErrorReport report = error_report(logs, ref);
    std::cout << render_table(report, Unit::Centimeters);
    if (!out_path.empty()) {
        std::ostringstream json;
        write_report_json(report, json);
        write_file_atomic(out_path, json.str());
        log_info("wrote " + out_path);
    }
    return kExitOk;
}

int cmd_stream_serve(const std::string &address, double lag_tau) {
    LoopbackServer server(address, lag_tau);
    std::cout << "loopback simulator listening on port " << server.port()
              << "\n"
              << std::flush;
    const std::uint64_t served = server.serve_once();
    std::cout << "served " << served << " frame(s)\n";
    return kExitOk;
}

int cmd_stream_drive(const std::string &config_path,
                     const std::string &address, double period,
                     double duration, bool pace) {
    const RunConfig config = load_or_default(config_path);
    const FootPlan plan =
        build_plan(config.gait, config.geometry, config.limits);
    TcpFrameSink sink(address);
    StreamOptions options;
    options.period = period;
    options.duration = duration;
    options.pace = pace;
    const StreamSummary summary = stream_plan(plan, options, sink);
    std::cout << "{\"frames_sent\":" << summary.frames_sent
              << ",\"feedback_received\":" << summary.feedback_received
              << ",\"max_seq_gap\":" << summary.max_seq_gap
              << ",\"timeouts\":" << summary.timeouts
              << ",\"max_tracking_error\":"
              << format_double(summary.max_tracking_error)
              << ",\"final_tracking_error\":"
              << format_double(summary.final_tracking_error) << "}\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"MorphoGait quadruped gait engine and kinematic walking "
                 "simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string reference_spec;
    std::string address = "127.0.0.1:9901";
    std::vector<std::string> log_paths;
    std::string role;
    long long seed_override = -1;
    int trials_override = 0;
    double period = 0.005;
    double duration = 10.0;
    double lag_tau = 0.0;
    bool pace = false;

    CLI::App *gait = app.add_subcommand("gait", "Generate a gait cycle as CSV");
    gait->add_option("--config", config_path, "Run configuration (JSON)");
    gait->add_option("--out", out_path, "Output CSV path")->required();

    CLI::App *simulate =
        app.add_subcommand("simulate", "Run a line or corner experiment");
    simulate->add_option("--config", config_path, "Run configuration (JSON)");
    simulate->add_option("--out", out_path, "Output directory")->required();
    simulate->add_option("--seed", seed_override, "Override the RNG seed");
    simulate->add_option("--trials", trials_override,
                         "Override the trial count");

    CLI::App *metrics =
        app.add_subcommand("metrics", "Crosstrack errors against a reference");
    metrics->add_option("logs", log_paths, "Trajectory CSV file(s)")
        ->required()
        ->expected(-1);
    metrics
        ->add_option("--reference", reference_spec,
                     "line:L, corner:L, or x1,y1;x2,y2;...")
        ->required();
    metrics->add_option("--out", out_path, "Write the JSON report here");

    CLI::App *stream =
        app.add_subcommand("stream", "Serve or drive the command stream");
    stream->add_option("role", role, "serve or drive")
        ->required()
        ->check(CLI::IsMember({"serve", "drive"}));
    stream->add_option("--address", address, "host:port");
    stream->add_option("--config", config_path, "Run configuration (JSON)");
    stream->add_option("--period", period, "Command period, seconds");
    stream->add_option("--duration", duration, "Stream length, seconds");
    stream->add_option("--lag", lag_tau,
                       "Servo lag time constant for serve, seconds");
    stream->add_flag("--pace", pace, "Pace frames to the wall clock");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gait->parsed()) return cmd_gait(config_path, out_path);
        if (simulate->parsed()) {
            return cmd_simulate(config_path, out_path, seed_override,
                                trials_override);
        }
        if (metrics->parsed()) {
            return cmd_metrics(log_paths, reference_spec, out_path);
        }
        if (stream->parsed()) {
            if (role == "serve") return cmd_stream_serve(address, lag_tau);
            return cmd_stream_drive(config_path, address, period, duration,
                                    pace);
        }
    } catch (const TransportError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
