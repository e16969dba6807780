#ifndef MORPHOGAIT_COMMAND_STREAM_HPP_
#define MORPHOGAIT_COMMAND_STREAM_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "morphogait/gait_engine.hpp"

namespace morphogait {

// Joint-command streaming: newline-delimited JSON frames carrying 12-joint
// setpoints at a fixed period, answered by simulated servo telemetry
// (angle, voltage, temperature). One writer and one reader per connection;
// ordering is guaranteed by the sequence number.
//
// Wire format, one object per line, UTF-8:
//   {"v":1,"kind":"cmd","seq":N,"t":S,"targets":[12 numbers]}
//   {"v":1,"kind":"fb","seq":N,"servos":[{"angle":A,"volt":V,"temp":T} x12]}

inline constexpr int kServoCount = 12;
inline constexpr int kWireVersion = 1;

/// Joint setpoints in limb-major order (l0..l3, each yaw/pitch/knee).
struct CommandFrame {
    std::uint64_t seq = 0;
    double t = 0.0; // seconds since stream start
    std::array<double, kServoCount> targets{};

    bool operator==(const CommandFrame &) const = default;
};

struct ServoReading {
    double angle = 0.0;       // radians
    double voltage = 14.8;    // volts
    double temperature = 35.0; // degrees Celsius

    bool operator==(const ServoReading &) const = default;
};

struct FeedbackFrame {
    std::uint64_t seq = 0;
    std::array<ServoReading, kServoCount> servos{};

    bool operator==(const FeedbackFrame &) const = default;
};

using WireFrame = std::variant<CommandFrame, FeedbackFrame>;

/// One newline-terminated JSON line. Targets outside the mechanical
/// ranges are an encoding error (ProtocolError).
std::string encode_frame(const CommandFrame &frame,
                         const JointLimits &limits = {});
std::string encode_frame(const FeedbackFrame &frame);

/// Inverse of encode_frame; rejects wrong version, kind, arity, or
/// non-numeric fields with ProtocolError. The trailing newline is
/// optional.
WireFrame decode_frame(std::string_view line);

/// Simulated servo bank: echoes targets through a first-order lag with
/// time constant `lag_tau` (zero snaps exactly), reporting a fixed nominal
/// voltage and temperature. State advances by the command timestamps.
class LoopbackServos {
  public:
    explicit LoopbackServos(double lag_tau = 0.0, double voltage = 14.8,
                            double temperature = 35.0);
    FeedbackFrame respond(const CommandFrame &cmd);

  private:
    double lag_tau_;
    double voltage_;
    double temperature_;
    double last_t_ = 0.0;
    bool first_ = true;
    std::array<double, kServoCount> state_{};
};

/// Where command frames go and feedback comes back from. exchange()
/// returns nothing on a feedback timeout.
class FrameSink {
  public:
    virtual ~FrameSink() = default;
    virtual std::optional<FeedbackFrame> exchange(const CommandFrame &cmd) = 0;
};

/// In-process sink wrapping LoopbackServos.
class LoopbackSink : public FrameSink {
  public:
    explicit LoopbackSink(double lag_tau = 0.0);
    std::optional<FeedbackFrame> exchange(const CommandFrame &cmd) override;
    std::uint64_t frames_seen() const { return frames_seen_; }

  private:
    LoopbackServos servos_;
    std::uint64_t frames_seen_ = 0;
};

struct StreamOptions {
    double period = 0.005;  // seconds between command frames
    double duration = 10.0; // stream length, seconds
    bool pace = false;      // sleep to real time between frames
};

struct StreamSummary {
    std::uint64_t frames_sent = 0;
    std::uint64_t feedback_received = 0;
    std::uint64_t max_seq_gap = 0;
    std::uint64_t timeouts = 0;
    double max_tracking_error = 0.0;   // radians, worst |target - angle|
    double final_tracking_error = 0.0; // radians, at the last frame
};

/// Samples the plan at the command period (linear between plan samples)
/// and drives the sink, collecting telemetry into the summary.
StreamSummary stream_plan(const FootPlan &plan, const StreamOptions &options,
                          FrameSink &sink);

/// TCP sink: connects to a loopback server at "host:port".
/// Throws TransportError when the connection cannot be established.
class TcpFrameSink : public FrameSink {
  public:
    explicit TcpFrameSink(const std::string &address,
                          double timeout_seconds = 5.0);
    ~TcpFrameSink() override;
    TcpFrameSink(const TcpFrameSink &) = delete;
    TcpFrameSink &operator=(const TcpFrameSink &) = delete;
    std::optional<FeedbackFrame> exchange(const CommandFrame &cmd) override;

  private:
    int fd_ = -1;
    std::string buffer_;
};

/// TCP loopback simulator: binds "host:port" (port 0 picks a free one),
/// serves one connection to completion per serve_once() call.
class LoopbackServer {
  public:
    LoopbackServer(const std::string &address, double lag_tau);
    ~LoopbackServer();
    LoopbackServer(const LoopbackServer &) = delete;
    LoopbackServer &operator=(const LoopbackServer &) = delete;

    int port() const { return port_; }
    /// Blocks until a client connects and finishes; returns frames served.
    std::uint64_t serve_once();

  private:
    int listen_fd_ = -1;
    int port_ = 0;
    double lag_tau_;
};

} // namespace morphogait

#endif // MORPHOGAIT_COMMAND_STREAM_HPP_
