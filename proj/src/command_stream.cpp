#include "morphogait/command_stream.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>
#include <thread>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <json.hpp>

#include "morphogait/errors.hpp"

namespace morphogait {

namespace {

using json = nlohmann::ordered_json;

void check_target_range(double v, int index, const JointLimits &limits) {
    double lo = 0.0, hi = 0.0;
    switch (index % 3) {
    case 0: lo = limits.hip_yaw_min; hi = limits.hip_yaw_max; break;
    case 1: lo = limits.hip_pitch_min; hi = limits.hip_pitch_max; break;
    default: lo = limits.knee_min; hi = limits.knee_max; break;
    }
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "target " << index << " = " << v << " outside mechanical range ["
           << lo << ", " << hi << "]";
        throw ProtocolError(os.str());
    }
}

double require_number(const json &j, const char *key) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ProtocolError(std::string("frame missing numeric '") + key +
                            "'");
    }
    return j[key].get<double>();
}

struct AddressParts {
    std::string host;
    std::string port;
};

AddressParts split_address(const std::string &address) {
    const std::size_t colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 ||
        colon + 1 >= address.size()) {
        throw TransportError("address must be host:port, got '" + address +
                             "'");
    }
    return {address.substr(0, colon), address.substr(colon + 1)};
}

// Reads one newline-terminated line from fd into out (newline stripped).
// Returns false on orderly EOF before any byte of a new line.
bool read_line(int fd, std::string &buffer, std::string &out) {
    for (;;) {
        const std::size_t nl = buffer.find('\n');
        if (nl != std::string::npos) {
            out = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            return true;
        }
        char chunk[4096];
        const ssize_t got = ::read(fd, chunk, sizeof(chunk));
        if (got == 0) {
            if (!buffer.empty()) {
                out = buffer;
                buffer.clear();
                return true;
            }
            return false;
        }
        if (got < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK) {
                return false; // receive timeout
            }
            throw TransportError(std::string("read failed: ") +
                                 std::strerror(errno));
        }
        buffer.append(chunk, static_cast<std::size_t>(got));
    }
}

void write_all(int fd, const std::string &data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t sent = ::write(fd, data.data() + off, data.size() - off);
        if (sent < 0) {
            throw TransportError(std::string("write failed: ") +
                                 std::strerror(errno));
        }
        off += static_cast<std::size_t>(sent);
    }
}

} // namespace

std::string encode_frame(const CommandFrame &frame, const JointLimits &limits) {
    for (int i = 0; i < kServoCount; ++i) {
        check_target_range(frame.targets[i], i, limits);
    }
    json j;
    j["v"] = kWireVersion;
    j["kind"] = "cmd";
    j["seq"] = frame.seq;
    j["t"] = frame.t;
    j["targets"] = frame.targets;
    return j.dump() + "\n";
}

std::string encode_frame(const FeedbackFrame &frame) {
    json j;
    j["v"] = kWireVersion;
    j["kind"] = "fb";
    j["seq"] = frame.seq;
    json servos = json::array();
    for (const ServoReading &s : frame.servos) {
        json r;
        r["angle"] = s.angle;
        r["volt"] = s.voltage;
        r["temp"] = s.temperature;
        servos.push_back(std::move(r));
    }
    j["servos"] = std::move(servos);
    return j.dump() + "\n";
}

WireFrame decode_frame(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
        line.remove_suffix(1);
    }
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error &e) {
        throw ProtocolError(std::string("frame is not valid JSON: ") +
                            e.what());
    }
    if (!j.is_object()) throw ProtocolError("frame is not a JSON object");
    if (!j.contains("v") || !j["v"].is_number_integer() ||
        j["v"].get<int>() != kWireVersion) {
        throw ProtocolError("unsupported or missing wire version");
    }
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw ProtocolError("frame missing 'kind'");
    }
    if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
        throw ProtocolError("frame missing unsigned 'seq'");
    }
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "cmd") {
        CommandFrame f;
        f.seq = j["seq"].get<std::uint64_t>();
        f.t = require_number(j, "t");
        if (!j.contains("targets") || !j["targets"].is_array() ||
            j["targets"].size() != kServoCount) {
            throw ProtocolError("command frame needs exactly 12 targets");
        }
        for (int i = 0; i < kServoCount; ++i) {
            if (!j["targets"][i].is_number()) {
                throw ProtocolError("non-numeric target in command frame");
            }
            f.targets[i] = j["targets"][i].get<double>();
        }
        return f;
    }
    if (kind == "fb") {
        FeedbackFrame f;
        f.seq = j["seq"].get<std::uint64_t>();
        if (!j.contains("servos") || !j["servos"].is_array() ||
            j["servos"].size() != kServoCount) {
            throw ProtocolError("feedback frame needs exactly 12 servo "
                                "records");
        }
        for (int i = 0; i < kServoCount; ++i) {
            const json &r = j["servos"][i];
            if (!r.is_object()) {
                throw ProtocolError("servo record is not an object");
            }
            f.servos[i] = {require_number(r, "angle"),
                           require_number(r, "volt"),
                           require_number(r, "temp")};
        }
        return f;
    }
    throw ProtocolError("unknown frame kind '" + kind + "'");
}

LoopbackServos::LoopbackServos(double lag_tau, double voltage,
                               double temperature)
    : lag_tau_(lag_tau), voltage_(voltage), temperature_(temperature) {}

FeedbackFrame LoopbackServos::respond(const CommandFrame &cmd) {
    double alpha = 1.0;
    if (lag_tau_ > 0.0) {
        const double dt = first_ ? 0.0 : std::max(cmd.t - last_t_, 0.0);
        alpha = 1.0 - std::exp(-dt / lag_tau_);
    }
    first_ = false;
    last_t_ = cmd.t;

    FeedbackFrame fb;
    fb.seq = cmd.seq;
    for (int i = 0; i < kServoCount; ++i) {
        state_[i] += alpha * (cmd.targets[i] - state_[i]);
        fb.servos[i] = {state_[i], voltage_, temperature_};
    }
    return fb;
}

LoopbackSink::LoopbackSink(double lag_tau) : servos_(lag_tau) {}

std::optional<FeedbackFrame> LoopbackSink::exchange(const CommandFrame &cmd) {
    ++frames_seen_;
    return servos_.respond(cmd);
}

StreamSummary stream_plan(const FootPlan &plan, const StreamOptions &options,
                          FrameSink &sink) {
    if (!(options.period > 0.0)) {
        throw ConfigError("stream period must be positive");
    }
    if (!(options.duration > 0.0)) {
        throw ConfigError("stream duration must be positive");
    }
    const std::uint64_t frames = static_cast<std::uint64_t>(
        std::llround(options.duration / options.period));

    StreamSummary summary;
    std::optional<std::uint64_t> last_fb_seq;
    const auto wall_start = std::chrono::steady_clock::now();

    for (std::uint64_t k = 0; k < frames; ++k) {
        CommandFrame cmd;
        cmd.seq = k;
        cmd.t = static_cast<double>(k) * options.period;
        const double phase =
            std::fmod(cmd.t, plan.config.step_period) / plan.config.step_period;
        for (int limb = 0; limb < 4; ++limb) {
            const JointAngles q = plan.interpolate(limb, phase);
            cmd.targets[3 * limb + 0] = q.hip_yaw;
            cmd.targets[3 * limb + 1] = q.hip_pitch;
            cmd.targets[3 * limb + 2] = q.knee;
        }

        if (options.pace && k > 0) {
            std::this_thread::sleep_until(
                wall_start + std::chrono::duration_cast<
                                 std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(cmd.t)));
        }

        ++summary.frames_sent;
        const std::optional<FeedbackFrame> fb = sink.exchange(cmd);
        if (!fb) {
            ++summary.timeouts;
            continue;
        }
        ++summary.feedback_received;
        if (last_fb_seq) {
            const std::uint64_t gap = fb->seq - *last_fb_seq - 1;
            summary.max_seq_gap = std::max(summary.max_seq_gap, gap);
        }
        last_fb_seq = fb->seq;

        double err = 0.0;
        for (int i = 0; i < kServoCount; ++i) {
            err = std::max(err,
                           std::abs(fb->servos[i].angle - cmd.targets[i]));
        }
        summary.max_tracking_error = std::max(summary.max_tracking_error, err);
        summary.final_tracking_error = err;
    }
    return summary;
}

TcpFrameSink::TcpFrameSink(const std::string &address, double timeout_seconds) {
    const AddressParts parts = split_address(address);

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *res = nullptr;
    const int rc =
        ::getaddrinfo(parts.host.c_str(), parts.port.c_str(), &hints, &res);
    if (rc != 0) {
        throw TransportError("cannot resolve '" + address +
                             "': " + gai_strerror(rc));
    }
    int fd = -1;
    std::string err = "no addresses";
    for (addrinfo *ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            err = std::strerror(errno);
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        err = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        throw TransportError("cannot connect to '" + address + "': " + err);
    }

    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout_seconds);
    tv.tv_usec = static_cast<suseconds_t>(
        (timeout_seconds - static_cast<double>(tv.tv_sec)) * 1e6);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    fd_ = fd;
}

TcpFrameSink::~TcpFrameSink() {
    if (fd_ >= 0) ::close(fd_);
}

std::optional<FeedbackFrame> TcpFrameSink::exchange(const CommandFrame &cmd) {
    write_all(fd_, encode_frame(cmd));
    std::string line;
    if (!read_line(fd_, buffer_, line)) {
        return std::nullopt; // timeout or server went away
    }
    const WireFrame frame = decode_frame(line);
    if (const FeedbackFrame *fb = std::get_if<FeedbackFrame>(&frame)) {
        return *fb;
    }
    throw ProtocolError("expected a feedback frame from the server");
}

LoopbackServer::LoopbackServer(const std::string &address, double lag_tau)
    : lag_tau_(lag_tau) {
    const AddressParts parts = split_address(address);

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo *res = nullptr;
    const int rc =
        ::getaddrinfo(parts.host.c_str(), parts.port.c_str(), &hints, &res);
    if (rc != 0) {
        throw TransportError("cannot resolve '" + address +
                             "': " + gai_strerror(rc));
    }
    int fd = -1;
    std::string err = "no addresses";
    for (addrinfo *ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            err = std::strerror(errno);
            continue;
        }
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        err = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        throw TransportError("cannot bind '" + address + "': " + err);
    }
    if (::listen(fd, 1) != 0) {
        const std::string msg = std::strerror(errno);
        ::close(fd);
        throw TransportError("listen failed: " + msg);
    }

    sockaddr_storage bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(fd, reinterpret_cast<sockaddr *>(&bound), &len) == 0) {
        if (bound.ss_family == AF_INET) {
            port_ = ntohs(reinterpret_cast<sockaddr_in *>(&bound)->sin_port);
        } else if (bound.ss_family == AF_INET6) {
            port_ = ntohs(reinterpret_cast<sockaddr_in6 *>(&bound)->sin6_port);
        }
    }
    listen_fd_ = fd;
}

LoopbackServer::~LoopbackServer() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint64_t LoopbackServer::serve_once() {
    const int conn = ::accept(listen_fd_, nullptr, nullptr);
    if (conn < 0) {
        throw TransportError(std::string("accept failed: ") +
                             std::strerror(errno));
    }
    LoopbackServos servos(lag_tau_);
    std::uint64_t served = 0;
    std::string buffer, line;
    try {
        while (read_line(conn, buffer, line)) {
            if (line.empty()) continue;
            const WireFrame frame = decode_frame(line);
            const CommandFrame *cmd = std::get_if<CommandFrame>(&frame);
            if (cmd == nullptr) {
                throw ProtocolError("loopback server expects command frames");
            }
            write_all(conn, encode_frame(servos.respond(*cmd)));
            ++served;
        }
    } catch (...) {
        ::close(conn);
        throw;
    }
    ::close(conn);
    return served;
}

} // namespace morphogait
