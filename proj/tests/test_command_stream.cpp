#include <cmath>
#include <random>
#include <thread>

#include <doctest.h>

#include "morphogait/command_stream.hpp"
#include "morphogait/errors.hpp"

using namespace morphogait;

namespace {

CommandFrame zero_frame() {
    CommandFrame f;
    f.seq = 0;
    f.t = 0.0;
    f.targets.fill(0.0);
    return f;
}

CommandFrame random_command(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> yaw(-1.5, 1.5);
    std::uniform_real_distribution<double> pitch(-1.5, 1.5);
    std::uniform_real_distribution<double> knee(-3.1, 0.0);
    std::uniform_int_distribution<std::uint64_t> seq(0, 1u << 30);
    std::uniform_real_distribution<double> t(0.0, 100.0);
    CommandFrame f;
    f.seq = seq(rng);
    f.t = t(rng);
    for (int i = 0; i < kServoCount; ++i) {
        switch (i % 3) {
        case 0: f.targets[i] = yaw(rng); break;
        case 1: f.targets[i] = pitch(rng); break;
        default: f.targets[i] = knee(rng); break;
        }
    }
    return f;
}

FeedbackFrame random_feedback(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    std::uniform_real_distribution<double> volt(10.0, 16.0);
    std::uniform_real_distribution<double> temp(20.0, 80.0);
    std::uniform_int_distribution<std::uint64_t> seq(0, 1u << 30);
    FeedbackFrame f;
    f.seq = seq(rng);
    for (int i = 0; i < kServoCount; ++i) {
        f.servos[i] = {angle(rng), volt(rng), temp(rng)};
    }
    return f;
}

} // namespace

TEST_CASE("golden command frame bytes") {
    const std::string expected =
        "{\"v\":1,\"kind\":\"cmd\",\"seq\":0,\"t\":0.0,"
        "\"targets\":[0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0]}\n";
    CHECK(encode_frame(zero_frame()) == expected);
    const WireFrame decoded = decode_frame(expected);
    CHECK(std::get<CommandFrame>(decoded) == zero_frame());
}

TEST_CASE("golden feedback frame bytes") {
    FeedbackFrame fb;
    fb.seq = 3;
    for (int i = 0; i < kServoCount; ++i) {
        fb.servos[i] = {0.5, 14.8, 35.0};
    }
    const std::string line = encode_frame(fb);
    CHECK(line.rfind("{\"v\":1,\"kind\":\"fb\",\"seq\":3,\"servos\":[{\"angle"
                     "\":0.5,\"volt\":14.8,\"temp\":35.0},",
                     0) == 0);
    CHECK(std::get<FeedbackFrame>(decode_frame(line)) == fb);
}

TEST_CASE("encode/decode is a bijection on random frames") {
    std::mt19937_64 rng(4242);
    for (int k = 0; k < 2000; ++k) {
        const CommandFrame cmd = random_command(rng);
        const WireFrame round = decode_frame(encode_frame(cmd));
        CHECK(std::get<CommandFrame>(round) == cmd);

        const FeedbackFrame fb = random_feedback(rng);
        const WireFrame round_fb = decode_frame(encode_frame(fb));
        CHECK(std::get<FeedbackFrame>(round_fb) == fb);
    }
}

TEST_CASE("malformed frames are rejected") {
    CHECK_THROWS_AS(decode_frame("not json"), ProtocolError);
    CHECK_THROWS_AS(decode_frame("{\"v\":2,\"kind\":\"cmd\",\"seq\":0}"),
                    ProtocolError);
    CHECK_THROWS_AS(decode_frame("{\"v\":1,\"kind\":\"xx\",\"seq\":0}"),
                    ProtocolError);
    // Eleven targets instead of twelve.
    CHECK_THROWS_AS(
        decode_frame("{\"v\":1,\"kind\":\"cmd\",\"seq\":0,\"t\":0.0,"
                     "\"targets\":[0,0,0,0,0,0,0,0,0,0,0]}"),
        ProtocolError);
    CHECK_THROWS_AS(
        decode_frame("{\"v\":1,\"kind\":\"fb\",\"seq\":0,\"servos\":[]}"),
        ProtocolError);
    CHECK_THROWS_AS(decode_frame("{\"v\":1,\"kind\":\"cmd\",\"seq\":-1,"
                                 "\"t\":0.0,\"targets\":[0,0,0,0,0,0,0,0,0,"
                                 "0,0,0]}"),
                    ProtocolError);

    // Out-of-range target refuses to encode.
    CommandFrame bad = zero_frame();
    bad.targets[0] = 3.0; // beyond the +-pi/2 yaw range
    CHECK_THROWS_AS(encode_frame(bad), ProtocolError);
    bad = zero_frame();
    bad.targets[2] = 0.5; // knee must stay non-positive
    CHECK_THROWS_AS(encode_frame(bad), ProtocolError);
}

TEST_CASE("loopback servos echo and lag") {
    SUBCASE("zero lag echoes exactly") {
        LoopbackServos servos(0.0);
        std::mt19937_64 rng(7);
        const CommandFrame cmd = random_command(rng);
        const FeedbackFrame fb = servos.respond(cmd);
        CHECK(fb.seq == cmd.seq);
        for (int i = 0; i < kServoCount; ++i) {
            CHECK(fb.servos[i].angle == cmd.targets[i]);
            CHECK(fb.servos[i].voltage == doctest::Approx(14.8));
            CHECK(fb.servos[i].temperature == doctest::Approx(35.0));
        }
    }
    SUBCASE("first-order lag converges within five time constants") {
        const double tau = 0.05;
        const double period = 0.005;
        LoopbackServos servos(tau);
        const double step = 0.8;
        FeedbackFrame fb;
        CommandFrame cmd = zero_frame();
        const int frames = static_cast<int>(5.0 * tau / period);
        for (int k = 0; k <= frames; ++k) {
            cmd.seq = k;
            cmd.t = k * period;
            cmd.targets.fill(step);
            fb = servos.respond(cmd);
        }
        const double err = std::abs(fb.servos[0].angle - step) / step;
        CHECK(err < 0.01);
        // Matches the closed-form first-order response.
        CHECK(fb.servos[0].angle ==
              doctest::Approx(step * (1.0 - std::exp(-5.0))).epsilon(1e-6));
    }
}

TEST_CASE("streaming a plan through the in-process loopback") {
    const FootPlan plan = build_plan(GaitConfig{}, default_chassis());

    SUBCASE("ten seconds at five milliseconds is two thousand frames") {
        LoopbackSink sink(0.0);
        StreamOptions options;
        options.period = 0.005;
        options.duration = 10.0;
        const StreamSummary summary = stream_plan(plan, options, sink);
        CHECK(summary.frames_sent == 2000);
        CHECK(summary.feedback_received == 2000);
        CHECK(summary.max_seq_gap == 0);
        CHECK(summary.timeouts == 0);
        CHECK(summary.max_tracking_error == doctest::Approx(0.0));
    }
    SUBCASE("lagged loopback reports its tracking error") {
        LoopbackSink sink(0.05);
        StreamOptions options;
        options.period = 0.005;
        options.duration = 2.0;
        const StreamSummary summary = stream_plan(plan, options, sink);
        CHECK(summary.frames_sent == 400);
        CHECK(summary.max_tracking_error > 0.0);
    }
    SUBCASE("invalid options are rejected") {
        LoopbackSink sink(0.0);
        StreamOptions bad;
        bad.period = 0.0;
        CHECK_THROWS_AS(stream_plan(plan, bad, sink), ConfigError);
    }
}

TEST_CASE("TCP loopback round trip") {
    const FootPlan plan = build_plan(GaitConfig{}, default_chassis());
    try {
        LoopbackServer server("127.0.0.1:0", 0.0);
        REQUIRE(server.port() > 0);
        std::thread server_thread([&server] { server.serve_once(); });

        {
            TcpFrameSink sink("127.0.0.1:" + std::to_string(server.port()));
            StreamOptions options;
            options.period = 0.005;
            options.duration = 0.5;
            const StreamSummary summary = stream_plan(plan, options, sink);
            CHECK(summary.frames_sent == 100);
            CHECK(summary.feedback_received == 100);
            CHECK(summary.max_seq_gap == 0);
        }
        server_thread.join();
    } catch (const TransportError &e) {
        // Sandboxes without loopback sockets skip the wire-level check.
        MESSAGE("skipping TCP loopback: ", e.what());
    }

    CHECK_THROWS_AS(TcpFrameSink("127.0.0.1:1"), TransportError);
}
