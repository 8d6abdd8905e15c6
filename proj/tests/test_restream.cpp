#include "support/harness.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using adt::EmissionTiming;
using adt::RecordingRow;
using adt::RestreamOptions;

namespace {

adt::SessionRecording rows_at(std::vector<double> times) {
    adt::SessionRecording rec;
    rec.meta.user_ids = {"A"};
    std::uint64_t q = 0;
    for (double t : times) rec.rows.push_back({harness::sample("A", q++, t, 1, 1), std::nullopt});
    return rec;
}

struct Emission {
    std::uint64_t seq;
    EmissionTiming timing;
};

std::vector<Emission> run_fake(const adt::SessionRecording& rec, RestreamOptions opts, double* now,
                               std::function<double()> overshoot = [] { return 0.0; }) {
    std::vector<Emission> out;
    harness::FakeClock clock{now, std::move(overshoot)};
    adt::restream(
        rec, opts, [&](const RecordingRow& r, const EmissionTiming& t) { out.push_back({r.sample.seq, t}); }, clock);
    return out;
}

}  // namespace

TEST(Restream, ScheduleWalkthrough) {
    double now = 1000;
    const auto e = run_fake(rows_at({0, 100, 200}), {1.0, 50.0}, &now);
    ASSERT_EQ(e.size(), 3u);
    EXPECT_EQ(e[0].timing.emitted, 0.0);
    EXPECT_GE(e[1].timing.emitted, 100.0);
    EXPECT_LT(e[1].timing.emitted, 150.0);
    EXPECT_GE(e[2].timing.emitted, 200.0);
    EXPECT_LT(e[2].timing.emitted, 250.0);
}

TEST(Restream, SpeedScalesWallTime) {
    double now = 0;
    const auto e = run_fake(rows_at({0, 100, 200}), {2.0, 50.0}, &now);
    ASSERT_EQ(e.size(), 3u);
    EXPECT_LE(e.back().timing.emitted, 100.0 + 50.0);
    EXPECT_EQ(e.back().timing.due, 100.0);
}

TEST(Restream, EmptyRecordingCompletesImmediately) {
    double now = 5;
    int calls = 0;
    harness::FakeClock clock{&now};
    const auto report = adt::restream(rows_at({}), {}, [&](const RecordingRow&, const EmissionTiming&) { ++calls; }, clock);
    EXPECT_EQ(report.rows_emitted, 0u);
    EXPECT_EQ(report.wall_ms, 0.0);
    EXPECT_EQ(calls, 0);
    EXPECT_EQ(now, 5.0);
}

TEST(Restream, InvalidOptionsAreRejected) {
    const auto rec = rows_at({0});
    auto sink = [](const RecordingRow&, const EmissionTiming&) {};
    EXPECT_THROW(adt::restream(rec, {0.0, 50.0}, sink), adt::InputError);
    EXPECT_THROW(adt::restream(rec, {1.0, -1.0}, sink), adt::InputError);
}

TEST(Restream, NeverEarlyNeverReorderedUnderRandomOvershoot) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> gap(0, 120), over(0, 30), speed(0.5, 8), tick(5, 100);
    for (int run = 0; run < 100; ++run) {
        std::vector<double> times{0};
        for (int i = 0; i < 60; ++i) times.push_back(times.back() + gap(rng));
        const auto rec = rows_at(times);
        const RestreamOptions opts{speed(rng), tick(rng)};
        double now = 0;
        const auto e = run_fake(rec, opts, &now, [&] { return over(rng); });
        ASSERT_EQ(e.size(), rec.rows.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            EXPECT_EQ(e[i].seq, i);
            EXPECT_GE(e[i].timing.emitted, e[i].timing.due);
        }
    }
}

TEST(Restream, WithoutOvershootLatenessStaysBelowOneTick) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> gap(0, 120);
    std::vector<double> times{0};
    for (int i = 0; i < 200; ++i) times.push_back(times.back() + gap(rng));
    double now = 0;
    for (const auto& x : run_fake(rows_at(times), {1.0, 50.0}, &now)) {
        EXPECT_GE(x.timing.emitted, x.timing.due);
        EXPECT_LT(x.timing.emitted - x.timing.due, 50.0);
    }
}

TEST(Restream, StopTokenEndsTheRun) {
    std::stop_source stop;
    double now = 0;
    harness::FakeClock clock{&now};
    std::size_t n = 0;
    const auto report = adt::restream(
        rows_at({0, 100, 200, 300}), {},
        [&](const RecordingRow&, const EmissionTiming&) {
            if (++n == 2) stop.request_stop();
        },
        clock, stop.get_token());
    EXPECT_TRUE(report.stopped);
    EXPECT_EQ(report.rows_emitted, 2u);
}

TEST(Restream, RealClockShortRun) {
    std::vector<double> times;
    for (int i = 0; i < 30; ++i) times.push_back(i * 1000.0 / 30.0);
    std::vector<EmissionTiming> got;
    const auto report = adt::restream(rows_at(times), {1.0, 50.0},
                                      [&](const RecordingRow&, const EmissionTiming& t) { got.push_back(t); });
    EXPECT_EQ(report.rows_emitted, 30u);
    for (const auto& t : got) EXPECT_GE(t.emitted, t.due);
    EXPECT_GE(report.wall_ms, times.back());
}

TEST(Restream, PersistedRecordingReplaysTheSameRows) {
    const auto rec = harness::synthetic_session(adt::Behavior::Focal, 5, 4);
    std::stringstream io;
    adt::save_recording(rec, io);
    const auto loaded = adt::load_recording(io);
    std::vector<RecordingRow> replayed;
    double now = 0;
    harness::FakeClock clock{&now};
    adt::restream(loaded, {50.0, 10.0}, [&](const RecordingRow& r, const EmissionTiming&) { replayed.push_back(r); }, clock);
    EXPECT_EQ(replayed, rec.rows);
}
