#pragma once

#include <adt/errors.hpp>
#include <adt/recording.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <stop_token>
#include <thread>

namespace adt {

struct RestreamOptions {
    double speed = 1.0;
    Millis tick = 50.0;
};

/// Scheduler clock reads for one emitted row, relative to restream start.
struct EmissionTiming {
    /// Wall time at which the row became due: (t_i - t_0) / speed.
    Millis due;
    /// Wall time of the clock read that released the row.
    Millis emitted;
};

struct RestreamReport {
    std::size_t rows_emitted = 0;
    Millis wall_ms = 0.0;
    bool stopped = false;
};

/// Monotonic wall clock in milliseconds.
struct SteadyClock {
    Millis now_ms() const {
        using namespace std::chrono;
        return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
    }
    void sleep_until_ms(Millis t) const {
        using namespace std::chrono;
        std::this_thread::sleep_until(steady_clock::time_point(
            duration_cast<steady_clock::duration>(duration<double, std::milli>(t))));
    }
};

/// Replays a recording with its original timing.
///
/// With t_0 the first row's timestamp and tau the wall time elapsed since
/// start, every row with t_i <= t_0 + tau * speed is released, in recording
/// order. The scheduler wakes at each tick boundary, and earlier if the
/// next row falls due before the boundary, so no row is released before its
/// due time and none waits longer than one tick.
template <class Sink, class Clock = SteadyClock>
RestreamReport restream(const SessionRecording& rec, RestreamOptions opts, Sink&& sink, const Clock& clock = {},
                        std::stop_token stop = {}) {
    if (!(opts.speed > 0.0) || !std::isfinite(opts.speed)) throw InputError("restream: speed must be positive");
    if (!(opts.tick > 0.0) || !std::isfinite(opts.tick)) throw InputError("restream: tick must be positive");

    RestreamReport report;
    const Millis start = clock.now_ms();
    if (rec.rows.empty()) return report;

    const Millis t0 = rec.rows.front().t();
    std::size_t next = 0;
    while (next < rec.rows.size()) {
        if (stop.stop_requested()) {
            report.stopped = true;
            break;
        }
        const Millis tau = clock.now_ms() - start;
        while (next < rec.rows.size() && rec.rows[next].t() - t0 <= tau * opts.speed) {
            const auto& row = rec.rows[next];
            sink(row, EmissionTiming{(row.t() - t0) / opts.speed, tau});
            ++next;
            ++report.rows_emitted;
        }
        if (next == rec.rows.size()) break;
        const Millis next_tick = (std::floor(tau / opts.tick) + 1.0) * opts.tick;
        const Millis next_due = (rec.rows[next].t() - t0) / opts.speed;
        clock.sleep_until_ms(start + std::min(next_tick, next_due));
    }
    report.wall_ms = clock.now_ms() - start;
    return report;
}

}  // namespace adt
