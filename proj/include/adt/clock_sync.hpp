#pragma once

#include <adt/errors.hpp>
#include <adt/gaze.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <utility>

namespace adt {

/// Add `offset_ms` to a sender timestamp to express it on the receiver clock.
struct ClockOffset {
    double offset_ms = 0.0;
    Millis estimated_at = 0.0;
};

/// Four-timestamp offset estimate. t1/t4 are request-send and reply-receive
/// times on the client clock; t2/t3 are request-receive and reply-send on
/// the server clock. The result maps client time onto server time and is
/// off by (forward delay - return delay) / 2.
inline ClockOffset estimate_offset(Millis t1, Millis t2, Millis t3, Millis t4) {
    for (double t : {t1, t2, t3, t4})
        if (!std::isfinite(t)) throw InputError("estimate_offset: non-finite timestamp");
    if (t1 > t4) throw InputError("estimate_offset: t1 must not exceed t4");
    if (t2 > t3) throw InputError("estimate_offset: t2 must not exceed t3");
    return {((t2 - t1) + (t3 - t4)) / 2.0, t4};
}

struct LatencyStats {
    std::size_t count = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    double max_ms = 0.0;
    /// Samples whose corrected latency came out negative and was clamped to 0.
    std::size_t clamped = 0;

    /// "394 ± 235, max 973"
    std::string format() const {
        std::ostringstream os;
        os << std::fixed << std::setprecision(0) << mean_ms << " ± " << std_ms << ", max " << max_ms;
        return os.str();
    }
};

/// Streaming mean / population std / max of per-sample latencies.
class LatencyAccumulator {
public:
    void add(Millis origin_corrected, Millis received) {
        double d = received - origin_corrected;
        if (d < 0.0) {
            d = 0.0;
            ++clamped_;
        }
        // Welford
        ++n_;
        const double delta = d - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (d - mean_);
        max_ = n_ == 1 ? d : std::max(max_, d);
    }

    std::size_t count() const { return n_; }

    LatencyStats stats() const {
        if (n_ == 0) throw InputError("latency_stats: no samples");
        return {n_, mean_, std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_))), max_, clamped_};
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double max_ = 0.0;
    std::size_t clamped_ = 0;
};

/// Pairs are (t_origin corrected to the receiver clock, t_received).
inline LatencyStats latency_stats(std::span<const std::pair<Millis, Millis>> pairs) {
    LatencyAccumulator acc;
    for (const auto& [origin, received] : pairs) acc.add(origin, received);
    return acc.stats();
}

}  // namespace adt
