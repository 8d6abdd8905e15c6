#pragma once

#include <adt/clock_sync.hpp>
#include <adt/errors.hpp>
#include <adt/recording.hpp>
#include <adt/session_pipeline.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adt {

/// Pearson product-moment correlation.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    if (x.size() < 3) throw InputError("pearson: need at least 3 points");
    auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double d) { return d == v.front(); });
    };
    if (constant(x) || constant(y)) throw CorrelationError("pearson: zero variance, correlation undefined");
    const double mx = stats::mean(x);
    const double my = stats::mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw CorrelationError("pearson: zero variance, correlation undefined");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Result of running the measure pipeline over a whole recording.
struct OfflineRun {
    SessionSummary summary;
    std::map<std::string, std::vector<MeasurePoint>> series;
};

/// Replays `rec` through a SessionPipeline in recording order. Users,
/// screen and rate come from the recording metadata. Recorded clock offsets
/// are applied to origin timestamps; window origin is the earliest
/// corrected timestamp unless `base.t0` is set.
inline OfflineRun run_offline(const SessionRecording& rec, SessionConfig base = {}) {
    base.session_id = rec.meta.session_id.empty() ? base.session_id : rec.meta.session_id;
    if (!rec.meta.user_ids.empty()) base.user_ids = rec.meta.user_ids;
    base.screen = rec.meta.screen;
    base.nominal_rate = rec.meta.nominal_rate;
    auto offset_of = [&](const std::string& u) {
        auto it = rec.meta.offsets.find(u);
        return it == rec.meta.offsets.end() ? 0.0 : it->second;
    };
    std::optional<Millis> earliest;
    for (const auto& row : rec.rows) {
        const Millis t = row.t() + offset_of(row.sample.user_id);
        if (!earliest || t < *earliest) earliest = t;
    }
    const Millis t0 = base.t0.value_or(earliest.value_or(0.0));

    OfflineRun run;
    SessionPipeline pipeline(base, t0);
    auto collect = [&] {
        for (auto& p : pipeline.drain()) run.series[p.channel].push_back(std::move(p));
    };
    LatencyAccumulator latency;
    for (const auto& row : rec.rows) {
        GazeSample corrected = row.sample;
        corrected.t_origin += offset_of(row.sample.user_id);
        pipeline.push(corrected);
        collect();
        if (row.received) latency.add(corrected.t_origin, *row.received);
    }
    pipeline.finish();
    collect();
    run.summary = pipeline.summary();
    if (latency.count() > 0) run.summary.latency = latency.stats();
    return run;
}

struct Correlation {
    std::optional<double> r;
    std::size_t n = 0;
    /// Why `r` is unavailable, when it is.
    std::string note;
};

struct OfflineAnalysis {
    std::vector<SessionSummary> sessions;
    Correlation k_vs_time;
    Correlation ripa_vs_time;
};

/// Correlates group K and group RIPA with completion time across sessions.
/// `completion_times_s[i]` replaces sessions[i].total_time_s.
inline OfflineAnalysis analyze_offline(std::vector<SessionSummary> sessions, std::span<const double> completion_times_s) {
    if (sessions.size() != completion_times_s.size())
        throw InputError("analyze: one completion time per session required");
    OfflineAnalysis out;
    for (std::size_t i = 0; i < sessions.size(); ++i) sessions[i].total_time_s = completion_times_s[i];
    out.sessions = std::move(sessions);

    auto correlate = [&](auto member) {
        Correlation c;
        std::vector<double> xs, ys;
        for (const auto& s : out.sessions) {
            if (const auto& v = s.*member) {
                xs.push_back(*v);
                ys.push_back(s.total_time_s);
            }
        }
        c.n = xs.size();
        if (c.n < 3) {
            c.note = "fewer than 3 sessions";
            return c;
        }
        try {
            c.r = pearson(xs, ys);
        } catch (const CorrelationError& e) {
            c.note = e.what();
        }
        return c;
    };
    out.k_vs_time = correlate(&SessionSummary::group_k);
    out.ripa_vs_time = correlate(&SessionSummary::group_ripa);
    return out;
}

}  // namespace adt
