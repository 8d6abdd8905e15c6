#pragma once

#include <adt/errors.hpp>
#include <adt/gaze.hpp>
#include <adt/scope.hpp>
#include <adt/stats.hpp>

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace adt {

/// +1: positive K means focal attention (long fixations, short saccades),
/// negative means ambient scanning. Flip to -1 for the opposite reading.
inline constexpr double k_focal_sign = 1.0;

/// A windowed, experiment-level, or group-level coefficient K.
struct KValue {
    Millis t_window_end = 0.0;
    Scope scope;
    double value = 0.0;
    std::size_t n_pairs = 0;
};

struct TraditionalMeasures {
    std::optional<double> mean_fixation_duration;
    std::optional<double> mean_saccade_duration;
    std::optional<double> mean_saccade_amplitude;

    bool operator==(const TraditionalMeasures&) const = default;
};

namespace detail {

inline void require_ordered(std::span<const GazeEvent> events) {
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].t_start < events[i - 1].t_end || events[i].t_end < events[i].t_start)
            throw OrderingError("gaze events must be time-ordered and non-overlapping");
    }
}

inline double zscore(double v, double mu, double sigma) {
    return stats::negligible_spread(sigma, mu) ? 0.0 : (v - mu) / sigma;
}

}  // namespace detail

/// Windowed coefficient K over the events ending inside `window`.
///
/// Duration statistics are taken over every fixation ending in the window,
/// amplitude statistics over every saccade ending in the window. The summed
/// terms are the (fixation, following saccade) pairs that both end inside
/// the window. Returns nullopt with fewer than two pairs.
inline std::optional<KValue> window_k(std::span<const GazeEvent> events, TimeWindow window,
                                      Scope scope = Scope::group()) {
    if (!(window.length() > 0.0)) throw InputError("window length must be positive");
    detail::require_ordered(events);

    std::vector<double> durations;
    std::vector<double> amplitudes;
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const GazeEvent& e = events[i];
        if (!window.contains(e.t_end)) continue;
        if (e.is_fixation()) {
            durations.push_back(e.duration());
            if (i + 1 < events.size() && events[i + 1].is_saccade() && window.contains(events[i + 1].t_end))
                pairs.emplace_back(e.duration(), events[i + 1].amplitude);
        } else {
            amplitudes.push_back(e.amplitude);
        }
    }
    if (pairs.size() < 2) return std::nullopt;

    const double mu_d = stats::mean(durations);
    const double sd_d = stats::population_stddev(durations, mu_d);
    const double mu_a = stats::mean(amplitudes);
    const double sd_a = stats::population_stddev(amplitudes, mu_a);

    double sum = 0.0;
    for (const auto& [d, a] : pairs) sum += detail::zscore(d, mu_d, sd_d) - detail::zscore(a, mu_a, sd_a);

    return KValue{window.end, std::move(scope), k_focal_sign * sum / static_cast<double>(pairs.size()),
                  pairs.size()};
}

/// Experiment-level K: the mean of one scope's windowed values.
inline std::optional<KValue> experiment_k(std::span<const KValue> window_values) {
    if (window_values.empty()) return std::nullopt;
    KValue out;
    out.scope = window_values.front().scope;
    double sum = 0.0;
    for (const auto& v : window_values) {
        if (!(v.scope == out.scope)) throw InputError("experiment_k inputs must share one scope");
        sum += v.value;
        out.n_pairs += v.n_pairs;
        out.t_window_end = std::max(out.t_window_end, v.t_window_end);
    }
    out.value = sum / static_cast<double>(window_values.size());
    return out;
}

namespace detail {

template <class Value>
std::optional<Value> group_mean(std::span<const Value> user_values) {
    if (user_values.empty()) return std::nullopt;
    std::set<std::string> seen;
    Value out{};
    out.scope = Scope::group();
    out.t_window_end = user_values.front().t_window_end;
    double sum = 0.0;
    for (const auto& v : user_values) {
        if (v.scope.is_group()) throw InputError("group aggregation expects per-user values");
        if (!seen.insert(v.scope.user_id).second) throw InputError("duplicate user_id: " + v.scope.user_id);
        sum += v.value;
        out.t_window_end = std::max(out.t_window_end, v.t_window_end);
    }
    out.value = sum / static_cast<double>(user_values.size());
    return out;
}

}  // namespace detail

/// Group K: unweighted mean over users (each user weighs 1/|U|).
inline std::optional<KValue> group_k(std::span<const KValue> user_values) {
    auto out = detail::group_mean(user_values);
    if (out) {
        out->n_pairs = 0;
        for (const auto& v : user_values) out->n_pairs += v.n_pairs;
    }
    return out;
}

/// Mean fixation duration, saccade duration and saccade amplitude over the
/// events ending inside `window`.
inline TraditionalMeasures traditional_measures(std::span<const GazeEvent> events, TimeWindow window) {
    detail::require_ordered(events);
    double fix_sum = 0, sac_dur_sum = 0, sac_amp_sum = 0;
    std::size_t n_fix = 0, n_sac = 0;
    for (const auto& e : events) {
        if (!window.contains(e.t_end)) continue;
        if (e.is_fixation()) {
            fix_sum += e.duration();
            ++n_fix;
        } else {
            sac_dur_sum += e.duration();
            sac_amp_sum += e.amplitude;
            ++n_sac;
        }
    }
    TraditionalMeasures out;
    if (n_fix) out.mean_fixation_duration = fix_sum / static_cast<double>(n_fix);
    if (n_sac) {
        out.mean_saccade_duration = sac_dur_sum / static_cast<double>(n_sac);
        out.mean_saccade_amplitude = sac_amp_sum / static_cast<double>(n_sac);
    }
    return out;
}

}  // namespace adt
