#pragma once

#include <adt/errors.hpp>
#include <adt/recording.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

namespace adt {

enum class Behavior { Ambient, Focal };

struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Parameters of a synthetic gaze/pupil source. Ambient scanning pairs
/// short fixations with long saccades; focal the reverse.
struct BehaviorProfile {
    Behavior kind = Behavior::Focal;
    ValueRange fixation_duration_ms{400.0, 1200.0};
    ValueRange saccade_amplitude_px{80.0, 200.0};
    double jitter_px = 4.0;
    std::uint64_t seed = 0;
    /// Amplitude (mm) of the slow pupil oscillation.
    double pupil_low_amplitude = 0.25;
    double pupil_high_amplitude = 0.04;

    static BehaviorProfile focal(std::uint64_t seed) { return {Behavior::Focal, {400, 1200}, {80, 200}, 4.0, seed, 0.25, 0.04}; }
    static BehaviorProfile ambient(std::uint64_t seed) {
        return {Behavior::Ambient, {130, 330}, {300, 900}, 4.0, seed, 0.08, 0.04};
    }

    void validate() const {
        auto ok = [](ValueRange r) { return r.lo > 0.0 && r.hi >= r.lo; };
        if (!ok(fixation_duration_ms) || !ok(saccade_amplitude_px) || jitter_px < 0.0)
            throw ParameterError("behavior profile ranges must be positive");
    }
};

inline const char* to_string(Behavior b) { return b == Behavior::Focal ? "focal" : "ambient"; }

struct SyntheticOptions {
    std::string session_id = "sim";
    std::string user_id = "u0";
    ScreenGeometry screen;
    Millis start_t = 0.0;
};

namespace detail {

/// Uniform [0,1) from the raw 64-bit engine output, so traces are identical
/// across standard library implementations.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : engine_(seed) {}
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double in(double lo, double hi) { return lo + (hi - lo) * next(); }
    double in(ValueRange r) { return in(r.lo, r.hi); }

private:
    std::mt19937_64 engine_;
};

}  // namespace detail

/// Deterministic alternating fixation/saccade gaze trace plus an
/// oscillating pupil signal for one user.
inline SessionRecording generate_synthetic(const BehaviorProfile& profile, Millis duration_ms, double rate_hz,
                                           const SyntheticOptions& opts = {}) {
    profile.validate();
    if (!(duration_ms > 0.0) || !(rate_hz > 0.0)) throw InputError("generate_synthetic: duration and rate must be positive");

    detail::Uniform rng(profile.seed);
    const double margin = 40.0;
    const double w = opts.screen.width;
    const double h = opts.screen.height;

    SessionRecording rec;
    rec.meta.session_id = opts.session_id;
    rec.meta.screen = opts.screen;
    rec.meta.nominal_rate = rate_hz;
    rec.meta.user_ids = {opts.user_id};

    // Plan of gaze segments, extended lazily as sample time advances.
    struct Segment {
        Millis start, end;
        double x0, y0, x1, y1;  // equal endpoints for fixations
        bool saccade;
        bool dropout;
    };
    double px = rng.in(margin, w - margin);
    double py = rng.in(margin, h - margin);
    Millis seg_t = 0.0;
    bool next_is_saccade = false;
    auto next_segment = [&]() {
        Segment s{};
        s.start = seg_t;
        if (!next_is_saccade) {
            s.end = seg_t + rng.in(profile.fixation_duration_ms);
            s.x0 = s.x1 = px;
            s.y0 = s.y1 = py;
            s.saccade = false;
            s.dropout = rng.next() < 0.05;
        } else {
            const double amp = rng.in(profile.saccade_amplitude_px);
            double tx = px, ty = py;
            for (int attempt = 0; attempt < 64; ++attempt) {
                const double angle = rng.in(0.0, 2.0 * std::numbers::pi);
                tx = px + amp * std::cos(angle);
                ty = py + amp * std::sin(angle);
                if (tx >= margin && tx <= w - margin && ty >= margin && ty <= h - margin) break;
            }
            tx = std::clamp(tx, margin, w - margin);
            ty = std::clamp(ty, margin, h - margin);
            s.end = seg_t + 20.0 + amp / 20.0;
            s.x0 = px;
            s.y0 = py;
            s.x1 = tx;
            s.y1 = ty;
            s.saccade = true;
            s.dropout = false;
            px = tx;
            py = ty;
        }
        seg_t = s.end;
        next_is_saccade = !next_is_saccade;
        return s;
    };

    const double phase_low = rng.in(0.0, 2.0 * std::numbers::pi);
    const double phase_high = rng.in(0.0, 2.0 * std::numbers::pi);
    const double f_low = 0.4;
    const double f_high = 5.0;

    Segment seg = next_segment();
    const double period = 1000.0 / rate_hz;
    const auto n = static_cast<std::uint64_t>(std::floor(duration_ms * rate_hz / 1000.0 + 1e-9));
    bool dropout_used = false;
    for (std::uint64_t k = 0; k < n; ++k) {
        const Millis rel = static_cast<double>(k) * period;
        while (rel >= seg.end) {
            seg = next_segment();
            dropout_used = false;
        }
        const double frac = seg.saccade ? (rel - seg.start) / (seg.end - seg.start) : 0.0;
        GazeSample s;
        s.user_id = opts.user_id;
        s.seq = k;
        s.t_origin = opts.start_t + rel;
        s.x = std::clamp(seg.x0 + (seg.x1 - seg.x0) * frac + rng.in(-profile.jitter_px, profile.jitter_px), 0.0, w);
        s.y = std::clamp(seg.y0 + (seg.y1 - seg.y0) * frac + rng.in(-profile.jitter_px, profile.jitter_px), 0.0, h);
        const double ts = rel / 1000.0;
        s.pupil_diameter = 3.5 + profile.pupil_low_amplitude * std::sin(2.0 * std::numbers::pi * f_low * ts + phase_low) +
                           profile.pupil_high_amplitude * std::sin(2.0 * std::numbers::pi * f_high * ts + phase_high) +
                           rng.in(-0.01, 0.01);
        s.confidence = 0.9 + rng.in(0.0, 0.09);
        // Brief pupil dropout inside some fixations: position still tracked,
        // pupil reported as 0 with low confidence.
        if (seg.dropout && !dropout_used && rel - seg.start > 60.0) {
            s.pupil_diameter = 0.0;
            s.confidence = 0.3;
            if (rel - seg.start > 120.0) dropout_used = true;
        }
        rec.rows.push_back({std::move(s), std::nullopt});
    }
    return rec;
}

}  // namespace adt
