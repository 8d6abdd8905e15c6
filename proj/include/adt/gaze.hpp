#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

namespace adt {

/// Milliseconds since epoch on some clock; real-valued.
using Millis = double;

struct ScreenGeometry {
    double width = 1920.0;
    double height = 1080.0;
};

/// One timestamped gaze/pupil observation from one user.
struct GazeSample {
    std::string user_id;
    std::uint64_t seq = 0;
    Millis t_origin = 0.0;
    double x = 0.0;
    double y = 0.0;
    double pupil_diameter = 0.0;
    double confidence = 0.0;

    bool operator==(const GazeSample&) const = default;
};

/// Out-of-screen, non-finite, or zero-confidence samples are kept in the
/// stream but flagged invalid for positional analysis.
inline bool position_valid(const GazeSample& s, const ScreenGeometry& screen) {
    return std::isfinite(s.x) && std::isfinite(s.y) && s.confidence > 0.0 && s.x >= 0.0 &&
           s.x <= screen.width && s.y >= 0.0 && s.y <= screen.height;
}

enum class EventKind { Fixation, Saccade };

/// A detected fixation or saccade. Centroid is meaningful for fixations,
/// amplitude for saccades.
struct GazeEvent {
    EventKind kind = EventKind::Fixation;
    Millis t_start = 0.0;
    Millis t_end = 0.0;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double amplitude = 0.0;

    Millis duration() const { return t_end - t_start; }
    bool is_fixation() const { return kind == EventKind::Fixation; }
    bool is_saccade() const { return kind == EventKind::Saccade; }

    bool operator==(const GazeEvent&) const = default;
};

/// Half-open time interval [start, end).
struct TimeWindow {
    Millis start = 0.0;
    Millis end = 0.0;

    bool contains(Millis t) const { return t >= start && t < end; }
    Millis length() const { return end - start; }
};

}  // namespace adt
