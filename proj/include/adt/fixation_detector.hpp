#pragma once

#include <adt/errors.hpp>
#include <adt/gaze.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <span>
#include <vector>

namespace adt {

struct DetectorConfig {
    /// (max x - min x) + (max y - min y) of a fixation run, pixels.
    double dispersion_threshold = 60.0;
    Millis min_fixation_duration = 100.0;
    /// Longest tolerated time between consecutive valid samples inside a run.
    Millis max_gap = 75.0;
    ScreenGeometry screen;

    void validate() const {
        if (!(dispersion_threshold > 0.0) || !(min_fixation_duration > 0.0) || !(max_gap > 0.0))
            throw ParameterError("detector thresholds must be strictly positive");
        if (!(screen.width > 0.0) || !(screen.height > 0.0))
            throw ParameterError("screen geometry must be positive");
    }
};

/// Incremental dispersion-threshold (I-DT) fixation identification.
///
/// Samples are pushed one at a time in strictly increasing time order.
/// `events()` only ever grows and only contains final events: a fixation is
/// final once the run that forms it is broken, and the saccade in front of
/// it is emitted together with it (the saccade amplitude depends on the
/// closing fixation's centroid). The output alternates Fixation/Saccade and
/// always starts and ends with a Fixation.
class FixationDetector {
public:
    explicit FixationDetector(DetectorConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    void push(const GazeSample& s) {
        if (finished_) throw InputError("detector already finished");
        if (has_last_ && !(s.t_origin > last_t_))
            throw OrderingError("gaze samples must have strictly increasing timestamps");
        has_last_ = true;
        last_t_ = s.t_origin;

        if (!position_valid(s, cfg_.screen)) return;

        if (!run_.empty() && s.t_origin - run_.back().t > cfg_.max_gap) {
            if (in_fixation_) close_fixation();
            run_.clear();
            in_fixation_ = false;
        }

        const Point p{s.t_origin, s.x, s.y};
        if (in_fixation_) {
            const double dispersion = (std::max(max_x_, p.x) - std::min(min_x_, p.x)) +
                                      (std::max(max_y_, p.y) - std::min(min_y_, p.y));
            if (dispersion <= cfg_.dispersion_threshold) {
                extend(p);
                return;
            }
            close_fixation();
            run_.clear();
            in_fixation_ = false;
        }
        run_.push_back(p);
        seek_fixation();
    }

    /// Closes any open fixation. No further samples are accepted.
    void finish() {
        if (finished_) return;
        if (in_fixation_) close_fixation();
        run_.clear();
        in_fixation_ = false;
        finished_ = true;
    }

    const std::vector<GazeEvent>& events() const { return events_; }

    /// Lower bound on the end time of any event not yet in `events()`.
    /// Every event ending before this time is final.
    Millis frontier() const {
        if (finished_) return std::numeric_limits<Millis>::infinity();
        if (!run_.empty()) return run_.front().t;
        return has_last_ ? last_t_ : -std::numeric_limits<Millis>::infinity();
    }

    const DetectorConfig& config() const { return cfg_; }

private:
    struct Point {
        Millis t;
        double x;
        double y;
    };

    void seek_fixation() {
        while (!run_.empty() && run_.back().t - run_.front().t >= cfg_.min_fixation_duration) {
            if (dispersion_of_run() <= cfg_.dispersion_threshold) {
                begin_fixation();
                return;
            }
            run_.pop_front();
        }
    }

    double dispersion_of_run() const {
        auto [xmin, xmax] = std::minmax_element(run_.begin(), run_.end(),
                                                [](const Point& a, const Point& b) { return a.x < b.x; });
        auto [ymin, ymax] = std::minmax_element(run_.begin(), run_.end(),
                                                [](const Point& a, const Point& b) { return a.y < b.y; });
        return (xmax->x - xmin->x) + (ymax->y - ymin->y);
    }

    void begin_fixation() {
        in_fixation_ = true;
        min_x_ = max_x_ = run_.front().x;
        min_y_ = max_y_ = run_.front().y;
        sum_x_ = sum_y_ = 0.0;
        for (const auto& p : run_) accumulate(p);
    }

    void extend(const Point& p) {
        run_.push_back(p);
        accumulate(p);
    }

    void accumulate(const Point& p) {
        min_x_ = std::min(min_x_, p.x);
        max_x_ = std::max(max_x_, p.x);
        min_y_ = std::min(min_y_, p.y);
        max_y_ = std::max(max_y_, p.y);
        sum_x_ += p.x;
        sum_y_ += p.y;
    }

    void close_fixation() {
        const auto n = static_cast<double>(run_.size());
        GazeEvent fix;
        fix.kind = EventKind::Fixation;
        fix.t_start = run_.front().t;
        fix.t_end = run_.back().t;
        fix.centroid_x = sum_x_ / n;
        fix.centroid_y = sum_y_ / n;

        if (!events_.empty()) {
            const GazeEvent& prev = events_.back();
            GazeEvent sac;
            sac.kind = EventKind::Saccade;
            sac.t_start = prev.t_end;
            sac.t_end = fix.t_start;
            sac.amplitude = std::hypot(fix.centroid_x - prev.centroid_x, fix.centroid_y - prev.centroid_y);
            events_.push_back(sac);
        }
        events_.push_back(fix);
    }

    DetectorConfig cfg_;
    std::deque<Point> run_;
    bool in_fixation_ = false;
    double min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0, sum_x_ = 0, sum_y_ = 0;
    std::vector<GazeEvent> events_;
    bool has_last_ = false;
    Millis last_t_ = 0.0;
    bool finished_ = false;
};

/// Batch I-DT segmentation of one user's time-ordered samples.
inline std::vector<GazeEvent> detect_events(std::span<const GazeSample> samples, const DetectorConfig& cfg) {
    FixationDetector detector(cfg);
    for (const auto& s : samples) detector.push(s);
    detector.finish();
    return detector.events();
}

}  // namespace adt
