#pragma once

#include <adt/clock_sync.hpp>
#include <adt/coefficient_k.hpp>
#include <adt/fixation_detector.hpp>
#include <adt/measure_point.hpp>
#include <adt/ripa.hpp>
#include <adt/session_config.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adt {

/// One completed per-user window, reported to group aggregation.
struct WindowReport {
    std::size_t index = 0;
    Millis t_end = 0.0;
    std::optional<double> value;
};

/// Per-user measure pipeline: I-DT events feeding sliding K windows and
/// traditional measures, plus non-overlapping RIPA windows.
///
/// Windows are keyed to origin timestamps relative to the session origin
/// `t0`, so the output depends only on the ordered sample stream and never
/// on arrival timing. K window j covers [t0 + j*stride, t0 + j*stride + w)
/// and is computed once every event ending inside it is final. RIPA window
/// r covers [t0 + r*f/rate, t0 + (r+1)*f/rate) and is computed once a later
/// sample arrives; a trailing partial window is discarded.
class UserPipeline {
public:
    UserPipeline(std::string user_id, const SessionConfig& cfg, std::shared_ptr<const RipaEngine> ripa, Millis t0)
        : user_id_(std::move(user_id)),
          cfg_(cfg),
          detector_(cfg.detector),
          ripa_(std::move(ripa)),
          t0_(t0),
          k_channel_(channel::k_user(user_id_)),
          trad_channel_(channel::trad_user(user_id_)),
          ripa_channel_(channel::ripa_user(user_id_)) {}

    const std::string& user_id() const { return user_id_; }

    void push(const GazeSample& s) {
        detector_.push(s);
        if (!first_t_) first_t_ = s.t_origin;
        last_t_ = s.t_origin;
        advance_ripa(s);
        advance_k();
    }

    void finish() {
        if (finished_) return;
        detector_.finish();
        finished_ = true;
        advance_k();
    }

    bool finished() const { return finished_; }
    std::optional<Millis> first_t() const { return first_t_; }
    std::optional<Millis> last_t() const { return last_t_; }

    std::vector<MeasurePoint> take_points() { return std::exchange(points_, {}); }
    std::vector<WindowReport> take_k_reports() { return std::exchange(k_reports_, {}); }
    std::vector<WindowReport> take_ripa_reports() { return std::exchange(ripa_reports_, {}); }

    const std::vector<KValue>& k_values() const { return k_values_; }
    const std::vector<RipaValue>& ripa_values() const { return ripa_values_; }
    const std::vector<GazeEvent>& events() const { return detector_.events(); }

private:
    TimeWindow k_window(std::size_t j) const {
        const Millis start = t0_ + static_cast<double>(j) * cfg_.k_stride_ms;
        return {start, start + cfg_.k_window_ms};
    }

    TimeWindow ripa_window(std::size_t r) const {
        const Millis len = cfg_.ripa_window_ms();
        return {t0_ + static_cast<double>(r) * len, t0_ + static_cast<double>(r + 1) * len};
    }

    void advance_k() {
        if (!last_t_) return;
        while (true) {
            const TimeWindow w = k_window(next_k_);
            if (w.end > *last_t_ || detector_.frontier() < w.end) break;
            emit_k(w);
            ++next_k_;
        }
    }

    void emit_k(TimeWindow w) {
        const auto& all = detector_.events();
        auto lo = std::lower_bound(all.begin(), all.end(), w.start,
                                   [](const GazeEvent& e, Millis t) { return e.t_end < t; });
        auto hi = std::lower_bound(lo, all.end(), w.end, [](const GazeEvent& e, Millis t) { return e.t_end < t; });
        const std::span<const GazeEvent> in_window(lo, hi);

        const auto k = window_k(in_window, w, Scope::user(user_id_));
        MeasurePoint kp{k_channel_, w.end, {}};
        if (k) {
            kp.value = k->value;
            k_values_.push_back(*k);
        }
        k_reports_.push_back({next_k_, w.end, k ? std::optional(k->value) : std::nullopt});
        points_.push_back(std::move(kp));

        const auto trad = traditional_measures(in_window, w);
        MeasurePoint tp{trad_channel_, w.end, {}};
        if (trad.mean_fixation_duration || trad.mean_saccade_duration) tp.value = trad;
        points_.push_back(std::move(tp));
    }

    void advance_ripa(const GazeSample& s) {
        if (s.t_origin < t0_) return;
        while (s.t_origin >= ripa_window(next_ripa_).end) {
            emit_ripa(ripa_window(next_ripa_));
            ripa_buffer_.clear();
            ++next_ripa_;
        }
        ripa_buffer_.push_back(s);
    }

    void emit_ripa(TimeWindow w) {
        std::optional<double> value;
        RipaCounts total;
        bool any = false;
        for (const auto& seg : preprocess_pupil(ripa_buffer_, ripa_->config())) {
            if (seg.size() < ripa_->config().min_samples()) continue;
            const auto c = ripa_->counts(seg);
            total.above_threshold += c.above_threshold;
            total.interior += c.interior;
            any = true;
        }
        MeasurePoint p{ripa_channel_, w.end, {}};
        if (any) {
            value = RipaEngine::normalise(total);
            p.value = *value;
            ripa_values_.push_back({w.end, Scope::user(user_id_), *value});
        }
        ripa_reports_.push_back({next_ripa_, w.end, value});
        points_.push_back(std::move(p));
    }

    std::string user_id_;
    const SessionConfig& cfg_;
    FixationDetector detector_;
    std::shared_ptr<const RipaEngine> ripa_;
    Millis t0_;
    std::string k_channel_, trad_channel_, ripa_channel_;

    std::optional<Millis> first_t_, last_t_;
    bool finished_ = false;
    std::size_t next_k_ = 0;
    std::size_t next_ripa_ = 0;
    std::vector<GazeSample> ripa_buffer_;

    std::vector<MeasurePoint> points_;
    std::vector<WindowReport> k_reports_, ripa_reports_;
    std::vector<KValue> k_values_;
    std::vector<RipaValue> ripa_values_;
};

struct UserSummary {
    std::string user_id;
    std::optional<double> experiment_k;
    std::optional<double> experiment_ripa;
    std::size_t k_windows = 0;
    std::size_t ripa_windows = 0;
};

/// Session-level results in the shape of a results-table row.
struct SessionSummary {
    std::string session_id;
    std::vector<UserSummary> users;
    std::optional<double> group_k;        ///< mean over users of experiment K
    std::optional<double> group_k_sigma;  ///< population std of the windowed group K series
    std::optional<double> group_ripa;     ///< mean over users of experiment RIPA
    double total_time_s = 0.0;
    std::optional<LatencyStats> latency;
};

inline nlohmann::json to_json(const SessionSummary& s) {
    auto opt = [](const std::optional<double>& d) { return d ? nlohmann::json(*d) : nlohmann::json(nullptr); };
    nlohmann::json users = nlohmann::json::array();
    for (const auto& u : s.users)
        users.push_back({{"user", u.user_id},
                         {"experiment_k", opt(u.experiment_k)},
                         {"experiment_ripa", opt(u.experiment_ripa)},
                         {"k_windows", u.k_windows},
                         {"ripa_windows", u.ripa_windows}});
    nlohmann::json j = {{"session", s.session_id},     {"users", users},
                        {"group_k", opt(s.group_k)},   {"group_k_sigma", opt(s.group_k_sigma)},
                        {"group_ripa", opt(s.group_ripa)}, {"total_time_s", s.total_time_s}};
    if (s.latency)
        j["latency"] = {{"count", s.latency->count},
                        {"mean_ms", s.latency->mean_ms},
                        {"std_ms", s.latency->std_ms},
                        {"max_ms", s.latency->max_ms},
                        {"clamped", s.latency->clamped}};
    else
        j["latency"] = nullptr;
    return j;
}

namespace detail {

/// Collects per-user window reports and releases group values in window
/// order once every user has reported or is done (finished or stalled).
class GroupAggregator {
public:
    explicit GroupAggregator(std::vector<std::string> users) : users_(std::move(users)) {}

    void report(const std::string& user, const WindowReport& r) {
        if (r.index < next_) return;  // group already released without this user
        auto& slot = slots_[r.index];
        slot.t_end = r.t_end;
        slot.values[user] = r.value;
    }

    /// `done(user)` says whether a missing report should count as absent.
    template <class Done, class Emit>
    void release(Done&& done, Emit&& emit) {
        while (true) {
            auto it = slots_.find(next_);
            if (it == slots_.end()) return;
            for (const auto& u : users_)
                if (!it->second.values.contains(u) && !done(u)) return;
            emit(it->second.t_end, it->second.values);
            slots_.erase(it);
            ++next_;
        }
    }

private:
    struct Slot {
        Millis t_end = 0.0;
        std::map<std::string, std::optional<double>> values;
    };
    std::vector<std::string> users_;
    std::map<std::size_t, Slot> slots_;
    std::size_t next_ = 0;
};

}  // namespace detail

/// All users of one session plus group aggregation. Single-threaded; the
/// caller serialises access.
class SessionPipeline {
public:
    SessionPipeline(const SessionPipeline&) = delete;
    SessionPipeline& operator=(const SessionPipeline&) = delete;

    SessionPipeline(SessionConfig cfg, Millis t0)
        : cfg_(std::move(cfg)),
          ripa_(std::make_shared<const RipaEngine>(cfg_.ripa)),
          k_group_(cfg_.user_ids),
          ripa_group_(cfg_.user_ids) {
        cfg_.detector.screen = cfg_.screen;
        cfg_.validate();
        if (cfg_.user_ids.empty()) throw InputError("session needs at least one user");
        std::set<std::string> seen;
        for (const auto& u : cfg_.user_ids) {
            if (!seen.insert(u).second) throw InputError("duplicate user_id: " + u);
            users_.emplace(u, std::make_unique<UserPipeline>(u, cfg_, ripa_, t0));
        }
    }

    const SessionConfig& config() const { return cfg_; }

    bool has_user(const std::string& u) const { return users_.contains(u); }

    /// Samples for one user must arrive in strictly increasing time order.
    void push(const GazeSample& s) {
        auto it = users_.find(s.user_id);
        if (it == users_.end()) throw InputError("unknown user: " + s.user_id);
        it->second->push(s);
        collect(*it->second);
    }

    void finish_user(const std::string& u) {
        auto it = users_.find(u);
        if (it == users_.end()) throw InputError("unknown user: " + u);
        it->second->finish();
        collect(*it->second);
    }

    void finish() {
        for (const auto& u : cfg_.user_ids) users_.at(u)->finish();
        for (const auto& u : cfg_.user_ids) collect(*users_.at(u), false);
        release_groups();
    }

    /// A stalled user is treated as absent from pending group windows.
    void set_stalled(const std::string& u, bool stalled) {
        if (stalled)
            stalled_.insert(u);
        else
            stalled_.erase(u);
        release_groups();
    }

    std::vector<MeasurePoint> drain() { return std::exchange(pending_, {}); }

    const UserPipeline& user(const std::string& u) const { return *users_.at(u); }

    SessionSummary summary() const {
        SessionSummary s;
        s.session_id = cfg_.session_id;
        std::vector<KValue> user_k;
        std::vector<RipaValue> user_ripa;
        std::optional<Millis> first, last;
        for (const auto& id : cfg_.user_ids) {
            const auto& up = *users_.at(id);
            UserSummary us;
            us.user_id = id;
            us.k_windows = up.k_values().size();
            us.ripa_windows = up.ripa_values().size();
            if (auto k = experiment_k(up.k_values())) {
                us.experiment_k = k->value;
                user_k.push_back(*k);
            }
            if (auto r = experiment_ripa(up.ripa_values())) {
                us.experiment_ripa = r->value;
                user_ripa.push_back(*r);
            }
            if (up.first_t()) first = first ? std::min(*first, *up.first_t()) : *up.first_t();
            if (up.last_t()) last = last ? std::max(*last, *up.last_t()) : *up.last_t();
            s.users.push_back(std::move(us));
        }
        if (auto g = group_k(user_k)) s.group_k = g->value;
        if (auto g = group_ripa(user_ripa)) s.group_ripa = g->value;
        if (!group_k_series_.empty()) s.group_k_sigma = stats::population_stddev(group_k_series_);
        if (first && last) s.total_time_s = (*last - *first) / 1000.0;
        return s;
    }

private:
    /// A finished user counts as done, so reports from every finished user
    /// must be collected before releasing.
    void collect(UserPipeline& up, bool release = true) {
        for (auto& p : up.take_points()) pending_.push_back(std::move(p));
        for (const auto& r : up.take_k_reports()) k_group_.report(up.user_id(), r);
        for (const auto& r : up.take_ripa_reports()) ripa_group_.report(up.user_id(), r);
        if (release) release_groups();
    }

    void release_groups() {
        auto done = [this](const std::string& u) { return users_.at(u)->finished() || stalled_.contains(u); };
        k_group_.release(done, [this](Millis t, const auto& values) {
            std::vector<KValue> present;
            for (const auto& [u, v] : values)
                if (v) present.push_back({t, Scope::user(u), *v, 0});
            MeasurePoint p{std::string(channel::k_group), t, {}};
            if (auto g = group_k(present)) {
                p.value = g->value;
                group_k_series_.push_back(g->value);
            }
            pending_.push_back(std::move(p));
        });
        ripa_group_.release(done, [this](Millis t, const auto& values) {
            std::vector<RipaValue> present;
            for (const auto& [u, v] : values)
                if (v) present.push_back({t, Scope::user(u), *v});
            MeasurePoint p{std::string(channel::ripa_group), t, {}};
            if (auto g = group_ripa(present)) p.value = g->value;
            pending_.push_back(std::move(p));
        });
    }

    SessionConfig cfg_;
    std::shared_ptr<const RipaEngine> ripa_;
    std::map<std::string, std::unique_ptr<UserPipeline>> users_;
    std::set<std::string> stalled_;
    detail::GroupAggregator k_group_;
    detail::GroupAggregator ripa_group_;
    std::vector<MeasurePoint> pending_;
    std::vector<double> group_k_series_;
};

}  // namespace adt
