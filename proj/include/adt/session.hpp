#pragma once

#include <adt/clock_sync.hpp>
#include <adt/envelope.hpp>
#include <adt/measure_hub.hpp>
#include <adt/pubsub.hpp>
#include <adt/recording.hpp>
#include <adt/reorder_buffer.hpp>
#include <adt/session_pipeline.hpp>

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace adt {

/// A running analytics session: subscribes to per-user gaze topics,
/// restores order, accounts latency, records every accepted sample, runs
/// the measure pipeline and pushes new points to the hub every
/// `chart_update_s`.
///
/// Each user's clock offset is fixed at that user's first accepted sample
/// and applied to every origin timestamp before windowing and latency
/// accounting. Later sync replies are noted and ignored.
///
/// Control messages on `adt/<session>/ctl`:
///   {"k":"syn","u":user,"t1":..}           sent by the session
///   {"k":"ack","u":user,"t1":..,"t2":..,"t3":..}  source reply, source clock
///   {"k":"start","t0":..}                   window origin (optional)
///   {"k":"end","u":user}                    source finished
///   {"k":"stop"}                            stop the session
///
/// All public members are thread-safe.
class LiveSession {
public:
    using Clock = std::function<Millis()>;

    LiveSession(SessionConfig cfg, Clock clock) : cfg_(std::move(cfg)), clock_(std::move(clock)), hub_(cfg_.snapshot_depth) {
        cfg_.detector.screen = cfg_.screen;
        cfg_.validate();
        if (cfg_.user_ids.empty()) throw InputError("session needs at least one user");
        const Millis now = clock_();
        created_at_ = now;
        last_push_ = now;
        for (const auto& u : cfg_.user_ids) {
            users_.emplace(u, UserState{ReorderBuffer(cfg_.reorder), now, false, false});
        }
    }

    LiveSession(const LiveSession&) = delete;
    LiveSession& operator=(const LiveSession&) = delete;

    const std::string& id() const { return cfg_.session_id; }
    const SessionConfig& config() const { return cfg_; }
    MeasureHub& hub() { return hub_; }

    /// Subscribes to this session's gaze and control topics.
    void attach(Broker& broker) {
        broker_ = &broker;
        gaze_sub_ = broker.subscribe("adt/" + cfg_.session_id + "/gaze/+",
                                     [this](const std::string& topic, const std::string& payload) { on_gaze(topic, payload); });
        ctl_sub_ = broker.subscribe(control_topic(cfg_.session_id),
                                    [this](const std::string&, const std::string& payload) { on_control(payload); });
    }

    /// Publishes a sync request to every user; replies set clock offsets.
    void request_sync() {
        if (!broker_) throw InputError("session not attached to a broker");
        std::vector<std::string> msgs;
        {
            std::lock_guard lock(mutex_);
            const Millis t1 = clock_();
            for (const auto& u : cfg_.user_ids) {
                sync_t1_[u] = t1;
                msgs.push_back(nlohmann::json{{"k", "syn"}, {"u", u}, {"t1", t1}}.dump());
            }
        }
        for (const auto& m : msgs) broker_->publish(control_topic(cfg_.session_id), m);
    }

    void on_gaze(const std::string& topic, const std::string& payload) {
        Envelope e;
        try {
            e = decode_envelope(payload);
        } catch (const DecodeError& err) {
            note("malformed envelope on " + topic + ": " + err.what());
            return;
        }
        accept(e);
    }

    void on_control(const std::string& payload) {
        auto j = nlohmann::json::parse(payload, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            note("malformed control message");
            return;
        }
        const auto kind = j.value("k", std::string{});
        if (kind == "ack") {
            const auto u = j.value("u", std::string{});
            std::lock_guard lock(mutex_);
            const Millis t4 = clock_();
            try {
                const auto est = estimate_offset(j.at("t1").get<double>(), j.at("t2").get<double>(),
                                                 j.at("t3").get<double>(), t4);
                if (applied_offset_.contains(u)) note_locked("sync reply for '" + u + "' after its first sample ignored");
                else if (users_.contains(u)) offsets_[u] = ClockOffset{-est.offset_ms, t4};
            } catch (const std::exception& err) {
                note_locked(std::string("bad sync reply: ") + err.what());
            }
        } else if (kind == "start") {
            std::lock_guard lock(mutex_);
            if (!pipeline_ && j.contains("t0") && j["t0"].is_number()) cfg_.t0 = j["t0"].get<double>();
        } else if (kind == "end") {
            end_user(j.value("u", std::string{}));
        } else if (kind == "stop") {
            stop_command();
        } else if (kind != "syn") {
            note("unknown control message kind '" + kind + "'");
        }
    }

    void set_offset(const std::string& user, ClockOffset off) {
        std::lock_guard lock(mutex_);
        offsets_[user] = off;
    }

    /// Entry point for one decoded envelope, stamped with the session clock.
    void accept(const Envelope& e) {
        std::lock_guard lock(mutex_);
        if (stopped_) return;
        if (e.session_id != cfg_.session_id) {
            note_locked("envelope for foreign session '" + e.session_id + "' ignored");
            return;
        }
        auto it = users_.find(e.user_id);
        if (it == users_.end()) {
            note_locked("unknown user '" + e.user_id + "' ignored");
            return;
        }
        const Millis now = clock_();
        auto& st = it->second;
        st.last_arrival = now;
        if (st.stalled) {
            st.stalled = false;
            if (pipeline_) pipeline_->set_stalled(e.user_id, false);
        }
        if (st.ended) return;
        arrival_[{e.user_id, e.seq}] = now;
        handle(st.reorder.push(e, now));
        drain_pipeline();
    }

    /// Advances timers: reorder timeouts, stalled sources, chart pushes.
    void tick() {
        std::lock_guard lock(mutex_);
        if (stopped_) return;
        const Millis now = clock_();
        for (auto& [u, st] : users_) handle(st.reorder.poll(now));
        for (auto& [u, st] : users_) {
            if (!st.ended && !st.stalled && now - st.last_arrival >= cfg_.k_stride_ms) {
                st.stalled = true;
                if (pipeline_) pipeline_->set_stalled(u, true);
            }
        }
        drain_pipeline();
        if (now - last_push_ >= cfg_.chart_update_s * 1000.0) push_to_hub(now);
    }

    /// Proctor stop: ends the session and fixes its completion time as the
    /// span from session creation to now.
    void stop_command() {
        {
            std::lock_guard lock(mutex_);
            if (stopped_) return;
            stop_command_at_ = clock_();
        }
        stop();
    }

    /// Flushes all buffers, completes every window and pushes the remainder.
    void stop() {
        std::lock_guard lock(mutex_);
        if (stopped_) return;
        for (auto& [u, st] : users_) handle(st.reorder.flush());
        if (pipeline_) pipeline_->finish();
        drain_pipeline();
        push_to_hub(clock_());
        stopped_ = true;
    }

    bool running() const {
        std::lock_guard lock(mutex_);
        return !stopped_;
    }

    /// Every point produced so far, by channel, in production order.
    std::map<std::string, std::vector<MeasurePoint>> series() const {
        std::lock_guard lock(mutex_);
        return series_;
    }

    SessionRecording recording() const {
        std::lock_guard lock(mutex_);
        SessionRecording rec;
        rec.meta.session_id = cfg_.session_id;
        rec.meta.screen = cfg_.screen;
        rec.meta.nominal_rate = cfg_.nominal_rate;
        rec.meta.user_ids = cfg_.user_ids;
        for (const auto& [u, off] : applied_offset_)
            if (off != 0.0) rec.meta.offsets[u] = off;
        rec.rows = rows_;
        rec.sort_by_time();
        return rec;
    }

    void persist(const std::filesystem::path& path) const { save_recording_file(recording(), path); }

    SessionSummary summary() const {
        std::lock_guard lock(mutex_);
        SessionSummary s;
        if (pipeline_) s = pipeline_->summary();
        s.session_id = cfg_.session_id;
        if (stop_command_at_) s.total_time_s = (*stop_command_at_ - created_at_) / 1000.0;
        if (latency_.count() > 0) s.latency = latency_.stats();
        return s;
    }

    std::vector<std::string> notices() const {
        std::lock_guard lock(mutex_);
        return notices_;
    }

    std::vector<ReorderNotice> reorder_notices() const {
        std::lock_guard lock(mutex_);
        return reorder_notices_;
    }

    std::size_t accepted_samples() const {
        std::lock_guard lock(mutex_);
        return rows_.size();
    }

private:
    struct UserState {
        ReorderBuffer reorder;
        Millis last_arrival;
        bool stalled;
        bool ended;
    };

    void end_user(const std::string& u) {
        std::lock_guard lock(mutex_);
        auto it = users_.find(u);
        if (it == users_.end() || it->second.ended) return;
        handle(it->second.reorder.flush());
        it->second.ended = true;
        if (pipeline_) pipeline_->finish_user(u);
        drain_pipeline();
    }

    void handle(ReorderOutput&& out) {
        for (auto& n : out.notices) reorder_notices_.push_back(std::move(n));
        for (const auto& e : out.emitted) {
            const auto known = offsets_.find(e.user_id);
            const double offset =
                applied_offset_.try_emplace(e.user_id, known == offsets_.end() ? 0.0 : known->second.offset_ms)
                    .first->second;
            GazeSample corrected = e.to_sample();
            corrected.t_origin += offset;
            if (!pipeline_) {
                pipeline_.emplace(cfg_, cfg_.t0.value_or(corrected.t_origin));
                for (const auto& [u, st] : users_)
                    if (st.stalled) pipeline_->set_stalled(u, true);
            }
            const auto key = std::pair{e.user_id, e.seq};
            const Millis received = arrival_.at(key);
            arrival_.erase(key);
            try {
                pipeline_->push(corrected);
            } catch (const OrderingError& err) {
                note_locked("sample " + e.user_id + "#" + std::to_string(e.seq) + " dropped: " + err.what());
                continue;
            }
            latency_.add(corrected.t_origin, received);
            rows_.push_back({e.to_sample(), received});
        }
    }

    void drain_pipeline() {
        if (!pipeline_) return;
        for (auto& p : pipeline_->drain()) {
            series_[p.channel].push_back(p);
            to_push_.push_back(std::move(p));
        }
    }

    void push_to_hub(Millis now) {
        hub_.publish(to_push_);
        to_push_.clear();
        last_push_ = now;
    }

    void note(std::string msg) {
        std::lock_guard lock(mutex_);
        note_locked(std::move(msg));
    }
    void note_locked(std::string msg) { notices_.push_back(std::move(msg)); }

    SessionConfig cfg_;
    Clock clock_;
    MeasureHub hub_;
    Broker* broker_ = nullptr;

    mutable std::mutex mutex_;
    std::map<std::string, UserState> users_;
    std::map<std::pair<std::string, std::uint64_t>, Millis> arrival_;
    std::map<std::string, ClockOffset> offsets_;
    std::map<std::string, double> applied_offset_;
    std::map<std::string, Millis> sync_t1_;
    std::optional<SessionPipeline> pipeline_;
    LatencyAccumulator latency_;
    std::vector<RecordingRow> rows_;
    std::map<std::string, std::vector<MeasurePoint>> series_;
    std::vector<MeasurePoint> to_push_;
    std::vector<std::string> notices_;
    std::vector<ReorderNotice> reorder_notices_;
    Millis created_at_ = 0.0;
    std::optional<Millis> stop_command_at_;
    Millis last_push_ = 0.0;
    bool stopped_ = false;

    // Declared last: unsubscribed before any state above is destroyed.
    Broker::Subscription gaze_sub_, ctl_sub_;
};

/// Sessions known to a server process.
class SessionRegistry {
public:
    void add(std::shared_ptr<LiveSession> s) {
        std::lock_guard lock(mutex_);
        const std::string id = s->id();
        sessions_[id] = std::move(s);
    }

    std::shared_ptr<LiveSession> find(const std::string& id) const {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    std::vector<std::shared_ptr<LiveSession>> list() const {
        std::lock_guard lock(mutex_);
        std::vector<std::shared_ptr<LiveSession>> out;
        for (const auto& [id, s] : sessions_) out.push_back(s);
        return out;
    }

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
};

}  // namespace adt
