#pragma once

#include <adt/envelope.hpp>
#include <adt/pubsub.hpp>
#include <adt/recording.hpp>
#include <adt/restream.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <stop_token>
#include <string>

namespace adt {

/// Rows of `rec` to publish as `user_id`: that user's rows if present,
/// otherwise all rows of a single-user recording relabelled.
inline SessionRecording rows_for_user(const SessionRecording& rec, const std::string& user_id) {
    SessionRecording out;
    out.meta = rec.meta;
    out.meta.user_ids = {user_id};
    out.meta.offsets.clear();
    const auto& users = rec.meta.user_ids;
    const bool present = std::find(users.begin(), users.end(), user_id) != users.end();
    if (!present && users.size() > 1)
        throw InputError("recording has several users and none is '" + user_id + "'");
    for (const auto& r : rec.rows) {
        if (present && r.sample.user_id != user_id) continue;
        RecordingRow row{r.sample, std::nullopt};
        row.sample.user_id = user_id;
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// A simulated tracker: restreams one user's recording onto the gaze topic
/// and answers sync requests. Its clock runs on recording time, starting at
/// the first row when the source is created, so origin timestamps and sync
/// replies share one time base.
template <class Clock = SteadyClock>
class RestreamSource {
public:
    RestreamSource(Broker& broker, std::string session_id, SessionRecording rec, RestreamOptions opts = {},
                   Clock clock = {})
        : broker_(broker), session_id_(std::move(session_id)), rec_(std::move(rec)), opts_(opts),
          clock_(std::move(clock)), created_(clock_.now_ms()) {
        if (rec_.meta.user_ids.size() != 1) throw InputError("RestreamSource: recording must hold exactly one user");
        user_id_ = rec_.meta.user_ids.front();
        base_ = rec_.rows.empty() ? 0.0 : rec_.rows.front().t();
        topic_ = gaze_topic(session_id_, user_id_);
        ctl_ = broker_.subscribe(control_topic(session_id_), [this](const std::string&, const std::string& payload) {
            on_control(payload);
        });
    }

    RestreamSource(const RestreamSource&) = delete;
    RestreamSource& operator=(const RestreamSource&) = delete;

    const std::string& user_id() const { return user_id_; }

    /// Source-clock reading in recording time.
    Millis source_now() const { return base_ + (clock_.now_ms() - created_) * opts_.speed; }

    /// Blocks until every row is published or `stop` is requested, then
    /// announces the end of this user's stream.
    RestreamReport run(std::stop_token stop = {}) {
        auto report = restream(
            rec_, opts_,
            [this](const RecordingRow& row, const EmissionTiming&) {
                broker_.publish(topic_, encode_envelope(Envelope::from_sample(session_id_, row.sample)));
            },
            clock_, stop);
        broker_.publish(control_topic(session_id_), nlohmann::json{{"k", "end"}, {"u", user_id_}}.dump());
        return report;
    }

private:
    void on_control(const std::string& payload) {
        auto j = nlohmann::json::parse(payload, nullptr, false);
        if (j.is_discarded() || !j.is_object() || j.value("k", std::string{}) != "syn") return;
        if (j.value("u", std::string{}) != user_id_ || !j.contains("t1")) return;
        const Millis t = source_now();
        broker_.publish(control_topic(session_id_),
                        nlohmann::json{{"k", "ack"}, {"u", user_id_}, {"t1", j["t1"]}, {"t2", t}, {"t3", t}}.dump());
    }

    Broker& broker_;
    std::string session_id_;
    SessionRecording rec_;
    RestreamOptions opts_;
    Clock clock_;
    Millis created_;
    Millis base_ = 0.0;
    std::string user_id_;
    std::string topic_;
    Broker::Subscription ctl_;
};

}  // namespace adt
