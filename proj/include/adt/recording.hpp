#pragma once

#include <adt/errors.hpp>
#include <adt/gaze.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace adt {

struct RecordingMeta {
    std::string session_id;
    ScreenGeometry screen;
    double nominal_rate = 30.0;
    std::vector<std::string> user_ids;
    /// Per-user clock offsets (ms, sender -> receiver) in effect while recording.
    std::map<std::string, double> offsets;
};

struct RecordingRow {
    GazeSample sample;
    /// Receiver-clock arrival time, present for live-captured rows.
    std::optional<Millis> received;

    Millis t() const { return sample.t_origin; }

    bool operator==(const RecordingRow&) const = default;
};

/// Append-only, time-ordered log of gaze samples for one session.
struct SessionRecording {
    RecordingMeta meta;
    std::vector<RecordingRow> rows;

    std::vector<GazeSample> samples_for(const std::string& user_id) const {
        std::vector<GazeSample> out;
        for (const auto& r : rows)
            if (r.sample.user_id == user_id) out.push_back(r.sample);
        return out;
    }

    /// Last row time minus first row time, ms.
    Millis span_ms() const { return rows.empty() ? 0.0 : rows.back().t() - rows.front().t(); }

    /// Stable-sorts rows by timestamp; per-user order is preserved because
    /// per-user timestamps are strictly increasing.
    void sort_by_time() {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const RecordingRow& a, const RecordingRow& b) { return a.t() < b.t(); });
    }
};

namespace detail {

/// Checks ordering invariants. `lines[i]` is the file line of rows[i];
/// without it rows are assumed to start on line 2.
inline void validate_rows(const SessionRecording& rec, const std::vector<std::size_t>& lines = {}) {
    struct Last {
        Millis t;
        std::uint64_t seq;
    };
    std::map<std::string, Last> last;
    for (std::size_t i = 0; i < rec.rows.size(); ++i) {
        const std::size_t line = i < lines.size() ? lines[i] : i + 2;
        const auto& s = rec.rows[i].sample;
        if (!rec.meta.user_ids.empty() &&
            std::find(rec.meta.user_ids.begin(), rec.meta.user_ids.end(), s.user_id) == rec.meta.user_ids.end())
            throw ValidationError(line, "user '" + s.user_id + "' not declared in metadata");
        if (i > 0 && s.t_origin < rec.rows[i - 1].t())
            throw ValidationError(line, "timestamp decreases");
        auto it = last.find(s.user_id);
        if (it != last.end()) {
            if (!(s.t_origin > it->second.t))
                throw ValidationError(line, "per-user timestamp not strictly increasing");
            if (!(s.seq > it->second.seq)) throw ValidationError(line, "per-user seq not strictly increasing");
        }
        last[s.user_id] = {s.t_origin, s.seq};
    }
}

inline double json_number(const nlohmann::json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw ParseError(line, std::string("missing or non-numeric \"") + key + "\"");
    return it->get<double>();
}

}  // namespace detail

inline void validate_recording(const SessionRecording& rec) { detail::validate_rows(rec); }

/// Reads the JSONL recording format: a `{"kind":"meta",...}` header line
/// followed by `{"kind":"row",...}` lines. Blank lines are skipped.
inline SessionRecording load_recording(std::istream& in) {
    SessionRecording rec;
    std::string text;
    std::size_t line = 0;
    bool have_meta = false;
    std::vector<std::size_t> row_lines;

    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(line, "malformed JSON");
        const auto kind = j.value("kind", std::string{});
        if (!have_meta) {
            if (kind != "meta") throw ParseError(line, "first line must be the metadata record");
            rec.meta.session_id = j.value("s", std::string{});
            rec.meta.screen.width = j.value("w", 1920.0);
            rec.meta.screen.height = j.value("h", 1080.0);
            rec.meta.nominal_rate = j.value("rate", 30.0);
            if (auto it = j.find("users"); it != j.end()) {
                if (!it->is_array()) throw ParseError(line, "\"users\" must be an array");
                for (const auto& u : *it) {
                    if (!u.is_string()) throw ParseError(line, "\"users\" entries must be strings");
                    rec.meta.user_ids.push_back(u.get<std::string>());
                }
            }
            if (auto it = j.find("offsets"); it != j.end() && it->is_object())
                for (const auto& [k, v] : it->items())
                    if (v.is_number()) rec.meta.offsets[k] = v.get<double>();
            have_meta = true;
            continue;
        }
        if (kind != "row") throw ParseError(line, "expected a row record");
        RecordingRow row;
        auto& s = row.sample;
        s.t_origin = detail::json_number(j, "t", line);
        auto u = j.find("u");
        if (u == j.end() || !u->is_string()) throw ParseError(line, "missing or non-string \"u\"");
        s.user_id = u->get<std::string>();
        auto q = j.find("q");
        if (q == j.end() || !(q->is_number_unsigned() || (q->is_number_integer() && q->get<std::int64_t>() >= 0)))
            throw ParseError(line, "missing or invalid \"q\"");
        s.seq = q->get<std::uint64_t>();
        s.x = detail::json_number(j, "x", line);
        s.y = detail::json_number(j, "y", line);
        s.pupil_diameter = detail::json_number(j, "p", line);
        s.confidence = detail::json_number(j, "c", line);
        if (auto ra = j.find("ra"); ra != j.end() && ra->is_number()) row.received = ra->get<double>();
        rec.rows.push_back(std::move(row));
        row_lines.push_back(line);
    }
    if (!have_meta) throw ParseError(std::max<std::size_t>(line, 1), "missing metadata header");

    detail::validate_rows(rec, row_lines);
    return rec;
}

inline SessionRecording load_recording_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PersistenceError("cannot open recording: " + path.string());
    return load_recording(in);
}

inline void save_recording(const SessionRecording& rec, std::ostream& out) {
    nlohmann::json meta = {{"kind", "meta"},
                           {"s", rec.meta.session_id},
                           {"w", rec.meta.screen.width},
                           {"h", rec.meta.screen.height},
                           {"rate", rec.meta.nominal_rate},
                           {"users", rec.meta.user_ids}};
    if (!rec.meta.offsets.empty()) meta["offsets"] = rec.meta.offsets;
    out << meta.dump() << '\n';
    for (const auto& r : rec.rows) {
        const auto& s = r.sample;
        nlohmann::json j = {{"kind", "row"}, {"t", s.t_origin}, {"u", s.user_id}, {"q", s.seq},
                            {"x", s.x},      {"y", s.y},        {"p", s.pupil_diameter}, {"c", s.confidence}};
        if (r.received) j["ra"] = *r.received;
        out << j.dump() << '\n';
    }
}

inline void save_recording_file(const SessionRecording& rec, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw PersistenceError("cannot write recording: " + path.string());
    save_recording(rec, out);
    out.flush();
    if (!out) throw PersistenceError("write failed: " + path.string());
}

/// Combines single-user recordings into one session, rows sorted by time.
inline SessionRecording merge_recordings(const std::vector<SessionRecording>& parts, std::string session_id) {
    SessionRecording out;
    out.meta.session_id = std::move(session_id);
    for (const auto& p : parts) {
        if (out.meta.user_ids.empty()) {
            out.meta.screen = p.meta.screen;
            out.meta.nominal_rate = p.meta.nominal_rate;
        }
        for (const auto& u : p.meta.user_ids) {
            if (std::find(out.meta.user_ids.begin(), out.meta.user_ids.end(), u) != out.meta.user_ids.end())
                throw InputError("merge_recordings: duplicate user " + u);
            out.meta.user_ids.push_back(u);
        }
        out.rows.insert(out.rows.end(), p.rows.begin(), p.rows.end());
    }
    out.sort_by_time();
    return out;
}

}  // namespace adt
