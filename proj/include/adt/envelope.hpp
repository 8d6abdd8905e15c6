#pragma once

#include <adt/errors.hpp>
#include <adt/gaze.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace adt {

/// One gaze sample on the wire.
///
/// Wire form: `{"s":session,"u":user,"q":seq,"t":t_origin,"x":..,"y":..,"p":pupil,"c":confidence}`.
/// Field order is not significant; unknown fields are ignored.
struct Envelope {
    std::string session_id;
    std::string user_id;
    std::uint64_t seq = 0;
    Millis t_origin = 0.0;
    double x = 0.0;
    double y = 0.0;
    double pupil_diameter = 0.0;
    double confidence = 0.0;

    bool operator==(const Envelope&) const = default;

    GazeSample to_sample() const { return {user_id, seq, t_origin, x, y, pupil_diameter, confidence}; }

    static Envelope from_sample(std::string session_id, const GazeSample& s) {
        return {std::move(session_id), s.user_id, s.seq, s.t_origin, s.x, s.y, s.pupil_diameter, s.confidence};
    }
};

inline std::string encode_envelope(const Envelope& e) {
    for (double v : {e.t_origin, e.x, e.y, e.pupil_diameter, e.confidence})
        if (!std::isfinite(v)) throw InputError("encode_envelope: non-finite payload");
    nlohmann::json j = {{"s", e.session_id}, {"u", e.user_id}, {"q", e.seq},
                        {"t", e.t_origin},   {"x", e.x},       {"y", e.y},
                        {"p", e.pupil_diameter}, {"c", e.confidence}};
    return j.dump();
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key, const char* name) {
    auto it = j.find(key);
    if (it == j.end()) throw DecodeError(name, "missing field");
    return *it;
}

inline double require_number(const nlohmann::json& j, const char* key, const char* name) {
    const auto& v = require_field(j, key, name);
    if (!v.is_number()) throw DecodeError(name, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DecodeError(name, "non-finite number");
    return d;
}

inline std::string require_string(const nlohmann::json& j, const char* key, const char* name) {
    const auto& v = require_field(j, key, name);
    if (!v.is_string()) throw DecodeError(name, "expected a string");
    return v.get<std::string>();
}

}  // namespace detail

inline Envelope decode_envelope(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DecodeError("record", "malformed JSON");
    if (!j.is_object()) throw DecodeError("record", "expected a JSON object");

    Envelope e;
    e.session_id = detail::require_string(j, "s", "session_id");
    e.user_id = detail::require_string(j, "u", "user_id");
    const auto& q = detail::require_field(j, "q", "seq");
    if (!q.is_number_unsigned() && !(q.is_number_integer() && q.get<std::int64_t>() >= 0))
        throw DecodeError("seq", "expected an unsigned integer");
    e.seq = q.get<std::uint64_t>();
    e.t_origin = detail::require_number(j, "t", "t_origin");
    e.x = detail::require_number(j, "x", "x");
    e.y = detail::require_number(j, "y", "y");
    e.pupil_diameter = detail::require_number(j, "p", "pupil_diameter");
    e.confidence = detail::require_number(j, "c", "confidence");
    return e;
}

/// `adt/<session_id>/gaze/<user_id>`
inline std::string gaze_topic(std::string_view session_id, std::string_view user_id) {
    return "adt/" + std::string(session_id) + "/gaze/" + std::string(user_id);
}

/// `adt/<session_id>/ctl`
inline std::string control_topic(std::string_view session_id) { return "adt/" + std::string(session_id) + "/ctl"; }

}  // namespace adt
