#pragma once

#include <adt/coefficient_k.hpp>
#include <adt/gaze.hpp>

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <variant>

namespace adt {

/// Channel names: trad.user.<id>, k.user.<id>, k.group, ripa.user.<id>, ripa.group.
namespace channel {
inline std::string trad_user(std::string_view id) { return "trad.user." + std::string(id); }
inline std::string k_user(std::string_view id) { return "k.user." + std::string(id); }
inline std::string ripa_user(std::string_view id) { return "ripa.user." + std::string(id); }
inline constexpr std::string_view k_group = "k.group";
inline constexpr std::string_view ripa_group = "ripa.group";

inline bool valid_name(std::string_view c) {
    if (c == k_group || c == ripa_group) return true;
    for (std::string_view prefix : {"trad.user.", "k.user.", "ripa.user."})
        if (c.starts_with(prefix) && c.size() > prefix.size()) return true;
    return false;
}
}  // namespace channel

/// One timestamped value on a dashboard channel. A monostate value marks a
/// window with no data (drawn as a gap).
struct MeasurePoint {
    using Value = std::variant<std::monostate, double, TraditionalMeasures>;

    std::string channel;
    Millis t = 0.0;
    Value value;

    bool absent() const { return std::holds_alternative<std::monostate>(value); }

    bool operator==(const MeasurePoint&) const = default;
};

inline nlohmann::json value_to_json(const MeasurePoint::Value& v) {
    auto opt = [](const std::optional<double>& d) { return d ? nlohmann::json(*d) : nlohmann::json(nullptr); };
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* tm = std::get_if<TraditionalMeasures>(&v))
        return {{"fix_dur", opt(tm->mean_fixation_duration)},
                {"sac_dur", opt(tm->mean_saccade_duration)},
                {"sac_amp", opt(tm->mean_saccade_amplitude)}};
    return nullptr;
}

/// `{"chan":..,"t":..,"v":number|object|null}`, plus `"snapshot":true` for
/// frames replayed on connect.
inline nlohmann::json to_json(const MeasurePoint& p, bool snapshot = false) {
    nlohmann::json j = {{"chan", p.channel}, {"t", p.t}, {"v", value_to_json(p.value)}};
    if (snapshot) j["snapshot"] = true;
    return j;
}

inline MeasurePoint measure_point_from_json(const nlohmann::json& j) {
    MeasurePoint p;
    p.channel = j.at("chan").get<std::string>();
    p.t = j.at("t").get<double>();
    const auto& v = j.at("v");
    if (v.is_number()) {
        p.value = v.get<double>();
    } else if (v.is_object()) {
        auto opt = [&](const char* k) -> std::optional<double> {
            auto it = v.find(k);
            return it != v.end() && it->is_number() ? std::optional<double>(it->get<double>()) : std::nullopt;
        };
        p.value = TraditionalMeasures{opt("fix_dur"), opt("sac_dur"), opt("sac_amp")};
    }
    return p;
}

}  // namespace adt
