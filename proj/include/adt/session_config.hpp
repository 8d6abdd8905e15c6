#pragma once

#include <adt/errors.hpp>
#include <adt/fixation_detector.hpp>
#include <adt/gaze.hpp>
#include <adt/reorder_buffer.hpp>
#include <adt/ripa.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace adt {

struct SessionConfig {
    std::string session_id = "session";
    std::vector<std::string> user_ids;
    ScreenGeometry screen;
    double nominal_rate = 30.0;
    Millis k_window_ms = 3000.0;
    Millis k_stride_ms = 300.0;
    RipaConfig ripa;
    DetectorConfig detector;
    double chart_update_s = 1.0;
    ReorderConfig reorder;
    std::size_t snapshot_depth = 200;
    /// Window alignment origin. When unset, a live session takes the first
    /// accepted sample's origin timestamp.
    std::optional<Millis> t0;

    /// RIPA window length in ms: f samples at the nominal rate.
    Millis ripa_window_ms() const { return 1000.0 * ripa.window_samples / nominal_rate; }

    void validate() const {
        if (session_id.empty()) throw InputError("session_id must not be empty");
        if (!(k_window_ms > 0.0) || !(k_stride_ms > 0.0) || k_stride_ms > k_window_ms)
            throw InputError("require 0 < k_stride_ms <= k_window_ms");
        if (!(nominal_rate > 0.0) || !(chart_update_s > 0.0) || snapshot_depth == 0)
            throw InputError("rate, chart_update_s and snapshot_depth must be positive");
        ripa.validate();
        detector.validate();
    }
};

/// Plain `key = value` text; `#` starts a comment. Keys are returned in
/// file order so later duplicates override earlier ones.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t n = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError("config line " + std::to_string(n) + ": expected key = value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InputError("config " + key + ": expected a number, got '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw InputError("config " + key + ": expected an integer");
    return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
    }
    return out;
}

}  // namespace detail

/// Applies one key to `cfg`. Returns false for keys it does not know.
inline bool apply_config_key(SessionConfig& cfg, const std::string& key, const std::string& v) {
    using detail::parse_double;
    using detail::parse_int;
    if (key == "session_id") cfg.session_id = v;
    else if (key == "users") cfg.user_ids = detail::split_list(v);
    else if (key == "screen_width") cfg.screen.width = parse_double(key, v);
    else if (key == "screen_height") cfg.screen.height = parse_double(key, v);
    else if (key == "nominal_rate") cfg.nominal_rate = parse_double(key, v);
    else if (key == "k_window_ms") cfg.k_window_ms = parse_double(key, v);
    else if (key == "k_stride_ms") cfg.k_stride_ms = parse_double(key, v);
    else if (key == "chart_update_s") cfg.chart_update_s = parse_double(key, v);
    else if (key == "snapshot_depth") cfg.snapshot_depth = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "t0") cfg.t0 = parse_double(key, v);
    else if (key == "ripa.window_samples") cfg.ripa.window_samples = static_cast<int>(parse_int(key, v));
    else if (key == "ripa.low_m") cfg.ripa.low.half_width = static_cast<int>(parse_int(key, v));
    else if (key == "ripa.low_n") cfg.ripa.low.order = static_cast<int>(parse_int(key, v));
    else if (key == "ripa.high_m") cfg.ripa.high.half_width = static_cast<int>(parse_int(key, v));
    else if (key == "ripa.high_n") cfg.ripa.high.order = static_cast<int>(parse_int(key, v));
    else if (key == "ripa.lambda") cfg.ripa.lambda = parse_double(key, v);
    else if (key == "ripa.epsilon") cfg.ripa.epsilon = parse_double(key, v);
    else if (key == "ripa.confidence_min") cfg.ripa.confidence_min = parse_double(key, v);
    else if (key == "ripa.max_interp_gap") cfg.ripa.max_interp_gap = static_cast<int>(parse_int(key, v));
    else if (key == "detector.dispersion_px") cfg.detector.dispersion_threshold = parse_double(key, v);
    else if (key == "detector.min_fixation_ms") cfg.detector.min_fixation_duration = parse_double(key, v);
    else if (key == "detector.max_gap_ms") cfg.detector.max_gap = parse_double(key, v);
    else if (key == "reorder.capacity") cfg.reorder.capacity = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "reorder.max_wait_ms") cfg.reorder.max_wait = parse_double(key, v);
    else if (key == "reorder.first_seq") cfg.reorder.first_seq = static_cast<std::uint64_t>(parse_int(key, v));
    else return false;
    return true;
}

/// Builds a SessionConfig from key-value text. Keys outside the session
/// vocabulary are returned in `extra` (e.g. `port`, `source.<user>`).
inline SessionConfig parse_session_config(std::istream& in,
                                          std::vector<std::pair<std::string, std::string>>* extra = nullptr) {
    SessionConfig cfg;
    for (const auto& [key, value] : parse_key_values(in)) {
        if (apply_config_key(cfg, key, value)) continue;
        if (!extra) throw InputError("unknown config key: " + key);
        extra->emplace_back(key, value);
    }
    cfg.detector.screen = cfg.screen;
    cfg.validate();
    return cfg;
}

inline SessionConfig load_session_config(const std::filesystem::path& path,
                                         std::vector<std::pair<std::string, std::string>>* extra = nullptr) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config: " + path.string());
    return parse_session_config(in, extra);
}

}  // namespace adt
