#pragma once

#include <adt/coefficient_k.hpp>
#include <adt/errors.hpp>
#include <adt/gaze.hpp>
#include <adt/savitzky_golay.hpp>
#include <adt/scope.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace adt {

/// Which filter response forms the numerator of the RIPA ratio.
enum class RipaRatio { LowOverHigh, HighOverLow };
inline constexpr RipaRatio k_ripa_ratio = RipaRatio::LowOverHigh;

struct FilterShape {
    int half_width = 0;
    int order = 0;
};

struct RipaConfig {
    FilterShape low{7, 2};
    FilterShape high{2, 2};
    double lambda = 1.0;
    /// Window size f, in samples; equal to the sampling frequency.
    int window_samples = 30;
    double epsilon = 1e-9;
    double confidence_min = 0.5;
    /// Longest interior run of invalid samples that is interpolated.
    int max_interp_gap = 3;

    std::size_t min_samples() const {
        return static_cast<std::size_t>(2 * std::max(low.half_width, high.half_width) + 1);
    }

    void validate() const {
        if (!(lambda > 0.0)) throw ParameterError("ripa: lambda must be positive");
        if (!(epsilon > 0.0)) throw ParameterError("ripa: epsilon must be positive");
        if (window_samples <= 0 || static_cast<std::size_t>(window_samples) < min_samples())
            throw ParameterError("ripa: window_samples must cover both filters");
        if (!(confidence_min >= 0.0 && confidence_min <= 1.0))
            throw ParameterError("ripa: confidence_min must lie in [0,1]");
        if (max_interp_gap < 0) throw ParameterError("ripa: max_interp_gap must be non-negative");
        if (low.order < 1 || high.order < 1) throw ParameterError("ripa: derivative filters need order >= 1");
    }
};

struct RipaValue {
    Millis t_window_end = 0.0;
    Scope scope;
    double value = 0.0;
};

/// Raw tallies behind one RIPA value.
struct RipaCounts {
    std::size_t above_threshold = 0;
    std::size_t interior = 0;
};

/// Splits one user's pupil trace into contiguous valid segments.
///
/// Samples below `confidence_min` or with non-positive / non-finite
/// diameter are invalid. Interior invalid runs of at most `max_interp_gap`
/// samples are filled by linear interpolation; longer runs split the trace.
/// Leading and trailing invalid samples are dropped.
inline std::vector<std::vector<double>> preprocess_pupil(std::span<const GazeSample> samples, const RipaConfig& cfg) {
    auto valid = [&](const GazeSample& s) {
        return s.confidence >= cfg.confidence_min && std::isfinite(s.pupil_diameter) && s.pupil_diameter > 0.0;
    };
    std::vector<std::vector<double>> segments;
    std::vector<double> current;
    std::size_t i = 0;
    while (i < samples.size() && !valid(samples[i])) ++i;
    while (i < samples.size()) {
        if (valid(samples[i])) {
            current.push_back(samples[i].pupil_diameter);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < samples.size() && !valid(samples[j])) ++j;
        if (j == samples.size()) break;  // trailing invalids
        const std::size_t gap = j - i;
        if (gap <= static_cast<std::size_t>(cfg.max_interp_gap)) {
            const double a = current.back();
            const double b = samples[j].pupil_diameter;
            for (std::size_t k = 1; k <= gap; ++k)
                current.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(gap + 1));
        } else {
            segments.push_back(std::move(current));
            current.clear();
        }
        i = j;
    }
    if (!current.empty()) segments.push_back(std::move(current));
    return segments;
}

/// Two parallel Savitzky-Golay derivative filters plus the modulus-maxima
/// count. Kernels are built once per configuration.
class RipaEngine {
public:
    explicit RipaEngine(RipaConfig cfg) : cfg_(cfg) {
        cfg_.validate();
        const double dt = 1.0 / static_cast<double>(cfg_.window_samples);
        low_ = sg_kernel(cfg_.low.half_width, cfg_.low.order, 1, dt);
        high_ = sg_kernel(cfg_.high.half_width, cfg_.high.order, 1, dt);
    }

    const RipaConfig& config() const { return cfg_; }

    /// The aligned ratio series rho[j] over the filters' common valid region.
    std::vector<double> ratio_series(std::span<const double> pupil) const {
        if (pupil.size() < cfg_.min_samples()) throw LengthError("ripa: window shorter than filter support");
        const auto low = apply_kernel(pupil, low_);
        const auto high = apply_kernel(pupil, high_);
        const int m_low = cfg_.low.half_width;
        const int m_high = cfg_.high.half_width;
        const int m_max = std::max(m_low, m_high);
        const int centers = static_cast<int>(pupil.size()) - 2 * m_max;

        std::vector<double> rho(static_cast<std::size_t>(centers));
        for (int j = 0; j < centers; ++j) {
            const int c = j + m_max;
            const double lo = std::fabs(low[static_cast<std::size_t>(c - m_low)]);
            const double hi = std::fabs(high[static_cast<std::size_t>(c - m_high)]);
            rho[static_cast<std::size_t>(j)] =
                k_ripa_ratio == RipaRatio::LowOverHigh ? lo / (hi + cfg_.epsilon) : hi / (lo + cfg_.epsilon);
        }
        return rho;
    }

    RipaCounts counts(std::span<const double> pupil) const {
        const auto rho = ratio_series(pupil);
        RipaCounts out;
        if (rho.size() < 3) return out;
        out.interior = rho.size() - 2;
        for (std::size_t j = 1; j + 1 < rho.size(); ++j) {
            if (rho[j] > rho[j - 1] && rho[j] > rho[j + 1] && rho[j] > cfg_.lambda) ++out.above_threshold;
        }
        return out;
    }

    static double normalise(const RipaCounts& c) {
        const double v =
            static_cast<double>(c.above_threshold) / static_cast<double>(std::max<std::size_t>(1, c.interior));
        return std::clamp(v, 0.0, 1.0);
    }

    RipaValue window(std::span<const double> pupil, Millis t_window_end = 0.0, Scope scope = Scope::group()) const {
        return RipaValue{t_window_end, std::move(scope), normalise(counts(pupil))};
    }

private:
    RipaConfig cfg_;
    SGKernel low_;
    SGKernel high_;
};

inline RipaValue ripa_window(std::span<const double> pupil, const RipaConfig& cfg, Millis t_window_end = 0.0,
                             Scope scope = Scope::group()) {
    return RipaEngine(cfg).window(pupil, t_window_end, std::move(scope));
}

/// Group RIPA: unweighted mean over users.
inline std::optional<RipaValue> group_ripa(std::span<const RipaValue> user_values) {
    return detail::group_mean(user_values);
}

/// Experiment-level RIPA: mean of one scope's window values.
inline std::optional<RipaValue> experiment_ripa(std::span<const RipaValue> window_values) {
    if (window_values.empty()) return std::nullopt;
    RipaValue out{0.0, window_values.front().scope, 0.0};
    double sum = 0.0;
    for (const auto& v : window_values) {
        if (!(v.scope == out.scope)) throw InputError("experiment_ripa inputs must share one scope");
        sum += v.value;
        out.t_window_end = std::max(out.t_window_end, v.t_window_end);
    }
    out.value = sum / static_cast<double>(window_values.size());
    return out;
}

}  // namespace adt
