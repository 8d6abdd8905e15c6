#include "support/harness.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

using adt::RipaConfig;
using adt::RipaValue;
using adt::Scope;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<double> composite(int f = 30) {
    std::vector<double> x;
    for (int k = 0; k < f; ++k) {
        const double t = static_cast<double>(k) / f;
        x.push_back(std::sin(two_pi * 0.5 * t) + 0.1 * std::sin(two_pi * 6.0 * t));
    }
    return x;
}

/// Pupil-like window: baseline, fast ripple and noise, plus a slow
/// oscillation of the given amplitude.
std::vector<double> pupil_window(std::mt19937_64& rng, double slow_amplitude, double phase_slow, double phase_fast) {
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<double> x;
    for (int k = 0; k < 30; ++k) {
        const double t = k / 30.0;
        x.push_back(3.5 + 0.1 * std::sin(two_pi * 6.0 * t + phase_fast) + noise(rng) +
                    slow_amplitude * std::sin(two_pi * 0.5 * t + phase_slow));
    }
    return x;
}

RipaValue user_value(const std::string& u, double v) { return {0, Scope::user(u), v}; }

adt::GazeSample pupil(double d, double conf = 1.0) { return {"a", 0, 0, 0, 0, d, conf}; }

}  // namespace

TEST(Ripa, ConstantSignalIsZero) {
    EXPECT_EQ(adt::ripa_window(std::vector<double>(30, 3.7), RipaConfig{}).value, 0.0);
}

TEST(Ripa, WindowShorterThanFilterSupportIsALengthError) {
    EXPECT_THROW(adt::ripa_window(std::vector<double>(14, 3.0), RipaConfig{}), adt::LengthError);
    EXPECT_NO_THROW(adt::ripa_window(std::vector<double>(15, 3.0), RipaConfig{}));
}

TEST(Ripa, CompositeSignalMatchesStepByStepOracle) {
    const auto x = composite();
    const double value = adt::ripa_window(x, RipaConfig{}).value;
    EXPECT_EQ(value, oracle::ripa(x));
    EXPECT_NEAR(value, 4.0 / 14.0, 1e-15);
}

TEST(Ripa, RandomWindowsMatchOracleAndStayInRange) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(2.0, 6.0);
    const adt::RipaEngine engine{RipaConfig{}};
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(30);
        for (auto& v : x) v = u(rng);
        const double value = engine.window(x).value;
        EXPECT_GE(value, 0.0);
        EXPECT_LE(value, 1.0);
        EXPECT_EQ(value, oracle::ripa(x));
    }
}

TEST(Ripa, RepeatRunsAreBitIdentical) {
    std::mt19937_64 rng(2);
    const auto x = pupil_window(rng, 0.3, 0.1, 0.7);
    const double a = adt::ripa_window(x, RipaConfig{}).value;
    const double b = adt::ripa_window(x, RipaConfig{}).value;
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

TEST(Ripa, StrongerSlowOscillationRaisesTheIndex) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> phase(0.0, two_pi);
    for (int i = 0; i < 20; ++i) {
        const double ps = phase(rng), pf = phase(rng);
        std::mt19937_64 noise_a(1000 + i), noise_b(1000 + i);
        const double weak = adt::ripa_window(pupil_window(noise_a, 0.0, ps, pf), RipaConfig{}).value;
        const double strong = adt::ripa_window(pupil_window(noise_b, 0.4, ps, pf), RipaConfig{}).value;
        EXPECT_GE(strong, weak) << "pair " << i;
    }
}

TEST(Ripa, NormalisationCountsInteriorRatioSamples) {
    EXPECT_EQ(adt::RipaEngine::normalise({0, 0}), 0.0);
    EXPECT_EQ(adt::RipaEngine::normalise({3, 12}), 0.25);
    EXPECT_EQ(adt::RipaEngine::normalise({5, 0}), 1.0);
}

TEST(RipaConfig, Validation) {
    RipaConfig c;
    EXPECT_NO_THROW(c.validate());
    c.lambda = 0;
    EXPECT_THROW(c.validate(), adt::ParameterError);
    c = {};
    c.window_samples = 14;
    EXPECT_THROW(c.validate(), adt::ParameterError);
    c = {};
    c.epsilon = 0;
    EXPECT_THROW(c.validate(), adt::ParameterError);
}

TEST(PreprocessPupil, AllValidIsUnchanged) {
    std::vector<adt::GazeSample> s{pupil(3.1), pupil(3.2), pupil(3.3)};
    const auto seg = adt::preprocess_pupil(s, RipaConfig{});
    ASSERT_EQ(seg.size(), 1u);
    EXPECT_EQ(seg[0], (std::vector<double>{3.1, 3.2, 3.3}));
}

TEST(PreprocessPupil, ShortInteriorGapIsInterpolated) {
    std::vector<adt::GazeSample> s{pupil(3.0), pupil(0.0), pupil(4.0)};
    const auto seg = adt::preprocess_pupil(s, RipaConfig{});
    ASSERT_EQ(seg.size(), 1u);
    EXPECT_EQ(seg[0], (std::vector<double>{3.0, 3.5, 4.0}));
}

TEST(PreprocessPupil, LeadingAndTrailingInvalidsAreDropped) {
    std::vector<adt::GazeSample> s{pupil(3.0, 0.1), pupil(3.0), pupil(3.1), pupil(-1.0)};
    const auto seg = adt::preprocess_pupil(s, RipaConfig{});
    ASSERT_EQ(seg.size(), 1u);
    EXPECT_EQ(seg[0], (std::vector<double>{3.0, 3.1}));
}

TEST(PreprocessPupil, LongGapSplitsTheTrace) {
    std::vector<adt::GazeSample> s{pupil(3.0), pupil(3.1)};
    for (int i = 0; i < 4; ++i) s.push_back(pupil(std::nan("")));
    s.push_back(pupil(3.4));
    const auto seg = adt::preprocess_pupil(s, RipaConfig{});
    ASSERT_EQ(seg.size(), 2u);
    EXPECT_EQ(seg[1], (std::vector<double>{3.4}));
    EXPECT_TRUE(adt::preprocess_pupil({}, RipaConfig{}).empty());
}

TEST(GroupRipa, UnweightedMean) {
    std::vector<RipaValue> same{user_value("A", 0.9), user_value("B", 0.9)};
    EXPECT_DOUBLE_EQ(adt::group_ripa(same)->value, 0.9);
    std::vector<RipaValue> split{user_value("A", 1.0), user_value("B", 0.0)};
    EXPECT_EQ(adt::group_ripa(split)->value, 0.5);
    std::vector<RipaValue> pair{user_value("A", 0.96), user_value("B", 0.83)};
    EXPECT_NEAR(adt::group_ripa(pair)->value, 0.895, 1e-15);
    std::vector<RipaValue> dup{user_value("A", 0.1), user_value("A", 0.2)};
    EXPECT_THROW(adt::group_ripa(dup), adt::InputError);
    EXPECT_FALSE(adt::group_ripa(std::vector<RipaValue>{}));
}

TEST(ExperimentRipa, MeanOfWindows) {
    std::vector<RipaValue> w{user_value("A", 0.2), user_value("A", 0.4)};
    EXPECT_NEAR(adt::experiment_ripa(w)->value, 0.3, 1e-15);
    EXPECT_FALSE(adt::experiment_ripa(std::vector<RipaValue>{}));
}
