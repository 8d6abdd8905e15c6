#include "support/harness.hpp"

#include <gtest/gtest.h>

using adt::BehaviorProfile;

TEST(Synthetic, SameSeedIsBitIdentical) {
    const auto a = adt::generate_synthetic(BehaviorProfile::focal(4), 10000, 30);
    const auto b = adt::generate_synthetic(BehaviorProfile::focal(4), 10000, 30);
    EXPECT_EQ(a.rows, b.rows);
    const auto c = adt::generate_synthetic(BehaviorProfile::focal(5), 10000, 30);
    EXPECT_NE(a.rows, c.rows);
}

TEST(Synthetic, RowsSatisfyRecordingInvariants) {
    for (auto profile : {BehaviorProfile::focal(1), BehaviorProfile::ambient(1)}) {
        const auto rec = adt::generate_synthetic(profile, 60000, 30);
        EXPECT_EQ(rec.rows.size(), 1800u);
        EXPECT_NO_THROW(adt::validate_recording(rec));
        for (const auto& r : rec.rows) {
            EXPECT_GE(r.sample.confidence, 0.0);
            EXPECT_LE(r.sample.confidence, 1.0);
            EXPECT_TRUE(adt::position_valid(r.sample, rec.meta.screen));
        }
    }
}

TEST(Synthetic, ProfilesDifferInFixationAndSaccadeShape) {
    auto shape = [](const BehaviorProfile& p) {
        const auto rec = adt::generate_synthetic(p, 120000, 30);
        const auto ev = adt::detect_events(rec.samples_for("u0"), adt::DetectorConfig{});
        return adt::traditional_measures(ev, {0, 1e9});
    };
    const auto focal = shape(BehaviorProfile::focal(0));
    const auto ambient = shape(BehaviorProfile::ambient(0));
    EXPECT_GT(*focal.mean_fixation_duration, 2 * *ambient.mean_fixation_duration);
    EXPECT_GT(*ambient.mean_saccade_amplitude, 2 * *focal.mean_saccade_amplitude);
}

TEST(Synthetic, InvalidInputsAreRejected) {
    auto p = BehaviorProfile::focal(0);
    p.fixation_duration_ms = {0, 10};
    EXPECT_THROW(adt::generate_synthetic(p, 1000, 30), adt::ParameterError);
    EXPECT_THROW(adt::generate_synthetic(BehaviorProfile::focal(0), 0, 30), adt::InputError);
    EXPECT_THROW(adt::generate_synthetic(BehaviorProfile::focal(0), 1000, -1), adt::InputError);
}
