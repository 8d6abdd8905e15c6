#include "support/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>

using adt::MeasurePoint;
using Series = std::map<std::string, std::vector<MeasurePoint>>;

namespace {

Series run(const adt::SessionRecording& rec, adt::SessionConfig cfg) {
    adt::SessionPipeline p(cfg, *cfg.t0);
    Series out;
    for (const auto& r : rec.rows) {
        p.push(r.sample);
        for (auto& m : p.drain()) out[m.channel].push_back(std::move(m));
    }
    p.finish();
    for (auto& m : p.drain()) out[m.channel].push_back(std::move(m));
    return out;
}

/// Same rows duplicated under a second user id.
adt::SessionRecording twin(const adt::SessionRecording& one) {
    auto b = one;
    b.meta.user_ids = {"B"};
    for (auto& r : b.rows) r.sample.user_id = "B";
    auto a = one;
    a.meta.user_ids = {"A"};
    for (auto& r : a.rows) r.sample.user_id = "A";
    return adt::merge_recordings({a, b}, "twin");
}

std::optional<double> num(const MeasurePoint& p) {
    if (auto d = std::get_if<double>(&p.value)) return *d;
    return std::nullopt;
}

}  // namespace

TEST(MeasurePoint, ChannelGrammar) {
    EXPECT_TRUE(adt::channel::valid_name("k.group"));
    EXPECT_TRUE(adt::channel::valid_name("ripa.group"));
    EXPECT_TRUE(adt::channel::valid_name(adt::channel::k_user("A")));
    EXPECT_TRUE(adt::channel::valid_name(adt::channel::trad_user("u-1")));
    EXPECT_TRUE(adt::channel::valid_name(adt::channel::ripa_user("x")));
    EXPECT_FALSE(adt::channel::valid_name("k.user."));
    EXPECT_FALSE(adt::channel::valid_name("trad.group"));
    EXPECT_FALSE(adt::channel::valid_name("pupil"));
}

TEST(MeasurePoint, JsonShape) {
    MeasurePoint k{"k.group", 3300, 0.25};
    EXPECT_EQ(adt::to_json(k).dump(), R"({"chan":"k.group","t":3300.0,"v":0.25})");
    MeasurePoint gap{"k.user.A", 3600, {}};
    EXPECT_EQ(adt::to_json(gap, true).dump(), R"({"chan":"k.user.A","snapshot":true,"t":3600.0,"v":null})");
    MeasurePoint trad{"trad.user.A", 3000, adt::TraditionalMeasures{250.0, std::nullopt, 80.0}};
    EXPECT_EQ(adt::to_json(trad)["v"].dump(), R"({"fix_dur":250.0,"sac_amp":80.0,"sac_dur":null})");
    for (const auto& p : {k, gap, trad}) EXPECT_EQ(adt::measure_point_from_json(adt::to_json(p)), p);
}

TEST(MeasureHub, KeepsTheLastPointsPerChannel) {
    adt::MeasureHub hub(3);
    std::vector<MeasurePoint> batch;
    for (int i = 0; i < 5; ++i) {
        batch.push_back({"k.group", double(i), double(i)});
        batch.push_back({"ripa.group", double(i), double(i)});
    }
    hub.publish(batch);
    const auto snap = hub.snapshot();
    ASSERT_EQ(snap.size(), 6u);
    for (const auto& p : snap) EXPECT_GE(p.t, 2.0);
}

TEST(MeasureHub, SnapshotThenTailHasNoSeam) {
    adt::MeasureHub hub(1000);
    std::vector<MeasurePoint> seen;
    adt::MeasureHub::Attachment late;
    int published = 0;
    auto publish_one = [&] {
        hub.publish({{"k.group", double(published), double(published)}});
        ++published;
    };
    for (int i = 0; i < 10; ++i) publish_one();
    std::vector<MeasurePoint> snap;
    late = hub.attach([&](const std::vector<MeasurePoint>& b) { seen.insert(seen.end(), b.begin(), b.end()); }, snap);
    for (int i = 0; i < 10; ++i) publish_one();
    snap.insert(snap.end(), seen.begin(), seen.end());
    ASSERT_EQ(snap.size(), 20u);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(snap[i].t, i);
    late.detach();
    EXPECT_EQ(hub.listener_count(), 0u);
}

TEST(MeasureHub, ConcurrentAttachSeesEveryPointOnce) {
    adt::MeasureHub hub(100000);
    std::atomic<bool> go{true};
    std::jthread producer([&] {
        for (int i = 0; i < 20000; ++i) hub.publish({{"k.group", double(i), 0.0}});
        go = false;
    });
    std::vector<std::vector<MeasurePoint>> views(8);
    std::vector<adt::MeasureHub::Attachment> attachments;
    std::vector<std::unique_ptr<std::mutex>> locks;
    for (auto& v : views) {
        locks.push_back(std::make_unique<std::mutex>());
        std::vector<MeasurePoint> snap;
        auto* lock = locks.back().get();
        attachments.push_back(hub.attach(
            [&v, lock](const std::vector<MeasurePoint>& b) {
                std::lock_guard g(*lock);
                v.insert(v.end(), b.begin(), b.end());
            },
            snap));
        std::lock_guard g(*lock);
        v.insert(v.begin(), snap.begin(), snap.end());
    }
    producer.join();
    for (const auto& v : views) {
        ASSERT_EQ(v.size(), 20000u);
        for (int i = 0; i < 20000; ++i) ASSERT_EQ(v[i].t, i);
    }
}

TEST(SessionPipeline, WindowsAreAlignedToTheSessionOrigin) {
    const auto rec = harness::synthetic_session(adt::Behavior::Focal, 1, 10.5, 1);
    auto cfg = harness::config_for(rec);
    cfg.t0 = -100.0;
    const auto s = run(rec, cfg);
    const auto& k = s.at("k.user.u0");
    ASSERT_FALSE(k.empty());
    for (std::size_t j = 0; j < k.size(); ++j) EXPECT_EQ(k[j].t, -100.0 + j * 300.0 + 3000.0);
    EXPECT_EQ(s.at("trad.user.u0").size(), k.size());
    const auto& r = s.at("ripa.user.u0");
    ASSERT_EQ(r.size(), 10u);  // [−100, 9900) in full windows; the partial tail is dropped
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].t, -100.0 + (i + 1) * 1000.0);
}

TEST(SessionPipeline, ChannelsAreWellFormedAndOrdered) {
    const auto rec = harness::synthetic_session(adt::Behavior::Ambient, 4, 20);
    const auto s = run(rec, harness::config_for(rec));
    EXPECT_EQ(s.size(), 8u);
    for (const auto& [chan, pts] : s) {
        EXPECT_TRUE(adt::channel::valid_name(chan)) << chan;
        for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_GE(pts[i].t, pts[i - 1].t);
        for (const auto& p : pts) {
            if (auto v = num(p)) {
                EXPECT_TRUE(std::isfinite(*v));
            }
        }
    }
    for (const auto& p : s.at("ripa.user.u0")) {
        ASSERT_TRUE(num(p));
        EXPECT_GE(*num(p), 0.0);
        EXPECT_LE(*num(p), 1.0);
    }
}

TEST(SessionPipeline, OneUserGroupEqualsTheUser) {
    const auto rec = harness::synthetic_session(adt::Behavior::Focal, 9, 30, 1);
    const auto s = run(rec, harness::config_for(rec));
    EXPECT_EQ(s.at("k.group").size(), s.at("k.user.u0").size());
    for (std::size_t i = 0; i < s.at("k.group").size(); ++i) {
        EXPECT_EQ(s.at("k.group")[i].t, s.at("k.user.u0")[i].t);
        EXPECT_EQ(s.at("k.group")[i].value, s.at("k.user.u0")[i].value);
    }
    for (std::size_t i = 0; i < s.at("ripa.group").size(); ++i)
        EXPECT_EQ(s.at("ripa.group")[i].value, s.at("ripa.user.u0")[i].value);
}

TEST(SessionPipeline, IdenticalUsersGroupEqualsEither) {
    const auto rec = twin(adt::generate_synthetic(adt::BehaviorProfile::ambient(2), 30000, 30));
    const auto s = run(rec, harness::config_for(rec));
    const auto& g = s.at("k.group");
    ASSERT_EQ(g.size(), s.at("k.user.A").size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_EQ(g[i].value, s.at("k.user.A")[i].value);
        EXPECT_EQ(g[i].value, s.at("k.user.B")[i].value);
    }
}

TEST(SessionPipeline, GroupPointsAreMeansOfPresentUserPoints) {
    const auto rec = harness::synthetic_session(adt::Behavior::Ambient, 30, 40, 3);
    const auto s = run(rec, harness::config_for(rec));
    for (const char* measure : {"k", "ripa"}) {
        const auto& g = s.at(std::string(measure) + ".group");
        for (std::size_t i = 0; i < g.size(); ++i) {
            double sum = 0;
            int n = 0;
            for (const char* u : {"u0", "u1", "u2"}) {
                const auto& up = s.at(std::string(measure) + ".user." + u);
                ASSERT_EQ(up[i].t, g[i].t);
                if (auto v = num(up[i])) {
                    sum += *v;
                    ++n;
                }
            }
            if (n == 0) {
                EXPECT_TRUE(g[i].absent());
            } else {
                ASSERT_TRUE(num(g[i]));
                EXPECT_NEAR(*num(g[i]), sum / n, 1e-12) << measure << " " << i << " t=" << g[i].t;
            }
        }
    }
}

TEST(SessionPipeline, SummaryGroupKIsTheMeanOfUserExperimentK) {
    auto parts = std::vector{adt::generate_synthetic(adt::BehaviorProfile::focal(1), 60000, 30),
                             adt::generate_synthetic(adt::BehaviorProfile::focal(2), 60000, 30)};
    parts[1].meta.user_ids = {"u1"};
    for (auto& r : parts[1].rows) r.sample.user_id = "u1";
    const auto rec = adt::merge_recordings(parts, "pair");
    const auto cfg = harness::config_for(rec);
    adt::SessionPipeline p(cfg, *cfg.t0);
    for (const auto& r : rec.rows) p.push(r.sample);
    p.finish();
    const auto s = p.summary();
    ASSERT_TRUE(s.group_k && s.users[0].experiment_k && s.users[1].experiment_k);
    EXPECT_NEAR(*s.group_k, (*s.users[0].experiment_k + *s.users[1].experiment_k) / 2, 1e-9);
    EXPECT_NEAR(*s.group_ripa, (*s.users[0].experiment_ripa + *s.users[1].experiment_ripa) / 2, 1e-12);
    EXPECT_NEAR(s.total_time_s, rec.span_ms() / 1000.0, 1e-12);
    EXPECT_TRUE(s.group_k_sigma);
    EXPECT_EQ(s.users[0].ripa_windows, 59u);
}

TEST(SessionPipeline, StalledUserIsAbsentFromPendingGroupWindows) {
    const auto rec = harness::synthetic_session(adt::Behavior::Focal, 3, 12);
    auto cfg = harness::config_for(rec);
    adt::SessionPipeline p(cfg, *cfg.t0);
    std::vector<MeasurePoint> out;
    for (const auto& r : rec.rows)
        if (r.sample.user_id == "u0") p.push(r.sample);
    for (auto& m : p.drain()) out.push_back(m);
    EXPECT_TRUE(std::none_of(out.begin(), out.end(), [](const MeasurePoint& m) { return m.channel == "k.group"; }));
    p.set_stalled("u1", true);
    std::size_t released = 0;
    for (const auto& m : p.drain())
        if (m.channel == "k.group") ++released;
    EXPECT_GT(released, 0u);
}

TEST(SessionPipeline, RejectsBadInput) {
    adt::SessionConfig cfg;
    cfg.user_ids = {"A", "A"};
    EXPECT_THROW(adt::SessionPipeline(cfg, 0), adt::InputError);
    cfg.user_ids = {"A"};
    adt::SessionPipeline p(cfg, 0);
    EXPECT_THROW(p.push(harness::sample("Z", 0, 0, 1, 1)), adt::InputError);
    p.push(harness::sample("A", 0, 10, 1, 1));
    EXPECT_THROW(p.push(harness::sample("A", 1, 10, 1, 1)), adt::OrderingError);
}
