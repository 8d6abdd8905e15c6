#include "support/oracles.hpp"

#include <adt/savitzky_golay.hpp>

#include <gtest/gtest.h>

#include <random>

namespace {

struct Shape {
    int m, n, r;
};

std::vector<Shape> all_shapes() {
    std::vector<Shape> out;
    for (int m = 1; m <= 6; ++m)
        for (int n = 0; n <= std::min(5, 2 * m); ++n)
            for (int r = 0; r <= std::min(1, n); ++r) out.push_back({m, n, r});
    return out;
}

double poly(const std::vector<double>& c, double t) {
    double v = 0, p = 1;
    for (double ci : c) {
        v += ci * p;
        p *= t;
    }
    return v;
}

double poly_slope(const std::vector<double>& c, double t) {
    double v = 0, p = 1;
    for (std::size_t i = 1; i < c.size(); ++i) {
        v += static_cast<double>(i) * c[i] * p;
        p *= t;
    }
    return v;
}

}  // namespace

TEST(SGKernel, FivePointQuadraticSmoother) {
    const auto k = adt::sg_kernel(2, 2, 0, 1.0);
    const double expect[] = {-3, 12, 17, 12, -3};
    ASSERT_EQ(k.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(k.weights[i], expect[i] / 35.0, 1e-12);
}

TEST(SGKernel, ThreePointSlope) {
    const auto k = adt::sg_kernel(1, 1, 1, 1.0);
    EXPECT_NEAR(k.weights[0], -0.5, 1e-15);
    EXPECT_NEAR(k.weights[1], 0.0, 1e-15);
    EXPECT_NEAR(k.weights[2], 0.5, 1e-15);
}

TEST(SGKernel, InterpolatingFitReturnsTheCentreSample) {
    const auto k = adt::sg_kernel(1, 2, 0, 1.0);
    EXPECT_NEAR(k.weights[0], 0.0, 1e-15);
    EXPECT_NEAR(k.weights[1], 1.0, 1e-15);
    EXPECT_NEAR(k.weights[2], 0.0, 1e-15);
}

TEST(SGKernel, MatchesLeastSquaresOracle) {
    for (double dt : {1.0, 1.0 / 30.0, 0.25}) {
        for (const auto& s : all_shapes()) {
            const auto k = adt::sg_kernel(s.m, s.n, s.r, dt);
            const auto expect = oracle::sg_weights(s.m, s.n, s.r, dt);
            ASSERT_EQ(k.size(), expect.size());
            const double scale = s.r ? 1.0 / dt : 1.0;
            for (std::size_t i = 0; i < expect.size(); ++i)
                EXPECT_NEAR(k.weights[i], expect[i], 1e-9 * scale) << "m=" << s.m << " n=" << s.n << " r=" << s.r;
        }
    }
}

TEST(SGKernel, WeightIdentities) {
    for (double dt : {1.0, 1.0 / 30.0}) {
        for (const auto& s : all_shapes()) {
            const auto k = adt::sg_kernel(s.m, s.n, s.r, dt);
            double sum = 0, moment = 0;
            for (int i = -s.m; i <= s.m; ++i) {
                sum += k.weights[i + s.m];
                moment += k.weights[i + s.m] * i * dt;
            }
            if (s.r == 0) {
                EXPECT_NEAR(sum, 1.0, 1e-12);
            } else {
                EXPECT_NEAR(sum, 0.0, 1e-12 / dt);
                EXPECT_NEAR(moment, 1.0, 1e-9);
            }
        }
    }
}

TEST(SGKernel, PolynomialsUpToTheFitOrderAreReproduced) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-2, 2);
    const double dt = 0.1;
    for (const auto& s : all_shapes()) {
        std::vector<double> c(static_cast<std::size_t>(s.n) + 1);
        for (auto& ci : c) ci = coef(rng);
        std::vector<double> x;
        for (int i = 0; i < 40; ++i) x.push_back(poly(c, i * dt));
        const auto k = adt::sg_kernel(s.m, s.n, s.r, dt);
        const auto y = adt::apply_kernel(x, k);
        ASSERT_EQ(y.size(), x.size() - 2 * s.m);
        for (std::size_t j = 0; j < y.size(); ++j) {
            const double t = (j + s.m) * dt;
            if (s.r == 0) EXPECT_NEAR(y[j], poly(c, t), 1e-9);
            else EXPECT_NEAR(y[j], poly_slope(c, t), 1e-6);
        }
    }
}

TEST(ApplyKernel, Examples) {
    const std::vector<double> constant(12, 4.25);
    for (double v : adt::apply_kernel(constant, adt::sg_kernel(3, 2, 0, 1.0))) EXPECT_NEAR(v, 4.25, 1e-12);

    std::vector<double> squares;
    for (int k = 0; k < 10; ++k) squares.push_back(k * k);
    const auto sm = adt::apply_kernel(squares, adt::sg_kernel(2, 2, 0, 1.0));
    for (std::size_t j = 0; j < sm.size(); ++j) EXPECT_NEAR(sm[j], double((j + 2) * (j + 2)), 1e-12);

    std::vector<double> ramp;
    for (int k = 0; k < 8; ++k) ramp.push_back(3.0 * k);
    for (double v : adt::apply_kernel(ramp, adt::sg_kernel(1, 1, 1, 1.0))) EXPECT_NEAR(v, 3.0, 1e-12);
}

TEST(ApplyKernel, SignalShorterThanKernelIsALengthError) {
    const std::vector<double> x(4, 1.0);
    EXPECT_THROW(adt::apply_kernel(x, adt::sg_kernel(2, 2, 0, 1.0)), adt::LengthError);
    EXPECT_NO_THROW(adt::apply_kernel(std::vector<double>(5, 1.0), adt::sg_kernel(2, 2, 0, 1.0)));
}

TEST(SGKernel, InvalidParametersAreRejected) {
    EXPECT_THROW(adt::sg_kernel(1, 3, 0, 1.0), adt::ParameterError);
    EXPECT_THROW(adt::sg_kernel(2, 2, 3, 1.0), adt::ParameterError);
    EXPECT_THROW(adt::sg_kernel(2, 2, 0, 0.0), adt::ParameterError);
    EXPECT_THROW(adt::sg_kernel(-1, 0, 0, 1.0), adt::ParameterError);
}
