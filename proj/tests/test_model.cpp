#include <gtest/gtest.h>

#include <random>

#include <pdisorder/model.hpp>

#include "oracles.hpp"

using namespace pdisorder;

namespace {

const ModelParams ref_l{1.0, 2.0, 1.0, 0.0, 0.2};
const ModelParams ref_s{0.15, 1.5, 0.7, 0.9, 0.0};

auto code_of(const ModelParams& p) -> std::string {
    try {
        validate(p);
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST(Model, ValidateAcceptsReferenceConfigs) {
    EXPECT_NO_THROW(validate(ref_l));
    EXPECT_NO_THROW(validate(ref_s));
}

TEST(Model, ValidateRejectsWithCodes) {
    EXPECT_EQ(code_of({1.0, 0.5, 1.0, 0.0, 0.0}), "MU_NOT_GT_ONE");
    EXPECT_EQ(code_of({0.0, 2.0, 1.0, 0.0, 0.0}), "LAMBDA_NOT_POSITIVE");
    EXPECT_EQ(code_of({1.0, 2.0, -1.0, 0.0, 0.0}), "C_NOT_POSITIVE");
    EXPECT_EQ(code_of({1.0, 2.0, 1.0, 1.0, 0.0}), "M_OUT_OF_RANGE");
    EXPECT_EQ(code_of({1.0, 2.0, 1.0, 0.0, 1.0}), "PI_OUT_OF_RANGE");
    EXPECT_EQ(code_of({std::nan(""), 2.0, 1.0, 0.0, 0.0}), "LAMBDA_NOT_POSITIVE");
}

TEST(Model, Regime) {
    EXPECT_EQ(classify_regime(ref_l), Regime::LargeLambda);
    EXPECT_EQ(classify_regime(ref_s), Regime::SmallLambda);
    // Exactly on the threshold 1 - 1.9 * 0.7 / 2 = 0.335.
    EXPECT_EQ(classify_regime({0.335, 1.5, 0.7, 0.9, 0.0}), Regime::LargeLambda);
    EXPECT_EQ(classify_regime({0.3349, 1.5, 0.7, 0.9, 0.0}), Regime::SmallLambda);
}

TEST(Model, MeanLevel) {
    EXPECT_NEAR(mean_level(ref_s), 0.237089, 5e-7);
    EXPECT_NEAR(mean_level({0.5, 2.0, 1.0, 0.0, 0.0}), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_THROW(mean_level(ref_l), Error);
}

TEST(Model, RunningCost) {
    EXPECT_NEAR(running_cost_g({0, 0}, ref_s), -0.303046, 5e-7);
    Model s(ref_s);
    EXPECT_NEAR(running_cost_g({s.derived.g_zero, 0}, ref_s), 0.0, 1e-15);
    EXPECT_NEAR(running_cost_g({1, 1}, ref_l), 2.0 - std::sqrt(2.0), 1e-15);
}

TEST(Model, AntidiagonalCorner) {
    Model s(ref_s);
    auto a = antidiagonal_corner(ref_s, s.derived.g_zero);
    EXPECT_NEAR(a.phi0, 0.022728, 5e-7);
    EXPECT_NEAR(a.phi1, 0.280317, 5e-7);
    // Closed form of the tangency point for K = (lambda/c) sqrt2.
    const double l = ref_s.lambda, c = ref_s.c;
    EXPECT_NEAR(a.phi0, l / std::sqrt(2.0) * ((1 - l) / c - 1), 1e-14);
    EXPECT_NEAR(a.phi1, l / std::sqrt(2.0) * ((1 + l) / c + 1), 1e-14);

    auto b = antidiagonal_corner(ref_s, (ref_s.lambda + ref_s.mu) * std::sqrt(2.0) / ref_s.c);
    EXPECT_NEAR(b.phi0, 1.310673, 5e-7);
    EXPECT_NEAR(b.phi1, 2.022831, 1e-6);  // 2.02283047
    // The corner lies on l, where the flow moves along antidiagonals.
    auto v = oracle::velocity(ref_s, b);
    EXPECT_NEAR(v.phi0 + v.phi1, 0.0, 1e-12);

    ModelParams half{0.5, 2.0, 1.0, 0.0, 0.0};
    double K = 0.5 * std::sqrt(2.0) / 0.5;
    auto z = antidiagonal_corner(half, K);
    EXPECT_NEAR(z.phi0, 0.0, 1e-15);
    EXPECT_NEAR(z.phi1, K, 1e-15);

    EXPECT_THROW(antidiagonal_corner(ref_l, 1.0), Error);
    EXPECT_THROW(antidiagonal_corner(ref_s, -1.0), Error);
    EXPECT_THROW(antidiagonal_corner(ref_s, 0.01), Error);
}

TEST(Model, XiStar) {
    EXPECT_NEAR(xi_star(ref_l), 3.0 * std::sqrt(2.0), 1e-14);
    double s = xi_star(ref_s);
    EXPECT_NEAR(s, oracle::xi_star_small(ref_s), 1e-6 * s);
    EXPECT_GT(s, 65.0);
    EXPECT_LT(s, 75.0);
    EXPECT_NEAR(xi_star({0.9, 2.0, 10.0, 0.0, 0.0}), 0.410122, 5e-7);
}

TEST(Model, InitialTilde) {
    auto z = initial_tilde({1.0, 2.0, 1.0, 0.0, 0.0});
    EXPECT_EQ(z.phi0, 0.0);
    EXPECT_EQ(z.phi1, 0.0);
    auto a = initial_tilde(ref_l);
    EXPECT_NEAR(a.phi0, 0.176777, 5e-7);
    EXPECT_NEAR(a.phi1, 0.176777, 5e-7);
    auto b = initial_tilde({0.15, 1.5, 0.7, 0.9, 0.5});
    EXPECT_NEAR(b.phi0, 0.070711, 5e-7);
    EXPECT_NEAR(b.phi1, 1.343503, 5e-7);
}

TEST(Model, MinBayesRisk) {
    EXPECT_NEAR(min_bayes_risk(ref_l, 0.0), 0.8, 1e-15);
    EXPECT_NEAR(min_bayes_risk(ref_l, -std::sqrt(2.0)), 0.0, 1e-15);
    EXPECT_THROW(min_bayes_risk(ref_l, 0.1), Error);
    EXPECT_THROW(min_bayes_risk(ref_l, -2.0), Error);
}

TEST(Model, DerivedLine) {
    Model s(ref_s);
    ASSERT_TRUE(s.derived.phi_d.has_value());
    // Points on l have zero velocity of x + y.
    for (double x : {0.0, 0.3, 1.7}) {
        TildePoint q{x, s.derived.line_slope * x + s.derived.line_intercept};
        auto v = oracle::velocity(ref_s, q);
        EXPECT_NEAR(v.phi0 + v.phi1, 0.0, 1e-12);
    }
    Model l(ref_l);
    EXPECT_FALSE(l.derived.phi_d.has_value());
    EXPECT_NEAR(l.derived.g_zero, std::sqrt(2.0), 1e-15);
}

// Property tests over random parameters.

namespace {

auto random_params(std::mt19937_64& gen) -> ModelParams {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {0.02 + 2.0 * u(gen), 1.01 + 3.0 * u(gen), 0.1 + 3.0 * u(gen), -0.99 + 1.98 * u(gen), 0.0};
}

}  // namespace

TEST(ModelProperty, RegimeMonotoneInLambda) {
    std::mt19937_64 gen(1);
    for (int k = 0; k < 500; ++k) {
        auto p = random_params(gen);
        bool large = false;
        for (double l = 0.01; l < 3.0; l += 0.01) {
            p.lambda = l;
            bool now = classify_regime(p) == Regime::LargeLambda;
            ASSERT_FALSE(large && !now);
            large = now;
        }
    }
}

TEST(ModelProperty, CornerOnLineAndLevel) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 1000) {
        auto p = random_params(gen);
        p.lambda = 0.01 + 0.98 * u(gen);
        Model m(p);
        double K = m.derived.line_intercept * (1.0 + 10.0 * u(gen));
        auto q = antidiagonal_corner(p, K);
        EXPECT_NEAR(q.phi0 + q.phi1, K, 1e-12 * K);
        double on_line = m.derived.line_slope * q.phi0 + m.derived.line_intercept;
        EXPECT_NEAR(q.phi1, on_line, 1e-12 * std::max(1.0, K));
        ++checked;
    }
}

TEST(ModelProperty, XiStarAtLeastK) {
    std::mt19937_64 gen(3);
    for (int k = 0; k < 1000; ++k) {
        auto p = random_params(gen);
        if (p.lambda == 1.0) continue;
        double K = (p.lambda + p.mu) * std::sqrt(2.0) / p.c;
        EXPECT_GE(xi_star(p), K * (1 - 1e-12));
    }
}

TEST(ModelProperty, SmallLambdaXiStarMatchesBackwardOracle) {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    while (checked < 10) {
        ModelParams p{0.05 + 0.5 * u(gen), 1.2 + u(gen), 0.5 + u(gen), -0.5 + u(gen), 0.0};
        if (p.lambda / (1 - p.lambda) >= (p.lambda + p.mu) / p.c) continue;
        double xs = xi_star(p);
        EXPECT_NEAR(xs, oracle::xi_star_small(p), 1e-6 * xs);
        ++checked;
    }
}

TEST(ModelProperty, RunningCostAffine) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
        auto p = random_params(gen);
        TildePoint a{u(gen), u(gen)}, b{u(gen), u(gen)};
        double al = u(gen) / 5.0;
        TildePoint mid{al * a.phi0 + (1 - al) * b.phi0, al * a.phi1 + (1 - al) * b.phi1};
        double lhs = running_cost_g(mid, p);
        double rhs = al * running_cost_g(a, p) + (1 - al) * running_cost_g(b, p);
        EXPECT_NEAR(lhs, rhs, 1e-13 * (1 + std::abs(lhs) + 10.0 / p.c));
    }
}
