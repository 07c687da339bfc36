#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace pdisorder {

inline constexpr double sqrt2 = std::numbers::sqrt2;

// Poisson disorder with a two-point post-change rate on {mu-1, mu+1}.
struct ModelParams {
    double lambda = 1.0;  // hazard rate of the disorder time
    double mu = 2.0;      // pre-disorder arrival rate
    double c = 1.0;       // delay cost per unit time
    double m = 0.0;       // prior mean of Lambda - mu
    double pi = 0.0;      // prior mass at theta = 0

    auto operator==(const ModelParams&) const -> bool = default;
};

enum class Regime { LargeLambda, SmallLambda };

inline auto to_string(Regime r) -> std::string {
    return r == Regime::LargeLambda ? "LargeLambda" : "SmallLambda";
}

struct TildePoint {
    double phi0 = 0.0;
    double phi1 = 0.0;
};

struct DerivedConstants {
    std::optional<double> phi_d;  // defined only for lambda < 1
    double g_zero = 0.0;          // (lambda/c) sqrt2
    double xi_star = 0.0;
    // Line l: y = line_slope * x + line_intercept (lambda != 1), where the
    // flow is tangent to the antidiagonals.
    double line_slope = 0.0;
    double line_intercept = 0.0;
    Regime regime = Regime::LargeLambda;
};

inline auto validate(const ModelParams& p) -> ModelParams {
    std::vector<std::string> bad;
    auto check = [&](bool ok, const char* code) {
        if (!ok) bad.emplace_back(code);
    };
    check(std::isfinite(p.lambda) && p.lambda > 0.0, "LAMBDA_NOT_POSITIVE");
    check(std::isfinite(p.mu) && p.mu > 1.0, "MU_NOT_GT_ONE");
    check(std::isfinite(p.c) && p.c > 0.0, "C_NOT_POSITIVE");
    check(std::isfinite(p.m) && p.m > -1.0 && p.m < 1.0, "M_OUT_OF_RANGE");
    check(std::isfinite(p.pi) && p.pi >= 0.0 && p.pi < 1.0, "PI_OUT_OF_RANGE");
    if (!bad.empty()) {
        std::string msg;
        for (const auto& b : bad) msg += (msg.empty() ? "" : ",") + b;
        throw Error(bad.front(), "invalid parameters: " + msg);
    }
    return p;
}

inline auto classify_regime(const ModelParams& p) -> Regime {
    double threshold = std::max(0.0, 1.0 - (1.0 + p.m) * p.c / 2.0);
    // Relative slack so that parameters sitting exactly on the threshold in
    // decimal are not split by rounding.
    double slack = 1e-12 * std::max(1.0, threshold);
    return p.lambda >= threshold - slack ? Regime::LargeLambda : Regime::SmallLambda;
}

inline auto mean_level(const ModelParams& p) -> double {
    if (p.lambda == 1.0) throw Error("LAMBDA_EQ_ONE", "mean level undefined for lambda = 1");
    return p.lambda * (1.0 + p.m) / ((1.0 - p.lambda) * sqrt2);
}

inline auto running_cost_g(TildePoint q, const ModelParams& p) -> double {
    return q.phi0 + q.phi1 - p.lambda / p.c * sqrt2;
}

inline auto antidiagonal_corner(const ModelParams& p, double K) -> TildePoint {
    if (!(p.lambda < 1.0)) throw Error("LAMBDA_NOT_LT_ONE", "line l leaves the quadrant for lambda >= 1");
    if (!(K > 0.0)) throw Error("K_NOT_POSITIVE", "antidiagonal level must be positive");
    double x = ((1.0 - p.lambda) * K - p.lambda * sqrt2) / 2.0;
    if (x < 0.0) throw Error("NEGATIVE_COORDINATE", "line l meets x+y=K outside the quadrant");
    return {x, K - x};
}

inline auto xi_star(const ModelParams& p) -> double {
    const double lam = p.lambda;
    const double K = (lam + p.mu) * sqrt2 / p.c;
    if (lam >= 1.0 || lam / (1.0 - lam) >= (lam + p.mu) / p.c) return K;
    // Run the flow backward from the corner of x+y=K on l until x hits 0.
    TildePoint corner = antidiagonal_corner(p, K);
    double A = lam * (1.0 - p.m) / (sqrt2 * (lam + 1.0));
    double t = std::log((corner.phi0 + A) / A) / (lam + 1.0);
    double phid = mean_level(p);
    return phid + std::exp((1.0 - lam) * t) * (corner.phi1 - phid);
}

inline auto derive(const ModelParams& p) -> DerivedConstants {
    DerivedConstants d;
    if (p.lambda < 1.0) d.phi_d = mean_level(p);
    d.g_zero = p.lambda / p.c * sqrt2;
    d.xi_star = xi_star(p);
    if (p.lambda != 1.0) {
        d.line_slope = (p.lambda + 1.0) / (1.0 - p.lambda);
        d.line_intercept = p.lambda * sqrt2 / (1.0 - p.lambda);
    }
    d.regime = classify_regime(p);
    return d;
}

// Validated parameters together with their derived constants.
struct Model {
    ModelParams params;
    DerivedConstants derived;

    explicit Model(const ModelParams& raw) : params(validate(raw)), derived(derive(params)) {}
};

inline auto initial_tilde(const ModelParams& p) -> TildePoint {
    double odds = p.pi / (sqrt2 * (1.0 - p.pi));
    return {(1.0 - p.m) * odds, (1.0 + p.m) * odds};
}

inline auto min_bayes_risk(const ModelParams& p, double v_at_initial) -> double {
    const double lo = -sqrt2 / p.c;
    const double slack = 1e-12 * (1.0 + std::abs(lo));
    if (!(v_at_initial <= slack && v_at_initial >= lo - slack))
        throw Error("V_OUT_OF_RANGE", "value outside [-sqrt2/c, 0]");
    return 1.0 - p.pi + p.c * (1.0 - p.pi) / sqrt2 * v_at_initial;
}

}  // namespace pdisorder
