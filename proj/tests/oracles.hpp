#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's closed forms.

#include <cmath>
#include <functional>
#include <utility>

#include <pdisorder/model.hpp>

namespace oracle {

using pdisorder::ModelParams;
using pdisorder::TildePoint;

// Right-hand side of the tilde ODE between jumps, written out directly.
inline auto velocity(const ModelParams& p, TildePoint q) -> TildePoint {
    const double r2 = std::sqrt(2.0);
    return {(p.lambda + 1.0) * q.phi0 + p.lambda * (1.0 - p.m) / r2,
            (p.lambda - 1.0) * q.phi1 + p.lambda * (1.0 + p.m) / r2};
}

// Classical RK4 with n steps; negative t integrates backward.
inline auto rk4(const ModelParams& p, TildePoint q, double t, int n = 20000) -> TildePoint {
    const double h = t / n;
    auto add = [](TildePoint a, TildePoint b, double s) { return TildePoint{a.phi0 + s * b.phi0, a.phi1 + s * b.phi1}; };
    for (int k = 0; k < n; ++k) {
        auto k1 = velocity(p, q);
        auto k2 = velocity(p, add(q, k1, h / 2));
        auto k3 = velocity(p, add(q, k2, h / 2));
        auto k4 = velocity(p, add(q, k3, h));
        q.phi0 += h / 6 * (k1.phi0 + 2 * k2.phi0 + 2 * k3.phi0 + k4.phi0);
        q.phi1 += h / 6 * (k1.phi1 + 2 * k2.phi1 + 2 * k3.phi1 + k4.phi1);
    }
    return q;
}

// First t in (0, t_max] with f(t) >= 0, by a uniform scan with step dt and
// then bisection.
inline auto scan_root(const std::function<double(double)>& f, double t_max, double dt) -> double {
    double lo = 0.0;
    for (double t = dt;; t += dt) {
        double hi = std::min(t, t_max);
        if (f(hi) >= 0.0) {
            for (int k = 0; k < 200 && hi - lo > 1e-14; ++k) {
                double mid = 0.5 * (lo + hi);
                (f(mid) >= 0.0 ? hi : lo) = mid;
            }
            return hi;
        }
        lo = hi;
        if (hi >= t_max) return t_max;
    }
}

// xi* for small lambda: run the ODE backward from the corner of the level
// line x + y = K on the tangency line until x reaches 0, by RK4 steps.
inline auto xi_star_small(const ModelParams& p) -> double {
    const double r2 = std::sqrt(2.0);
    const double K = (p.lambda + p.mu) * r2 / p.c;
    // Corner: x + y = K with d(x+y)/dt = 0.
    // (l+1)x + l(1-m)/r2 + (l-1)y + l(1+m)/r2 = 0, y = K - x.
    const double x = ((1.0 - p.lambda) * K - p.lambda * r2) / 2.0;
    TildePoint q{x, K - x};
    const double h = -1e-5;
    while (q.phi0 > 0.0) {
        auto prev = q;
        q = rk4(p, q, h, 1);
        if (q.phi0 <= 0.0) {
            double s = prev.phi0 / (prev.phi0 - q.phi0);
            return prev.phi1 + s * (q.phi1 - prev.phi1);
        }
    }
    return q.phi1;
}

}  // namespace oracle
