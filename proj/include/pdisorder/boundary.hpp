#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "solver.hpp"

namespace pdisorder {

// Piecewise-linear curve y = gamma(x) on [0, xi], zero beyond xi.
struct BoundaryCurve {
    std::vector<double> xs;
    std::vector<double> ys;
    double xi = 0.0;
    bool degenerate = false;   // the grid had no negative values
    bool hits_box_top = false;  // some column was negative up to the top of the box

    [[nodiscard]] auto operator()(double x) const -> double {
        if (xs.empty() || x >= xi) return 0.0;
        if (x <= xs.front()) return ys.front();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.end()) return ys.back();
        auto k = static_cast<std::size_t>(it - xs.begin());
        double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return (1.0 - t) * ys[k - 1] + t * ys[k];
    }
};

inline auto require_nondegenerate(const BoundaryCurve& curve) -> const BoundaryCurve& {
    if (curve.degenerate) throw Error("DEGENERATE_GRID", "value grid is identically zero; boundary is the axis");
    return curve;
}

// Smallest y in column x with value >= -tol, given that v(x, lo) < -tol <= v(x, hi).
template <class F>
auto bisect_up(F&& f, double lo, double hi, double tol_x = 1e-12) -> double {
    while (hi - lo > tol_x) {
        double mid = 0.5 * (lo + hi);
        (f(mid) ? hi : lo) = mid;
    }
    return hi;
}

inline auto extract_gamma(const ValueGrid& grid, std::optional<double> level = std::nullopt) -> BoundaryCurve {
    BoundaryCurve out;
    const double tol = level.value_or(zero_tol(grid));
    const auto& spec = grid.spec();
    bool any = false;
    for (std::size_t k = 0; k < grid.values().size() && !any; ++k) any = grid.values()[k] < -tol;
    if (!any) {
        out.xs = {0.0};
        out.ys = {0.0};
        out.degenerate = true;
        return out;
    }
    for (int i = 0; i < spec.nx; ++i) {
        const double x = grid.x(i);
        int j = 0;
        while (j < spec.ny && grid.at(i, j) < -tol) ++j;
        if (j == 0) {
            // First zero column: refine xi along the x-axis.
            double lo = i > 0 ? grid.x(i - 1) : 0.0;
            out.xi = bisect_up([&](double s) { return grid.eval({s, 0.0}) >= -tol; }, lo, x);
            out.xs.push_back(out.xi);
            out.ys.push_back(0.0);
            return out;
        }
        double gamma = spec.y_max;
        if (j == spec.ny) {
            out.hits_box_top = true;
        } else {
            gamma = bisect_up([&](double s) { return grid.eval({x, s}) >= -tol; }, grid.y(j - 1), grid.y(j));
        }
        out.xs.push_back(x);
        out.ys.push_back(gamma);
    }
    out.xi = spec.x_max;
    return out;
}

// Columns x_i = i h of the grid up to the root of F(x, 0) = 0, where
// F(x, y) = g(x, y) + mu v(S(x, y)). a(x) is the root of F(x, .) = 0.
inline auto a_curve(const ValueGrid& grid) -> BoundaryCurve {
    const auto& model = grid.model();
    Flow fl(model);
    const double mu = model.params.mu;
    auto F = [&](double x, double y) { return running_cost_g({x, y}, model.params) + mu * grid.eval(fl.jump({x, y})); };
    auto root_y = [&](double x) {
        if (F(x, 0.0) >= 0.0) return 0.0;
        double hi = std::max(model.derived.g_zero - x, 0.0) + grid.h();
        while (F(x, hi) < 0.0) hi *= 2.0;
        return bisect_up([&](double y) { return F(x, y) >= 0.0; }, 0.0, hi, 1e-11);
    };
    BoundaryCurve out;
    const double h = grid.h();
    for (int i = 0;; ++i) {
        double x = i * h;
        if (F(x, 0.0) >= 0.0) {
            out.xi = i == 0 ? 0.0 : bisect_up([&](double s) { return F(s, 0.0) >= 0.0; }, x - h, x, 1e-12);
            out.xs.push_back(out.xi);
            out.ys.push_back(0.0);
            break;
        }
        out.xs.push_back(x);
        out.ys.push_back(root_y(x));
    }
    out.degenerate = out.xi == 0.0;
    return out;
}

// S^{-n}[gamma](x) = (mu/(mu+1))^n gamma(((mu-1)/mu)^n x).
inline auto s_transform_curve(const BoundaryCurve& curve, int n, const ModelParams& p) -> BoundaryCurve {
    BoundaryCurve out = curve;
    const double sx = std::pow(p.mu / (p.mu - 1.0), n);
    const double sy = std::pow(p.mu / (p.mu + 1.0), n);
    for (auto& x : out.xs) x *= sx;
    for (auto& y : out.ys) y *= sy;
    out.xi *= sx;
    return out;
}

// Smallest x > 0 at which S^{-n}[gamma] and gamma cross.
inline auto curve_intersection_xn(const BoundaryCurve& curve, int n, const ModelParams& p) -> double {
    if (n == 0) return 0.0;
    require_nondegenerate(curve);
    auto other = s_transform_curve(curve, n, p);
    auto f = [&](double x) { return other(x) - curve(x); };
    std::vector<double> xs = curve.xs;
    xs.insert(xs.end(), other.xs.begin(), other.xs.end());
    std::sort(xs.begin(), xs.end());
    const double start = f(0.0);
    if (start == 0.0) return 0.0;
    double prev = 0.0;
    for (double x : xs) {
        if (x <= 0.0) continue;
        if (curve(x) == 0.0 && other(x) == 0.0) break;
        if ((f(x) > 0.0) != (start > 0.0) || f(x) == 0.0) {
            return bisect_up([&](double s) { return (f(s) > 0.0) != (start > 0.0) || f(s) == 0.0; }, prev, x, 1e-13);
        }
        prev = x;
    }
    throw Error("NO_INTERSECTION", "S-transformed curve does not cross the boundary");
}

// Smallest x where the flow through (x, a(x)) is tangent to a; 0 if the flow
// is steeper than a nowhere.
inline auto tangency_xi_e(const BoundaryCurve& a, const Model& model) -> double {
    Flow fl(model);
    for (std::size_t k = 0; k + 1 < a.xs.size(); ++k) {
        const double x0 = a.xs[k], x1 = a.xs[k + 1];
        if (a.ys[k] <= 0.0) break;
        const double slope = (a.ys[k + 1] - a.ys[k]) / (x1 - x0);
        auto D = [&](double x) { return fl.slope({x, a(x)}) - slope; };
        if (k == 0 && D(x0) >= 0.0) return 0.0;
        if (D(x0) >= 0.0) return x0;  // sign change at the kink between segments
        if (D(x1) >= 0.0) return bisect_up([&](double s) { return D(s) >= 0.0; }, x0, x1, 1e-13);
    }
    return 0.0;
}

struct BoundarySplit {
    double xi_e = 0.0;
    BoundaryCurve entrance;  // samples with x > xi_e
    BoundaryCurve exit;      // samples with x <= xi_e
};

inline auto split_boundary(const BoundaryCurve& curve, double xi_e) -> BoundarySplit {
    BoundarySplit s;
    s.xi_e = xi_e;
    for (std::size_t k = 0; k < curve.xs.size(); ++k) {
        auto& part = (xi_e > 0.0 && curve.xs[k] <= xi_e) ? s.exit : s.entrance;
        part.xs.push_back(curve.xs[k]);
        part.ys.push_back(curve.ys[k]);
    }
    s.entrance.xi = curve.xi;
    s.exit.xi = xi_e;
    return s;
}

struct ValueSample {
    TildePoint point;
    double value;
};

struct Backtrack {
    TildePoint entrance;
    TildePoint terminal;
    double t_end = 0.0;
    bool reaches_exit = false;  // ended on a sign change rather than the quadrant edge
    std::vector<ValueSample> values;
};

struct MethodDResult {
    std::vector<Backtrack> curves;
    std::vector<TildePoint> exit_points;
    double xi_x = 0.0;  // largest entrance abscissa whose backtrack ends on the exit boundary
};

// Runs the flow backward from each entrance point q, accumulating
// K(s) = int_0^s e^{(lambda+mu)u}[g + mu v_n(S)](flow(-u, q)) du. The value of
// v_{n+1} at flow(-s, q) is e^{-(lambda+mu)s} K(s); the backtrack ends where
// K returns to 0 (an exit point) or when the path leaves the quadrant.
inline auto method_d_exit(const std::vector<TildePoint>& entrance, const ValueGrid& grid_n, int value_stride = 1,
                          unsigned workers = 1) -> MethodDResult {
    const auto& model = grid_n.model();
    const auto& p = model.params;
    Flow fl(model);
    const double dt = grid_n.spec().dt_quad;
    const double rate = p.lambda + p.mu;
    auto G = [&](TildePoint z) { return running_cost_g(z, p) + p.mu * grid_n.eval(fl.jump(z)); };
    MethodDResult out;
    out.curves.resize(entrance.size());
    parallel_for(entrance.size(), workers, [&](std::size_t e) {
        const TildePoint q = entrance[e];
        Backtrack bt;
        bt.entrance = q;
        auto r_hat = fl.backward_exit_time(q);
        const double s_max = r_hat.is_finite() ? r_hat.value() : std::numeric_limits<double>::infinity();
        double K = 0.0, s_prev = 0.0, f_prev = G(q);
        bool went_negative = false;
        bt.terminal = q;
        for (long k = 1;; ++k) {
            double s = std::min(k * dt, s_max);
            TildePoint z = fl(-s, q);
            double f = std::exp(rate * s) * G(z);
            double K_new = K + (s - s_prev) * (f_prev + f) / 2.0;
            if (went_negative && K_new >= 0.0) {
                // Linear interpolation of K between the last two samples.
                double frac = K / (K - K_new);
                double s_star = s_prev + frac * (s - s_prev);
                bt.terminal = fl(-s_star, q);
                bt.t_end = s_star;
                bt.reaches_exit = true;
                bt.values.push_back({bt.terminal, 0.0});
                break;
            }
            if (K_new < 0.0) went_negative = true;
            K = K_new;
            if (k % value_stride == 0) bt.values.push_back({z, std::min(0.0, std::exp(-rate * s) * K)});
            s_prev = s;
            f_prev = f;
            if (s >= s_max) {
                bt.terminal = z;
                bt.t_end = s;
                break;
            }
        }
        out.curves[e] = std::move(bt);
    });
    for (const auto& bt : out.curves)
        if (bt.reaches_exit) {
            out.exit_points.push_back(bt.terminal);
            out.xi_x = std::max(out.xi_x, bt.entrance.phi0);
        }
    std::sort(out.exit_points.begin(), out.exit_points.end(),
              [](const TildePoint& a, const TildePoint& b) { return a.phi0 < b.phi0; });
    return out;
}

enum class FitClass { Entrance, Exit, Undetermined };

inline auto fit_code(FitClass c) -> char {
    switch (c) {
        case FitClass::Entrance: return 'E';
        case FitClass::Exit: return 'X';
        default: return 'U';
    }
}

struct SmoothFitRecord {
    double x = 0.0;
    double gamma = 0.0;
    double gap_phi0 = std::numeric_limits<double>::quiet_NaN();
    double gap_phi1 = std::numeric_limits<double>::quiet_NaN();
    double stop_side = 0.0;  // largest stopping-side derivative magnitude
    FitClass cls = FitClass::Undetermined;

    [[nodiscard]] auto gap() const -> double {
        double g = -std::numeric_limits<double>::infinity();
        if (!std::isnan(gap_phi0)) g = std::max(g, gap_phi0);
        if (!std::isnan(gap_phi1)) g = std::max(g, gap_phi1);
        return g;
    }
};

struct SmoothFitReport {
    std::vector<SmoothFitRecord> records;
    double h_fd = 0.0;
    double gap_tol = 0.0;
    double gap_margin = 0.0;
    double r_min = 0.0;
    double xi_e = 0.0;
    bool insufficient_resolution = false;
};

inline constexpr int min_smoothfit_nodes = 64;

// Finite-difference derivative gaps along the extracted boundary. Samples
// left of xi_e - 4h feed the return-time estimate behind gap_margin.
inline auto smooth_fit_report(const ValueGrid& grid, const BoundaryCurve& curve, double h_fd, double xi_e = 0.0)
    -> SmoothFitReport {
    const auto& p = grid.params();
    SmoothFitReport rep;
    rep.h_fd = h_fd;
    rep.xi_e = xi_e;
    rep.gap_tol = 0.02 / (p.mu - 1.0);
    const double h = grid.h();
    if (grid.spec().nx < min_smoothfit_nodes || grid.spec().ny < min_smoothfit_nodes) rep.insufficient_resolution = true;

    double r_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < curve.xs.size(); ++k) {
        const double x = curve.xs[k], gm = curve.ys[k];
        if (gm <= 0.0) continue;
        SmoothFitRecord rec;
        rec.x = x;
        rec.gamma = gm;
        auto d = one_sided_derivatives(grid, {x, gm}, h_fd);
        if (x >= h_fd) rec.gap_phi0 = d.left0;
        if (gm >= h_fd) rec.gap_phi1 = d.left1;
        rec.stop_side = std::max(std::abs(d.right0), std::abs(d.right1));
        rep.records.push_back(rec);
        if (xi_e > 0.0 && x <= xi_e - 4.0 * h) r_min = std::min(r_min, return_time_r({x, gm - h_fd}, grid));
    }
    rep.r_min = r_min;
    rep.gap_margin = std::isfinite(r_min) ? 0.2 * (-std::expm1(-(p.mu - 1.0) * r_min)) / (p.mu - 1.0)
                                          : 0.2 / (p.mu - 1.0);
    if (rep.insufficient_resolution) return rep;
    for (auto& rec : rep.records) {
        double gap = rec.gap();
        if (gap <= rep.gap_tol) {
            rec.cls = FitClass::Entrance;
        } else if (gap >= rep.gap_margin) {
            rec.cls = FitClass::Exit;
        }
    }
    return rep;
}

struct FastBoundary {
    BoundaryCurve s_gamma;  // S[gamma_{n+1}]
    BoundaryCurve gamma;    // gamma_{n+1}
};

// Large-lambda shortcut: the level set
//   v_n(X, Y) = -X/(mu-1) - Y/(mu+1) + (lambda/(c mu)) sqrt2
// is S[gamma_{n+1}]; mapping it back by S^{-1} gives gamma_{n+1}. The
// abscissae are chosen so that gamma_{n+1} lands on x_i = i h.
inline auto large_lambda_fast_boundary(const ValueGrid& grid_n) -> FastBoundary {
    const auto& model = grid_n.model();
    const auto& p = model.params;
    if (model.derived.regime != Regime::LargeLambda)
        throw Error("WRONG_REGIME", "the large-lambda construction needs lambda >= [1 - (1+m)c/2]+");
    const double jx = 1.0 - 1.0 / p.mu;
    const double offset = model.derived.g_zero / p.mu;
    auto G = [&](double X, double Y) { return grid_n.eval({X, Y}) + X / (p.mu - 1.0) + Y / (p.mu + 1.0) - offset; };
    auto level_y = [&](double X) {
        if (G(X, 0.0) >= 0.0) return 0.0;
        double hi = (p.mu + 1.0) * offset + grid_n.h();
        while (G(X, hi) < 0.0) hi *= 2.0;
        return bisect_up([&](double Y) { return G(X, Y) >= 0.0; }, 0.0, hi, 1e-11);
    };
    FastBoundary out;
    const double h = grid_n.h();
    for (int i = 0;; ++i) {
        double X = jx * i * h;
        if (G(X, 0.0) >= 0.0) {
            double xi_s = i == 0 ? 0.0 : bisect_up([&](double s) { return G(s, 0.0) >= 0.0; }, X - jx * h, X, 1e-12);
            out.s_gamma.xs.push_back(xi_s);
            out.s_gamma.ys.push_back(0.0);
            out.s_gamma.xi = xi_s;
            break;
        }
        out.s_gamma.xs.push_back(X);
        out.s_gamma.ys.push_back(level_y(X));
    }
    out.s_gamma.degenerate = out.s_gamma.xi == 0.0;
    out.gamma = s_transform_curve(out.s_gamma, 1, p);
    return out;
}

}  // namespace pdisorder
