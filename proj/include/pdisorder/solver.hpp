#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "flow.hpp"
#include "parallel.hpp"

namespace pdisorder {

struct GridSpec {
    double x_max = 0.0;
    double y_max = 0.0;
    int nx = 0;
    int ny = 0;
    double dt_quad = 0.0;

    [[nodiscard]] auto hx() const -> double { return x_max / (nx - 1); }
    [[nodiscard]] auto hy() const -> double { return y_max / (ny - 1); }

    static auto default_dt(const ModelParams& p) -> double { return 0.002 / (p.lambda + 1.0); }

    // Square grid over [0, xi*]^2.
    static auto full(const Model& model, int nx, int ny, double dt_quad = 0.0) -> GridSpec {
        double xs = model.derived.xi_star;
        return checked({xs, xs, nx, ny, dt_quad > 0.0 ? dt_quad : default_dt(model.params)}, model);
    }

    // Square sub-box [0, side]^2. Values outside the box are taken as zero,
    // which is exact as long as the continuation region stays inside it
    // (see ValueGrid::touches_box_edge).
    static auto window(const Model& model, double side, int nx, int ny, double dt_quad = 0.0) -> GridSpec {
        double s = std::min(side, model.derived.xi_star);
        return checked({s, s, nx, ny, dt_quad > 0.0 ? dt_quad : default_dt(model.params)}, model);
    }

    static auto checked(GridSpec s, const Model& model) -> GridSpec {
        if (s.nx < 16 || s.ny < 16) throw Error("GRID_TOO_SMALL", "grid needs at least 16 samples per axis");
        if (!(s.dt_quad > 0.0)) throw Error("BAD_DT", "dt_quad must be positive");
        if (!(s.x_max > 0.0 && s.y_max > 0.0 && s.x_max <= model.derived.xi_star * (1 + 1e-12) &&
              s.y_max <= model.derived.xi_star * (1 + 1e-12)))
            throw Error("BAD_GRID_BOX", "grid box must lie inside [0, xi*]^2");
        return s;
    }

    auto operator==(const GridSpec&) const -> bool = default;
};

// Samples of v_n on the grid nodes, stored row-major with the x index as the
// row: values[i * ny + j] = v(x_i, y_j).
class ValueGrid {
public:
    ValueGrid(const Model& model, GridSpec spec)
        : model_(model), spec_(spec), values_(static_cast<std::size_t>(spec.nx) * spec.ny, 0.0) {
        refresh();
    }

    ValueGrid(const Model& model, GridSpec spec, std::vector<double> values, int n_iter,
              std::vector<double> history = {})
        : model_(model), spec_(spec), values_(std::move(values)), n_iter_(n_iter),
          sup_diff_history_(std::move(history)) {
        if (values_.size() != static_cast<std::size_t>(spec.nx) * spec.ny)
            throw Error("BAD_GRID", "value count does not match grid shape");
        refresh();
    }

    [[nodiscard]] auto model() const -> const Model& { return model_; }
    [[nodiscard]] auto params() const -> const ModelParams& { return model_.params; }
    [[nodiscard]] auto spec() const -> const GridSpec& { return spec_; }
    [[nodiscard]] auto values() const -> const std::vector<double>& { return values_; }
    [[nodiscard]] auto n_iter() const -> int { return n_iter_; }
    [[nodiscard]] auto sup_diff_history() const -> const std::vector<double>& { return sup_diff_history_; }
    [[nodiscard]] auto h() const -> double { return spec_.hx(); }
    [[nodiscard]] auto x(int i) const -> double { return i * spec_.hx(); }
    [[nodiscard]] auto y(int j) const -> double { return j * spec_.hy(); }
    [[nodiscard]] auto at(int i, int j) const -> double { return values_[static_cast<std::size_t>(i) * spec_.ny + j]; }
    [[nodiscard]] auto lower_bound() const -> double { return -sqrt2 / model_.params.c; }

    // Every point with x >= support_x or y >= support_y has value 0.
    [[nodiscard]] auto support_x() const -> double { return supp_x_; }
    [[nodiscard]] auto support_y() const -> double { return supp_y_; }
    [[nodiscard]] auto all_zero() const -> bool { return supp_x_ == 0.0; }

    // True when a negative value sits on the top or right edge of a window
    // box, i.e. the zero-outside-the-box assumption is not justified.
    [[nodiscard]] auto touches_box_edge() const -> bool {
        const double xs = model_.derived.xi_star;
        for (int k = 0; k < spec_.nx; ++k)
            if (spec_.y_max < xs && at(k, spec_.ny - 1) < 0.0) return true;
        for (int k = 0; k < spec_.ny; ++k)
            if (spec_.x_max < xs && at(spec_.nx - 1, k) < 0.0) return true;
        return false;
    }

    [[nodiscard]] auto eval(TildePoint q) const -> double {
        if (q.phi0 + q.phi1 >= model_.derived.xi_star) return 0.0;
        if (q.phi0 > spec_.x_max || q.phi1 > spec_.y_max) return 0.0;
        double fx = std::max(q.phi0, 0.0) / spec_.hx();
        double fy = std::max(q.phi1, 0.0) / spec_.hy();
        int i = std::min(static_cast<int>(fx), spec_.nx - 2);
        int j = std::min(static_cast<int>(fy), spec_.ny - 2);
        double tx = fx - i, ty = fy - j;
        const double* row0 = &values_[static_cast<std::size_t>(i) * spec_.ny + j];
        const double* row1 = row0 + spec_.ny;
        double v = (1.0 - tx) * ((1.0 - ty) * row0[0] + ty * row0[1]) + tx * ((1.0 - ty) * row1[0] + ty * row1[1]);
        return std::clamp(v, lower_bound(), 0.0);
    }

private:
    void refresh() {
        supp_x_ = 0.0;
        supp_y_ = 0.0;
        for (int i = 0; i < spec_.nx; ++i)
            for (int j = 0; j < spec_.ny; ++j)
                if (at(i, j) < 0.0) {
                    supp_x_ = std::max(supp_x_, x(i) + spec_.hx());
                    supp_y_ = std::max(supp_y_, y(j) + spec_.hy());
                }
    }

    Model model_;
    GridSpec spec_;
    std::vector<double> values_;
    int n_iter_ = 0;
    std::vector<double> sup_diff_history_;
    double supp_x_ = 0.0;
    double supp_y_ = 0.0;

};

inline auto eval_value(const ValueGrid& grid, TildePoint q) -> double { return grid.eval(q); }

// Level below which a value counts as strictly negative. Near the entrance
// boundary the value vanishes to third order in the distance, so any level
// proportional to h would push the detected boundary several cells into the
// continuation region; stopping nodes are exact zeros, so a fixed floor works.
inline constexpr double zero_level = 1e-9;

inline auto zero_tol(const ValueGrid& /*grid*/) -> double { return zero_level; }

// Discretization budget of a grid solve, in value units.
struct ErrorBudget {
    double interpolation = 0.0;  // 4 h (sqrt2/c) / h_scale with h_scale the box side
    double quadrature = 0.0;     // dt_quad times a bound on the integrand
    [[nodiscard]] auto total() const -> double { return interpolation + quadrature; }
};

inline auto error_budget(const Model& model, const GridSpec& spec) -> ErrorBudget {
    const auto& p = model.params;
    const double vmax = sqrt2 / p.c;
    const double g0 = model.derived.g_zero;
    const double integrand_bound = std::max(g0, model.derived.xi_star - g0) + p.mu * vmax;
    return {4.0 * spec.hx() * vmax / spec.x_max, spec.dt_quad * integrand_bound};
}

// Integrand e^{-(lambda+mu)u}[g + mu w(S(.))] sampled along the flow at
// u = 0, dt, 2dt, ..., with the final step shortened to land on t_max.
class FlowSampler {
public:
    FlowSampler(const ValueGrid& w, TildePoint q, double dt)
        : w_(w), fl_(w.model()), q_(q), dt_(dt), ex_(q.phi0 + fl_.A()), ey_(q.phi1 + fl_.B()),
          fx_(std::exp(fl_.rate_x() * dt)), fy_(std::exp(fl_.rate_y() * dt)),
          fd_(std::exp(-(w.params().lambda + w.params().mu) * dt)) {}

    struct Sample {
        double t, x, y, f;
    };

    [[nodiscard]] auto integrand(double x, double y, double disc) const -> double {
        const auto& p = w_.params();
        TildePoint s = fl_.jump({x, y});
        return disc * (x + y - w_.model().derived.g_zero + p.mu * w_.eval(s));
    }

    // Sample k on the regular lattice (incremental exponentials).
    auto next() -> Sample {
        double t = k_ * dt_;
        double x = ex_ - fl_.A();
        double y = fl_.linear_y() ? q_.phi1 + fl_.drift_y() * t : ey_ - fl_.B();
        Sample s{t, x, y, integrand(x, y, disc_)};
        ex_ *= fx_;
        ey_ *= fy_;
        disc_ *= fd_;
        ++k_;
        return s;
    }

    // Exact sample at an arbitrary time.
    [[nodiscard]] auto at(double t) const -> Sample {
        TildePoint p = fl_(t, q_);
        double disc = std::exp(-(w_.params().lambda + w_.params().mu) * t);
        return {t, p.phi0, p.phi1, integrand(p.phi0, p.phi1, disc)};
    }

    [[nodiscard]] auto flow() const -> const Flow& { return fl_; }

private:
    const ValueGrid& w_;
    Flow fl_;
    TildePoint q_;
    double dt_;
    double ex_, ey_;
    double fx_, fy_, fd_;
    double disc_ = 1.0;
    long k_ = 0;
};

// Running integral J w(t, q) at u = 0, dt, ..., t_max (trapezoid).
inline auto j_functional(const ValueGrid& w, TildePoint q, double t_max) -> std::vector<double> {
    const double dt = w.spec().dt_quad;
    std::vector<double> out{0.0};
    if (t_max <= 0.0) return out;
    FlowSampler sampler(w, q, dt);
    auto prev = sampler.next();
    double J = 0.0;
    for (;;) {
        bool last = prev.t + dt >= t_max;
        auto cur = last ? sampler.at(t_max) : sampler.next();
        J += (cur.t - prev.t) * (prev.f + cur.f) / 2.0;
        out.push_back(J);
        if (last) break;
        prev = cur;
    }
    return out;
}

struct JZero {
    double value = 0.0;
    double argmin_t = 0.0;
};

// Tail test: from a sample at (x, y) on the path through q onward, the
// integrand stays nonnegative, so the running integral cannot fall again.
class TailTest {
public:
    TailTest(const ValueGrid& w, TildePoint q) : w_(w), fl_(w.model()) {
        auto tl = fl_.time_to_line(q);
        if (tl) {
            t_line_ = *tl;
            TildePoint p = fl_(*tl, q);
            sum_at_line_ = p.phi0 + p.phi1;
        }
        const auto& p = w.params();
        jx_ = 1.0 - 1.0 / p.mu;
        jy_ = 1.0 + 1.0 / p.mu;
        y_floor_ = (!fl_.linear_y() && fl_.rate_y() < 0.0) ? -fl_.B() : std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] auto holds(double t, double x, double y) const -> bool {
        double future_min_sum = t < t_line_ ? sum_at_line_ : x + y;
        if (future_min_sum < w_.model().derived.g_zero) return false;
        if (jx_ * x >= w_.support_x()) return true;
        return jy_ * std::min(y, y_floor_) >= w_.support_y();
    }

private:
    const ValueGrid& w_;
    Flow fl_;
    double t_line_ = -1.0;
    double sum_at_line_ = 0.0;
    double jx_, jy_, y_floor_;
};

// Parabola through three equally spaced samples; returns the vertex value.
inline auto parabolic_vertex(double a, double b, double c) -> std::optional<std::pair<double, double>> {
    double denom = a - 2.0 * b + c;
    if (!(denom > 0.0)) return std::nullopt;
    double offset = (a - c) / (2.0 * denom);
    if (std::abs(offset) > 0.5) return std::nullopt;
    return std::make_pair(b - (a - c) * (a - c) / (8.0 * denom), offset);
}

// Minimum of the running integral over [0, r_bar(q)].
inline auto j_zero(const ValueGrid& w, TildePoint q) -> JZero {
    FlowSampler sampler(w, q, w.spec().dt_quad);
    const double r_bar = sampler.flow().exit_time_D(q);
    if (r_bar <= 0.0) return {};
    const double dt = w.spec().dt_quad;
    TailTest tail(w, q);

    auto s0 = sampler.next();
    if (tail.holds(0.0, s0.x, s0.y)) return {};
    // Rolling window of (J, f) at the three samples around the best one.
    struct Node {
        double J, f, t;
    };
    Node prev{0.0, s0.f, 0.0};
    Node best{0.0, s0.f, 0.0}, before_best{0.0, 0.0, -1.0}, after_best{0.0, 0.0, -1.0};
    bool want_after = false;
    bool uniform_after = false;
    double J = 0.0;
    for (;;) {
        bool last = prev.t + dt >= r_bar;
        auto cur = last ? sampler.at(r_bar) : sampler.next();
        J += (cur.t - prev.t) * (prev.f + cur.f) / 2.0;
        Node node{J, cur.f, cur.t};
        if (want_after) {
            after_best = node;
            uniform_after = !last;
            want_after = false;
        }
        if (J < best.J) {
            before_best = prev;
            best = node;
            want_after = true;
        }
        if (last || tail.holds(cur.t, cur.x, cur.y)) break;
        prev = node;
    }
    JZero out{best.J, best.t};
    // Refine between samples only when the integrand is monotone across the
    // bracket; a kink there (the path crossing a cell edge or the boundary of
    // the previous stopping set) makes the parabola meaningless.
    if (best.t > 0.0 && before_best.t >= 0.0 && after_best.t > best.t && uniform_after &&
        before_best.f <= best.f && best.f <= after_best.f) {
        if (auto v = parabolic_vertex(before_best.J, best.J, after_best.J)) out.value = std::min(out.value, v->first);
    }
    return out;
}

inline auto iterate(const ValueGrid& grid, unsigned workers = 1) -> ValueGrid {
    const auto& spec = grid.spec();
    const double xs = grid.model().derived.xi_star;
    std::vector<double> next(grid.values().size(), 0.0);
    parallel_for(static_cast<std::size_t>(spec.nx), workers, [&](std::size_t i) {
        const double x = grid.x(static_cast<int>(i));
        for (int j = 0; j < spec.ny; ++j) {
            const double y = grid.y(j);
            if (x + y >= xs) continue;
            next[i * spec.ny + j] = std::clamp(j_zero(grid, {x, y}).value, grid.lower_bound(), 0.0);
        }
    });
    double diff = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) diff = std::max(diff, std::abs(next[k] - grid.values()[k]));
    auto history = grid.sup_diff_history();
    history.push_back(diff);
    return ValueGrid(grid.model(), spec, std::move(next), grid.n_iter() + 1, std::move(history));
}

// Smallest n with (sqrt2/c)(mu/(lambda+mu))^n < epsilon.
inline auto iterations_for(const ModelParams& p, double epsilon) -> int {
    if (!(epsilon > 0.0)) throw Error("BAD_EPSILON", "epsilon must be positive");
    const double q = p.mu / (p.lambda + p.mu);
    double bound = sqrt2 / p.c;
    int n = 0;
    while (bound >= epsilon) {
        bound *= q;
        ++n;
    }
    return n;
}

inline auto error_bound(const ModelParams& p, int n) -> double {
    return sqrt2 / p.c * std::pow(p.mu / (p.lambda + p.mu), n);
}

struct IterationReport {
    int n_final = 0;
    double sup_residual = 0.0;
    double bound_used = 0.0;
    ErrorBudget budget;
    double seconds = 0.0;
};

struct SolveOptions {
    int max_iter = 1000;
    unsigned workers = 1;
    int residual_probes = 200;
    std::function<void(const ValueGrid&)> on_iterate;  // called with v_0, v_1, ..., v_N
};

// Halton points inside the grid box and strictly inside D.
inline auto probe_points(const ValueGrid& grid, int n) -> std::vector<TildePoint> {
    auto radical = [](long k, int base) {
        double f = 1.0, r = 0.0;
        while (k > 0) {
            f /= base;
            r += f * static_cast<double>(k % base);
            k /= base;
        }
        return r;
    };
    std::vector<TildePoint> out;
    const double xs = grid.model().derived.xi_star;
    for (long k = 1; static_cast<int>(out.size()) < n; ++k) {
        TildePoint q{radical(k, 2) * grid.spec().x_max, radical(k, 3) * grid.spec().y_max};
        if (q.phi0 + q.phi1 < xs) out.push_back(q);
    }
    return out;
}

inline auto fixed_point_residual(const ValueGrid& grid, int n_probes, unsigned workers = 1) -> double {
    auto probes = probe_points(grid, n_probes);
    std::vector<double> res(probes.size());
    parallel_for(probes.size(), workers, [&](std::size_t k) {
        res[k] = std::abs(std::clamp(j_zero(grid, probes[k]).value, grid.lower_bound(), 0.0) - grid.eval(probes[k]));
    });
    return res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
}

inline auto solve(const Model& model, const GridSpec& spec, double epsilon, const SolveOptions& opt = {})
    -> std::pair<ValueGrid, IterationReport> {
    const int n = iterations_for(model.params, epsilon);
    if (n > opt.max_iter)
        throw Error("BUDGET_EXCEEDED", "required iterations " + std::to_string(n) + " exceed cap " +
                                           std::to_string(opt.max_iter));
    auto start = std::chrono::steady_clock::now();
    ValueGrid grid(model, spec);
    if (opt.on_iterate) opt.on_iterate(grid);
    for (int k = 0; k < n; ++k) {
        grid = iterate(grid, opt.workers);
        if (opt.on_iterate) opt.on_iterate(grid);
    }
    IterationReport rep;
    rep.n_final = n;
    rep.bound_used = error_bound(model.params, n);
    rep.budget = error_budget(model, spec);
    rep.sup_residual = opt.residual_probes > 0 ? fixed_point_residual(grid, opt.residual_probes, opt.workers) : 0.0;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(grid), rep};
}

// r: first t > 0 at which the next iterate is (numerically) zero along the
// flow from q.
inline auto return_time_r(TildePoint q, const ValueGrid& next, double tol_t = default_tol_t) -> double {
    Flow fl(next.model());
    const double tol = zero_tol(next);
    const double r_bar = fl.exit_time_D(q);
    const double dt = next.spec().dt_quad;
    auto zero_at = [&](double t) { return next.eval(fl(t, q)) >= -tol; };
    double lo = 0.0, hi = 0.0;
    for (long k = 1;; ++k) {
        hi = std::min(k * dt, std::max(r_bar, dt));
        if (zero_at(hi)) break;
        lo = hi;
        if (hi >= r_bar) return r_bar;
    }
    while (hi - lo > tol_t) {
        double mid = 0.5 * (lo + hi);
        (zero_at(mid) ? hi : lo) = mid;
    }
    return hi;
}

struct OneSided {
    double left0, right0, left1, right1;
};

inline auto one_sided_derivatives(const ValueGrid& grid, TildePoint q, double h_fd) -> OneSided {
    const double v = grid.eval(q);
    return {(v - grid.eval({q.phi0 - h_fd, q.phi1})) / h_fd, (grid.eval({q.phi0 + h_fd, q.phi1}) - v) / h_fd,
            (v - grid.eval({q.phi0, q.phi1 - h_fd})) / h_fd, (grid.eval({q.phi0, q.phi1 + h_fd}) - v) / h_fd};
}

}  // namespace pdisorder
