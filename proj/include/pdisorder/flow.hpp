#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "model.hpp"

namespace pdisorder {

inline constexpr double default_tol_t = 1e-10;

// A nonnegative time that may be infinite. Infinity is a separate state, not
// a large double.
class ExitTime {
public:
    static auto never() -> ExitTime { return ExitTime{}; }
    static auto at(double t) -> ExitTime { return ExitTime{t}; }

    [[nodiscard]] auto is_finite() const -> bool { return t_.has_value(); }
    [[nodiscard]] auto value() const -> double { return *t_; }

private:
    ExitTime() = default;
    explicit ExitTime(double t) : t_(t) {}
    std::optional<double> t_;
};

struct FlowTimes {
    double r_bar = 0.0;
    ExitTime r_hat = ExitTime::never();
    std::optional<double> t_ell;
};

// Closed-form inter-jump dynamics of the tilde coordinates.
//   x(t) = -A + e^{(lambda+1)t}(x0 + A)
//   y(t) = -B + e^{(lambda-1)t}(y0 + B)        lambda != 1
//   y(t) = y0 + (1+m)t/sqrt2                    lambda == 1
class Flow {
public:
    explicit Flow(const Model& model)
        : p_(model.params), xi_star_(model.derived.xi_star), kx_(p_.lambda + 1.0), ky_(p_.lambda - 1.0),
          A_(p_.lambda * (1.0 - p_.m) / (sqrt2 * (p_.lambda + 1.0))),
          drift_y_(p_.lambda * (1.0 + p_.m) / sqrt2), linear_y_(p_.lambda == 1.0),
          B_(linear_y_ ? 0.0 : p_.lambda * (1.0 + p_.m) / (sqrt2 * (p_.lambda - 1.0))),
          jx_(1.0 - 1.0 / p_.mu), jy_(1.0 + 1.0 / p_.mu) {}

    [[nodiscard]] auto params() const -> const ModelParams& { return p_; }
    [[nodiscard]] auto xi_star() const -> double { return xi_star_; }
    [[nodiscard]] auto A() const -> double { return A_; }
    [[nodiscard]] auto B() const -> double { return B_; }
    [[nodiscard]] auto linear_y() const -> bool { return linear_y_; }
    [[nodiscard]] auto rate_x() const -> double { return kx_; }
    [[nodiscard]] auto rate_y() const -> double { return ky_; }
    [[nodiscard]] auto drift_y() const -> double { return drift_y_; }

    [[nodiscard]] auto x(double t, double x0) const -> double { return x0 + (x0 + A_) * std::expm1(kx_ * t); }

    [[nodiscard]] auto y(double t, double y0) const -> double {
        if (linear_y_) return y0 + (1.0 + p_.m) / sqrt2 * t;
        return y0 + (y0 + B_) * std::expm1(ky_ * t);
    }

    [[nodiscard]] auto operator()(double t, TildePoint q) const -> TildePoint { return {x(t, q.phi0), y(t, q.phi1)}; }

    [[nodiscard]] auto velocity(TildePoint q) const -> TildePoint {
        return {kx_ * q.phi0 + p_.lambda * (1.0 - p_.m) / sqrt2, ky_ * q.phi1 + drift_y_};
    }

    [[nodiscard]] auto slope(TildePoint q) const -> double {
        auto v = velocity(q);
        return v.phi1 / v.phi0;
    }

    [[nodiscard]] auto jump(TildePoint q) const -> TildePoint { return {jx_ * q.phi0, jy_ * q.phi1}; }
    [[nodiscard]] auto jump_inverse(TildePoint q) const -> TildePoint { return {q.phi0 / jx_, q.phi1 / jy_}; }

    [[nodiscard]] auto s_power(TildePoint q, int n) const -> TildePoint {
        return {std::pow(jx_, n) * q.phi0, std::pow(jy_, n) * q.phi1};
    }

    // d(x+y)/dt at q; positive past line l.
    [[nodiscard]] auto sum_rate(TildePoint q) const -> double {
        auto v = velocity(q);
        return v.phi0 + v.phi1;
    }

    // Forward time at which the path from q meets line l, if it does.
    [[nodiscard]] auto time_to_line(TildePoint q) const -> std::optional<double> {
        if (sum_rate(q) >= 0.0) return std::nullopt;
        // d(x+y)/dt = kx e^{kx t}(x0+A) + ky e^{ky t}(y0+B); solve for zero.
        double X = kx_ * (q.phi0 + A_);
        double Y = -ky_ * (q.phi1 + B_);
        return std::log(Y / X) / (kx_ - ky_);
    }

    // r_bar: first t >= 0 with x+y >= xi*.
    [[nodiscard]] auto exit_time_D(TildePoint q, double tol_t = default_tol_t) const -> double {
        return hitting_time_sum(q, xi_star_, tol_t);
    }

    // First t >= 0 with x(t)+y(t) >= level. The sum decreases at most until
    // line l and increases afterwards, so one bracket search suffices.
    [[nodiscard]] auto hitting_time_sum(TildePoint q, double level, double tol_t = default_tol_t) const -> double {
        auto s = [&](double t) { return x(t, q.phi0) + y(t, q.phi1); };
        if (s(0.0) >= level) return 0.0;
        double lo = time_to_line(q).value_or(0.0);
        double step = 1.0 / kx_;
        double hi = lo + step;
        while (s(hi) < level) {
            lo = hi;
            step *= 2.0;
            hi = lo + step;
        }
        while (hi - lo > tol_t) {
            double mid = 0.5 * (lo + hi);
            (s(mid) >= level ? hi : lo) = mid;
        }
        return hi;
    }

    // r_hat: first t >= 0 at which the backward path leaves the quadrant.
    [[nodiscard]] auto backward_exit_time(TildePoint q) const -> ExitTime {
        std::optional<double> tx;
        if (q.phi0 <= 0.0) {
            tx = 0.0;
        } else {
            tx = std::log1p(q.phi0 / A_) / kx_;
        }
        std::optional<double> ty;
        if (q.phi1 <= 0.0) {
            ty = 0.0;
        } else if (linear_y_) {
            ty = q.phi1 * sqrt2 / (1.0 + p_.m);
        } else if (ky_ > 0.0) {
            ty = std::log1p(q.phi1 / B_) / ky_;
        } else {
            // Backward y moves away from phi_d = -B; it reaches 0 only from below phi_d.
            double phid = -B_;
            if (q.phi1 < phid) ty = std::log(phid / (phid - q.phi1)) / (-ky_);
        }
        if (tx && ty) return ExitTime::at(std::min(*tx, *ty));
        if (tx) return ExitTime::at(*tx);
        if (ty) return ExitTime::at(*ty);
        return ExitTime::never();
    }

    [[nodiscard]] auto times(TildePoint q) const -> FlowTimes {
        return {exit_time_D(q), backward_exit_time(q), time_to_line(q)};
    }

    // int_0^d (x(s) + y(s)) ds, exact.
    [[nodiscard]] auto integral_sum(TildePoint q, double d) const -> double {
        double ix = -A_ * d + (q.phi0 + A_) * std::expm1(kx_ * d) / kx_;
        double iy = 0.0;
        if (linear_y_) {
            iy = q.phi1 * d + (1.0 + p_.m) / sqrt2 * d * d / 2.0;
        } else {
            iy = -B_ * d + (q.phi1 + B_) * std::expm1(ky_ * d) / ky_;
        }
        return ix + iy;
    }

private:
    ModelParams p_;
    double xi_star_;
    double kx_, ky_;
    double A_;
    double drift_y_;
    bool linear_y_;
    double B_;
    double jx_, jy_;
};

inline auto flow(double t, TildePoint q, const Model& model) -> TildePoint { return Flow(model)(t, q); }
inline auto jump_map(TildePoint q, const Model& model) -> TildePoint { return Flow(model).jump(q); }
inline auto jump_map_inverse(TildePoint q, const Model& model) -> TildePoint { return Flow(model).jump_inverse(q); }
inline auto s_power(TildePoint q, int n, const Model& model) -> TildePoint { return Flow(model).s_power(q, n); }
inline auto exit_time_D(TildePoint q, const Model& model) -> double { return Flow(model).exit_time_D(q); }
inline auto backward_exit_time(TildePoint q, const Model& model) -> ExitTime {
    return Flow(model).backward_exit_time(q);
}
inline auto flow_slope(TildePoint q, const Model& model) -> double { return Flow(model).slope(q); }

}  // namespace pdisorder
