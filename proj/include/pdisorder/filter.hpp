#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "flow.hpp"

namespace pdisorder {

struct AtomPrior {
    std::vector<double> atoms;    // post-disorder rates, distinct and positive
    std::vector<double> weights;  // probabilities

    static auto bernoulli(const ModelParams& p) -> AtomPrior {
        return {{p.mu - 1.0, p.mu + 1.0}, {(1.0 - p.m) / 2.0, (1.0 + p.m) / 2.0}};
    }

    [[nodiscard]] auto size() const -> std::size_t { return atoms.size(); }

    [[nodiscard]] auto is_bernoulli(double mu) const -> bool {
        return atoms.size() == 2 && atoms[0] == mu - 1.0 && atoms[1] == mu + 1.0;
    }
};

inline auto validate(const AtomPrior& prior) -> const AtomPrior& {
    if (prior.atoms.empty() || prior.atoms.size() != prior.weights.size())
        throw Error("BAD_PRIOR", "atoms and weights must be nonempty and of equal length");
    for (std::size_t i = 0; i < prior.atoms.size(); ++i) {
        if (!(prior.atoms[i] > 0.0)) throw Error("BAD_PRIOR", "atoms must be positive");
        if (!(prior.weights[i] >= 0.0)) throw Error("BAD_PRIOR", "weights must be nonnegative");
        for (std::size_t j = 0; j < i; ++j)
            if (prior.atoms[i] == prior.atoms[j]) throw Error("BAD_PRIOR", "atoms must be distinct");
    }
    double total = std::accumulate(prior.weights.begin(), prior.weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) throw Error("BAD_PRIOR", "weights must sum to 1");
    return prior;
}

// m^(i) = sum_j w_j (lambda_j - mu)^i for i = 0..k_max.
inline auto moments(const AtomPrior& prior, double mu, int k_max) -> std::vector<double> {
    std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (std::size_t j = 0; j < prior.size(); ++j) {
        double d = prior.atoms[j] - mu;
        double pw = 1.0;
        for (auto& o : out) {
            o += prior.weights[j] * pw;
            pw *= d;
        }
    }
    return out;
}

// Coefficients c_0..c_{k-1} of prod_i (v - (lambda_i - mu)) = v^k + sum c_i v^i.
struct ClosureCoeffs {
    std::vector<double> coeffs;

    // Value of the k-th odds given the first k.
    [[nodiscard]] auto close(const std::vector<double>& phis) const -> double {
        double s = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) s -= coeffs[i] * phis[i];
        return s;
    }
};

inline auto closure_coeffs(const AtomPrior& prior, double mu) -> ClosureCoeffs {
    std::vector<double> poly{1.0};  // ascending powers
    for (double a : prior.atoms) {
        double root = a - mu;
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] += poly[i];
            next[i] -= root * poly[i];
        }
        poly = std::move(next);
    }
    poly.pop_back();
    return {poly};
}

struct FilterState {
    std::vector<double> phis;
    double t = 0.0;
    int n_events = 0;
};

inline auto init_state(const ModelParams& p, const AtomPrior& prior) -> FilterState {
    auto mom = moments(prior, p.mu, static_cast<int>(prior.size()) - 1);
    double odds = p.pi / (1.0 - p.pi);
    for (auto& v : mom) v *= odds;
    return {mom, 0.0, 0};
}

inline auto tilde_transform(const FilterState& s) -> TildePoint {
    if (s.phis.size() < 2) throw Error("NOT_BERNOULLI", "tilde coordinates need two odds components");
    TildePoint q{(s.phis[0] - s.phis[1]) / sqrt2, (s.phis[0] + s.phis[1]) / sqrt2};
    if (q.phi0 < -1e-9 || q.phi1 < -1e-9) throw Error("NEGATIVE_ODDS", "tilde coordinate below zero");
    return q;
}

inline auto from_tilde(TildePoint q, FilterState base) -> FilterState {
    base.phis = {(q.phi0 + q.phi1) / sqrt2, (q.phi1 - q.phi0) / sqrt2};
    return base;
}

inline auto posterior(const FilterState& s) -> double { return s.phis[0] / (1.0 + s.phis[0]); }

inline constexpr double filter_rtol = 1e-10;

// Advance the odds vector over an event-free interval of length dt.
inline auto propagate(const FilterState& s, double dt, const Model& model, const AtomPrior& prior) -> FilterState {
    const auto& p = model.params;
    FilterState out = s;
    out.t = s.t + dt;
    if (dt <= 0.0) return out;
    if (prior.is_bernoulli(p.mu)) {
        Flow fl(model);
        TildePoint q{(s.phis[0] - s.phis[1]) / sqrt2, (s.phis[0] + s.phis[1]) / sqrt2};
        return from_tilde(fl(dt, q), out);
    }
    const std::size_t k = prior.size();
    auto mom = moments(prior, p.mu, static_cast<int>(k) - 1);
    auto closure = closure_coeffs(prior, p.mu);
    auto rhs = [&](const std::vector<double>& phi, std::vector<double>& dphi, double /*t*/) {
        double top = closure.close(phi);
        for (std::size_t i = 0; i < k; ++i) {
            double next = i + 1 < k ? phi[i + 1] : top;
            dphi[i] = p.lambda * (mom[i] + phi[i]) - next;
        }
    };
    namespace ode = boost::numeric::odeint;
    using stepper_t = ode::runge_kutta_dopri5<std::vector<double>>;
    std::vector<double> state = s.phis;
    try {
        ode::integrate_adaptive(ode::make_controlled<stepper_t>(1e-14, filter_rtol), rhs, state, 0.0, dt,
                                dt / 16.0);
    } catch (const std::exception& e) {
        throw Error("STEP_REJECTED", std::string("adaptive filter step failed: ") + e.what());
    }
    for (double v : state)
        if (!std::isfinite(v)) throw Error("STEP_REJECTED", "filter state diverged");
    out.phis = std::move(state);
    return out;
}

inline auto on_jump(const FilterState& s, double mu, const AtomPrior& prior) -> FilterState {
    FilterState out = s;
    const std::size_t k = s.phis.size();
    double top = closure_coeffs(prior, mu).close(s.phis);
    for (std::size_t i = 0; i < k; ++i) out.phis[i] += (i + 1 < k ? s.phis[i + 1] : top) / mu;
    out.n_events = s.n_events + 1;
    return out;
}

// Exact odds vector (Phi^(0), ..., Phi^(k)) at time t from the event times,
// by summing exponentials interval by interval.
inline auto direct_filter(double t, const std::vector<double>& events, const ModelParams& p, const AtomPrior& prior,
                          int k) -> std::vector<double> {
    std::vector<double> ev;
    for (double e : events)
        if (e <= t) ev.push_back(e);
    std::sort(ev.begin(), ev.end());
    const int n_t = static_cast<int>(ev.size());
    std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);
    const double odds = p.pi / (1.0 - p.pi);
    for (std::size_t j = 0; j < prior.size(); ++j) {
        const double w = prior.weights[j];
        const double d = prior.atoms[j] - p.mu;
        const double ratio = prior.atoms[j] / p.mu;
        const double beta = p.lambda - d;
        // Prior-mass term.
        double base = odds * std::exp(beta * t) * std::pow(ratio, n_t);
        // Integral over s in [0, t], split at the events; on [s_i, s_{i+1})
        // the count N_t - N_s equals n_t - i.
        double integral = 0.0;
        double a = 0.0;
        for (int i = 0; i <= n_t; ++i) {
            double b = i < n_t ? ev[static_cast<std::size_t>(i)] : t;
            if (b > a) {
                // int_a^b e^{beta (t-s)} ds
                double seg = beta == 0.0 ? (b - a) : std::exp(beta * (t - b)) * std::expm1(beta * (b - a)) / beta;
                integral += std::pow(ratio, n_t - i) * seg;
            }
            a = std::max(a, b);
        }
        double total = w * (base + p.lambda * integral);
        double pw = 1.0;
        for (auto& o : out) {
            o += total * pw;
            pw *= d;
        }
    }
    return out;
}

// Runs the recursive filter through the events and stops at time t.
inline auto run_filter(double t, const std::vector<double>& events, const Model& model, const AtomPrior& prior)
    -> FilterState {
    auto s = init_state(model.params, prior);
    for (double e : events) {
        if (e > t) break;
        s = propagate(s, e - s.t, model, prior);
        s = on_jump(s, model.params.mu, prior);
    }
    return propagate(s, t - s.t, model, prior);
}

}  // namespace pdisorder
