#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <optional>
#include <vector>

#include "boundary.hpp"
#include "filter.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace pdisorder {

struct Scenario {
    double theta = 0.0;
    double lambda_post = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
};

struct SamplePath {
    std::vector<double> event_times;
    double horizon = 0.0;
    Scenario scenario;
};

inline auto sample_scenario(const ModelParams& p, const AtomPrior& prior, PathRng& rng) -> Scenario {
    Scenario s;
    s.theta = rng.uniform() <= p.pi ? 0.0 : rng.exponential(p.lambda);
    double u = rng.uniform();
    double acc = 0.0;
    s.lambda_post = prior.atoms.back();
    for (std::size_t j = 0; j < prior.size(); ++j) {
        acc += prior.weights[j];
        if (u <= acc) {
            s.lambda_post = prior.atoms[j];
            break;
        }
    }
    return s;
}

// Arrivals at rate mu before theta and lambda_post after it, up to horizon.
inline auto sample_path(const Scenario& scenario, const ModelParams& p, double horizon, PathRng& rng) -> SamplePath {
    if (!(horizon > 0.0)) throw Error("BAD_HORIZON", "horizon must be positive");
    SamplePath path;
    path.horizon = horizon;
    path.scenario = scenario;
    double t = 0.0;
    for (;;) {
        bool before = t < scenario.theta;
        double rate = before ? p.mu : scenario.lambda_post;
        double next = t + rng.exponential(rate);
        if (before && next >= scenario.theta) {
            t = scenario.theta;  // memoryless restart at the new rate
            continue;
        }
        if (next > horizon) break;
        path.event_times.push_back(next);
        t = next;
    }
    return path;
}

enum class PolicyKind { Boundary, PosteriorThreshold, FixedTime };

struct PolicySpec {
    PolicyKind kind = PolicyKind::FixedTime;
    BoundaryCurve curve;
    double p = 0.5;
    double T = 0.0;

    static auto boundary(BoundaryCurve c) -> PolicySpec { return {PolicyKind::Boundary, std::move(c), 0.0, 0.0}; }
    static auto posterior_threshold(double p) -> PolicySpec {
        if (!(p > 0.0 && p < 1.0)) throw Error("BAD_THRESHOLD", "threshold must lie in (0, 1)");
        return {PolicyKind::PosteriorThreshold, {}, p, 0.0};
    }
    static auto fixed_time(double T) -> PolicySpec { return {PolicyKind::FixedTime, {}, 0.0, T}; }
};

// Stopping set {margin >= 0} in tilde coordinates. Both kinds are upward
// closed: moving up or right never leaves the set.
class StopSet {
public:
    static auto sum_at_least(double level) -> StopSet {
        StopSet s;
        s.level_ = level;
        return s;
    }

    // Curve policy. The curve is clamped to the band between the C0
    // hypotenuse and the edge of D, where the optimal boundary provably lies.
    static auto curve(const BoundaryCurve& c, const Model& model) -> StopSet {
        if (c.xi > model.derived.xi_star) throw Error("BAD_POLICY", "boundary support exceeds xi*");
        StopSet s;
        s.curve_ = &c;
        s.g_zero_ = model.derived.g_zero;
        s.xi_star_ = model.derived.xi_star;
        return s;
    }

    [[nodiscard]] auto margin(TildePoint q) const -> double {
        if (!curve_) return q.phi0 + q.phi1 - level_;
        double lo = std::max(g_zero_ - q.phi0, 0.0);
        double hi = std::max(xi_star_ - q.phi0, 0.0);
        return q.phi1 - std::clamp((*curve_)(q.phi0), lo, hi);
    }

    [[nodiscard]] auto contains(TildePoint q) const -> bool { return margin(q) >= 0.0; }

private:
    const BoundaryCurve* curve_ = nullptr;
    double level_ = 0.0;
    double g_zero_ = 0.0;
    double xi_star_ = 0.0;
};

struct CrossingOptions {
    double dt_scan = 0.001;
    double tol_t = default_tol_t;
};

// First time in [0, duration] at which the flow from q enters the set.
inline auto first_crossing(const Flow& fl, TildePoint q, double duration, const StopSet& set,
                           const CrossingOptions& opt) -> std::optional<double> {
    if (set.contains(q)) return 0.0;
    auto in = [&](double t) { return set.contains(fl(t, q)); };
    auto refine = [&](double lo, double hi) {
        while (hi - lo > opt.tol_t) {
            double mid = 0.5 * (lo + hi);
            (in(mid) ? hi : lo) = mid;
        }
        return hi;
    };
    // x always increases; if y does too, the margin is monotone along the
    // segment and the end point decides.
    if (fl.velocity(q).phi1 >= 0.0) {
        if (!in(duration)) return std::nullopt;
        return refine(0.0, duration);
    }
    double lo = 0.0;
    for (long k = 1;; ++k) {
        double hi = std::min(k * opt.dt_scan, duration);
        if (in(hi)) return refine(lo, hi);
        if (hi >= duration) return std::nullopt;
        lo = hi;
    }
}

struct PolicyOutcome {
    double tau = 0.0;
    bool truncated = false;
};

inline auto hitting_time(const SamplePath& path, const StopSet& set, const Model& model,
                         const CrossingOptions& opt) -> PolicyOutcome {
    Flow fl(model);
    TildePoint q = initial_tilde(model.params);
    double t = 0.0;
    for (std::size_t k = 0;; ++k) {
        bool at_end = k == path.event_times.size();
        double next = at_end ? path.horizon : path.event_times[k];
        if (auto c = first_crossing(fl, q, next - t, set, opt)) return {t + *c, false};
        if (at_end) return {path.horizon, true};
        q = fl.jump(fl(next - t, q));
        t = next;
        if (set.contains(q)) return {t, false};
    }
}

inline auto run_policy(const SamplePath& path, const PolicySpec& policy, const Model& model, const AtomPrior& prior,
                       const CrossingOptions& opt = {}) -> PolicyOutcome {
    if (policy.kind == PolicyKind::FixedTime) {
        if (policy.T > path.horizon) return {path.horizon, true};
        return {policy.T, false};
    }
    if (!prior.is_bernoulli(model.params.mu))
        throw Error("NOT_BERNOULLI", "state-based policies run on the two-point prior");
    if (policy.kind == PolicyKind::Boundary)
        return hitting_time(path, StopSet::curve(require_nondegenerate(policy.curve), model), model, opt);
    // Pi >= p  <=>  Phi0 = (x + y)/sqrt2 >= p/(1-p).
    return hitting_time(path, StopSet::sum_at_least(sqrt2 * policy.p / (1.0 - policy.p)), model, opt);
}

inline auto loss(const PolicyOutcome& out, const Scenario& s, const ModelParams& p) -> double {
    if (out.truncated) return p.c * std::max(out.tau - s.theta, 0.0);
    return (out.tau < s.theta ? 1.0 : 0.0) + p.c * std::max(out.tau - s.theta, 0.0);
}

struct RiskEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n_paths = 0;
    std::size_t truncation_count = 0;
};

struct PathRecord {
    double theta, lambda_post, tau, loss;
    bool truncated;
};

// Bound on E0[tau_D] from the generator inequality.
inline auto exit_time_bound(const Model& model) -> double {
    const auto& p = model.params;
    return model.derived.xi_star * (1.0 + 1.0 / p.mu) / (p.lambda * sqrt2);
}

inline auto default_horizon(const Model& model) -> double { return 20.0 * exit_time_bound(model); }

inline auto summarize(const std::vector<double>& xs) -> std::pair<double, double> {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return {mean, sd / std::sqrt(static_cast<double>(xs.size()))};
}

struct SimulationSettings {
    std::size_t n_paths = 10000;
    double horizon = 0.0;  // 0 selects default_horizon
    std::uint64_t seed = 1;
    unsigned workers = 1;
    CrossingOptions crossing;
};

inline auto simulate_policy(const Model& model, const AtomPrior& prior, const PolicySpec& policy,
                            const SimulationSettings& cfg) -> std::vector<PathRecord> {
    if (cfg.n_paths < 100) throw Error("TOO_FEW_PATHS", "need at least 100 paths");
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : default_horizon(model);
    std::vector<PathRecord> rec(cfg.n_paths);
    parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        PathRng rng(cfg.seed, i);
        auto sc = sample_scenario(model.params, prior, rng);
        sc.seed = cfg.seed;
        sc.path_index = i;
        auto path = sample_path(sc, model.params, horizon, rng);
        auto out = run_policy(path, policy, model, prior, cfg.crossing);
        rec[i] = {sc.theta, sc.lambda_post, out.tau, loss(out, sc, model.params), out.truncated};
    });
    return rec;
}

inline auto risk_from_records(const std::vector<PathRecord>& rec) -> RiskEstimate {
    std::vector<double> losses;
    losses.reserve(rec.size());
    RiskEstimate r;
    for (const auto& x : rec) {
        losses.push_back(x.loss);
        r.truncation_count += x.truncated ? 1 : 0;
    }
    std::tie(r.mean, r.stderr_) = summarize(losses);
    r.n_paths = rec.size();
    return r;
}

inline auto empirical_bayes_risk(const Model& model, const AtomPrior& prior, const PolicySpec& policy,
                                 const SimulationSettings& cfg) -> RiskEstimate {
    return risk_from_records(simulate_policy(model, prior, policy, cfg));
}

struct SandwichReport {
    std::size_t n_paths = 0;
    std::size_t violations = 0;
    double max_excess = 0.0;  // largest amount by which an inequality fails
};

// Checks tau_C0 <= tau <= tau_D on each path for a boundary policy.
inline auto sandwich_check(const Model& model, const BoundaryCurve& curve, const SimulationSettings& cfg)
    -> SandwichReport {
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : default_horizon(model);
    const auto prior = AtomPrior::bernoulli(model.params);
    const auto policy = StopSet::curve(require_nondegenerate(curve), model);
    const auto c0 = StopSet::sum_at_least(model.derived.g_zero);
    const auto d = StopSet::sum_at_least(model.derived.xi_star);
    std::vector<double> excess(cfg.n_paths, 0.0);
    parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
        PathRng rng(cfg.seed, i);
        auto sc = sample_scenario(model.params, prior, rng);
        auto path = sample_path(sc, model.params, horizon, rng);
        double t_c0 = hitting_time(path, c0, model, cfg.crossing).tau;
        double t = hitting_time(path, policy, model, cfg.crossing).tau;
        double t_d = hitting_time(path, d, model, cfg.crossing).tau;
        excess[i] = std::max(t_c0 - t, t - t_d);
    });
    SandwichReport rep;
    rep.n_paths = cfg.n_paths;
    for (double e : excess) {
        if (e > cfg.crossing.tol_t) ++rep.violations;
        rep.max_excess = std::max(rep.max_excess, e);
    }
    return rep;
}

struct DynkinReport {
    double lhs = 0.0, rhs = 0.0;
    double se_lhs = 0.0, se_rhs = 0.0;
    double se_pooled = 0.0;  // sqrt(se_lhs^2 + se_rhs^2)
    double se_diff = 0.0;    // standard error of the paired difference
};

// One reference-measure path (rate mu) from q until t_cap or the exit from
// D. Returns (f(end) - f(start), int_0^{end} lambda (x + y + sqrt2) ds).
inline auto dynkin_path(const Flow& fl, TildePoint q, double t_cap, PathRng& rng) -> std::pair<double, double> {
    const auto& p = fl.params();
    const double f0 = q.phi0 + q.phi1;
    double t = 0.0, integral = 0.0;
    for (;;) {
        if (q.phi0 + q.phi1 >= fl.xi_star()) break;
        double gap = rng.exponential(p.mu);
        double seg = std::min(gap, t_cap - t);
        double r_bar = fl.exit_time_D(q);
        if (r_bar <= seg) {
            integral += p.lambda * (fl.integral_sum(q, r_bar) + sqrt2 * r_bar);
            q = fl(r_bar, q);
            break;
        }
        integral += p.lambda * (fl.integral_sum(q, seg) + sqrt2 * seg);
        q = fl(seg, q);
        t += seg;
        if (seg < gap) break;  // reached t_cap
        q = fl.jump(q);
    }
    return {q.phi0 + q.phi1 - f0, integral};
}

inline auto dynkin_check(const Model& model, std::size_t n_paths, double t_cap, std::uint64_t seed,
                         TildePoint start = {}, unsigned workers = 1) -> DynkinReport {
    Flow fl(model);
    std::vector<double> l(n_paths), r(n_paths), diff(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        PathRng rng(seed, i);
        auto [a, b] = dynkin_path(fl, start, t_cap, rng);
        l[i] = a;
        r[i] = b;
        diff[i] = a - b;
    });
    DynkinReport rep;
    std::tie(rep.lhs, rep.se_lhs) = summarize(l);
    std::tie(rep.rhs, rep.se_rhs) = summarize(r);
    rep.se_diff = summarize(diff).second;
    rep.se_pooled = std::hypot(rep.se_lhs, rep.se_rhs);
    return rep;
}

struct ExitTimeReport {
    double mean = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;
};

// Empirical E0[tau_D] under the reference measure.
inline auto exit_time_bound_check(const Model& model, std::size_t n_paths, std::uint64_t seed, TildePoint start = {},
                                  unsigned workers = 1) -> ExitTimeReport {
    Flow fl(model);
    std::vector<double> taus(n_paths);
    parallel_for(n_paths, workers, [&](std::size_t i) {
        PathRng rng(seed, i);
        TildePoint q = start;
        double t = 0.0;
        while (q.phi0 + q.phi1 < fl.xi_star()) {
            double gap = rng.exponential(model.params.mu);
            double r_bar = fl.exit_time_D(q);
            if (r_bar <= gap) {
                t += r_bar;
                break;
            }
            q = fl.jump(fl(gap, q));
            t += gap;
        }
        taus[i] = t;
    });
    ExitTimeReport rep;
    std::tie(rep.mean, rep.stderr_) = summarize(taus);
    rep.bound = exit_time_bound(model);
    return rep;
}

}  // namespace pdisorder
