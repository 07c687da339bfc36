// Command-line driver: solve -> boundary -> simulate, plus filter, smoothfit
// and risk-curve. Exit status: 0 ok, 2 invalid input, 3 missing artifact,
// 4 iteration budget exceeded.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <pdisorder/io.hpp>
#include <pdisorder/simulator.hpp>

namespace fs = std::filesystem;
using namespace pdisorder;

namespace {

constexpr const char* version = "pdisorder 0.1.0";

struct RunConfig {
    ModelParams params{1.0, 2.0, 1.0, 0.0, 0.2};
    int nx = 300;
    int ny = 300;
    double dt_quad = 0.0;  // 0 selects 0.002/(lambda+1)
    double window = 0.0;   // 0 selects the full box [0, xi*]^2
    double epsilon = 0.025;
    std::uint64_t seed = 1;
    std::size_t n_paths = 10000;
    double horizon = 0.0;
    std::string output_dir = "out";
    unsigned workers = 1;
    int max_iter = 1000;
    std::optional<AtomPrior> prior;
};

// Flag values; unset optionals leave the config file value in place.
struct Overrides {
    std::string config;
    std::optional<double> lambda, mu, c, m, pi, dt_quad, window, epsilon, horizon;
    std::optional<int> nx, ny, max_iter;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_paths;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "JSON run configuration");
    app->add_option("--lambda", o.lambda);
    app->add_option("--mu", o.mu);
    app->add_option("--c", o.c);
    app->add_option("--m", o.m);
    app->add_option("--pi", o.pi);
    app->add_option("--nx", o.nx);
    app->add_option("--ny", o.ny);
    app->add_option("--dt-quad", o.dt_quad);
    app->add_option("--window", o.window, "solve on [0, w]^2 instead of [0, xi*]^2");
    app->add_option("--epsilon", o.epsilon);
    app->add_option("--seed", o.seed);
    app->add_option("--n-paths", o.n_paths);
    app->add_option("--horizon", o.horizon);
    app->add_option("--out", o.out, "output directory");
    app->add_option("--workers", o.workers, "worker threads (0 = all cores)");
    app->add_option("--max-iter", o.max_iter, "iteration cap");
}

auto load_config(const Overrides& o) -> RunConfig {
    RunConfig cfg;
    if (!o.config.empty()) {
        json j = json::parse(read_text(o.config));
        reject_unknown_keys(j,
                            {"params", "grid", "epsilon", "seed", "n_paths", "horizon", "output_dir", "workers",
                             "max_iter", "prior"},
                            "config");
        if (j.contains("params")) cfg.params = params_from_json(j["params"]);
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            reject_unknown_keys(g, {"nx", "ny", "dt_quad", "window"}, "grid");
            cfg.nx = g.value("nx", cfg.nx);
            cfg.ny = g.value("ny", cfg.ny);
            cfg.dt_quad = g.value("dt_quad", cfg.dt_quad);
            cfg.window = g.value("window", cfg.window);
        }
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.n_paths = j.value("n_paths", cfg.n_paths);
        cfg.horizon = j.value("horizon", cfg.horizon);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        cfg.workers = j.value("workers", cfg.workers);
        cfg.max_iter = j.value("max_iter", cfg.max_iter);
        if (j.contains("prior")) cfg.prior = prior_from_json(j["prior"]);
    }
    auto set = [](auto& dst, const auto& src) {
        if (src) dst = *src;
    };
    set(cfg.params.lambda, o.lambda);
    set(cfg.params.mu, o.mu);
    set(cfg.params.c, o.c);
    set(cfg.params.m, o.m);
    set(cfg.params.pi, o.pi);
    set(cfg.nx, o.nx);
    set(cfg.ny, o.ny);
    set(cfg.dt_quad, o.dt_quad);
    set(cfg.window, o.window);
    set(cfg.epsilon, o.epsilon);
    set(cfg.seed, o.seed);
    set(cfg.n_paths, o.n_paths);
    set(cfg.horizon, o.horizon);
    set(cfg.output_dir, o.out);
    set(cfg.workers, o.workers);
    set(cfg.max_iter, o.max_iter);
    validate(cfg.params);
    if (!(cfg.epsilon > 0.0)) throw Error("BAD_EPSILON", "epsilon must be positive");
    return cfg;
}

auto config_json(const RunConfig& c) -> json {
    json j{{"params", params_to_json(c.params)},
           {"grid", {{"nx", c.nx}, {"ny", c.ny}, {"dt_quad", c.dt_quad}, {"window", c.window}}},
           {"epsilon", c.epsilon},
           {"seed", c.seed},
           {"n_paths", c.n_paths},
           {"horizon", c.horizon},
           {"max_iter", c.max_iter}};
    if (c.prior) j["prior"] = {{"atoms", c.prior->atoms}, {"weights", c.prior->weights}};
    return j;
}

auto grid_spec(const RunConfig& c, const Model& model) -> GridSpec {
    return c.window > 0.0 ? GridSpec::window(model, c.window, c.nx, c.ny, c.dt_quad)
                          : GridSpec::full(model, c.nx, c.ny, c.dt_quad);
}

auto cache_dir(const RunConfig& c) -> fs::path {
    if (const char* env = std::getenv("PDISORDER_CACHE_DIR"); env && *env) return env;
    return fs::path(c.output_dir) / "cache";
}

auto manifest(const RunConfig& c, const std::string& command, double seconds) -> json {
    return {{"command", command},
            {"config_hash", fnv1a64(config_json(c).dump())},
            {"version", version},
            {"seconds", seconds}};
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    [[nodiscard]] auto seconds() const -> double {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

struct Solved {
    ValueGrid grid;
    std::string hash;
    bool cache_hit;
    json report;
};

// Loads the grid for this config from the cache, solving first if needed.
auto obtain_grid(const RunConfig& cfg) -> Solved {
    Model model(cfg.params);
    auto spec = grid_spec(cfg, model);
    GridCache cache{cache_dir(cfg), solve_hash(cfg.params, spec, cfg.epsilon)};
    if (cache.exists()) {
        auto [grid, side] = read_grid_cache(cache);
        return {std::move(grid), cache.hash, true, side.at("report")};
    }
    SolveOptions opt;
    opt.max_iter = cfg.max_iter;
    opt.workers = cfg.workers;
    auto [grid, rep] = solve(model, spec, cfg.epsilon, opt);
    json report{{"n_final", rep.n_final},
                {"bound_used", rep.bound_used},
                {"sup_residual", rep.sup_residual},
                {"tol_disc", {{"interpolation", rep.budget.interpolation},
                              {"quadrature", rep.budget.quadrature},
                              {"total", rep.budget.total()}}},
                {"sup_diff_history", grid.sup_diff_history()},
                {"window_edge_touched", grid.touches_box_edge()},
                {"solve_seconds", rep.seconds}};
    write_grid_cache(cache, grid, cfg.epsilon, report);
    return {std::move(grid), cache.hash, false, report};
}

void emit(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
}

auto cmd_solve(const RunConfig& cfg) -> int {
    Timer timer;
    auto s = obtain_grid(cfg);
    const fs::path out(cfg.output_dir);
    write_grid_csv(out / "grid.csv", s.grid);
    double v0 = s.grid.eval(initial_tilde(cfg.params));
    json j{{"grid_hash", s.hash},
           {"cache_hit", s.cache_hit},
           {"report", s.report},
           {"v_at_initial", v0},
           {"bayes_risk", min_bayes_risk(cfg.params, v0)},
           {"manifest", manifest(cfg, "solve", timer.seconds())}};
    if (s.report.value("window_edge_touched", false))
        std::cerr << "warning: continuation region reaches the window edge; enlarge --window\n";
    emit(out / "solve_report.json", j);
    return 0;
}

auto cmd_boundary(const RunConfig& cfg, const std::string& method, bool split) -> int {
    Timer timer;
    auto s = obtain_grid(cfg);
    const auto& grid = s.grid;
    const auto& model = grid.model();
    BoundaryCurve curve;
    json extra = json::object();
    std::optional<double> xi_e;
    if (method == "grid") {
        curve = extract_gamma(grid);
    } else if (method == "c") {
        curve = large_lambda_fast_boundary(grid).gamma;
    } else if (method == "d") {
        auto a = a_curve(grid);
        xi_e = tangency_xi_e(a, model);
        std::vector<TildePoint> entrance;
        for (std::size_t k = 0; k < a.xs.size(); ++k)
            if (a.xs[k] > *xi_e && a.ys[k] > 0.0) entrance.push_back({a.xs[k], a.ys[k]});
        auto res = method_d_exit(entrance, grid, 1 << 30, cfg.workers);
        for (const auto& pnt : res.exit_points) {
            curve.xs.push_back(pnt.phi0);
            curve.ys.push_back(pnt.phi1);
        }
        for (const auto& pnt : entrance) {
            curve.xs.push_back(pnt.phi0);
            curve.ys.push_back(pnt.phi1);
        }
        curve.xs.push_back(a.xi);
        curve.ys.push_back(0.0);
        curve.xi = a.xi;
        extra["xi_x"] = res.xi_x;
        extra["exit_points"] = res.exit_points.size();
    } else {
        throw Error("BAD_METHOD", "method must be grid, c or d");
    }
    if (curve.degenerate || curve.xs.empty()) {
        std::cerr << "warning: value grid is identically zero; the boundary is the x-axis\n";
        extra["warning"] = "degenerate grid: gamma is identically zero";
    }
    if (split && !xi_e) xi_e = curve.degenerate ? 0.0 : tangency_xi_e(a_curve(grid), model);
    std::vector<char> classes;
    if (split)
        for (double x : curve.xs) classes.push_back(*xi_e > 0.0 && x <= *xi_e ? 'X' : 'E');
    if (model.derived.regime == Regime::LargeLambda && !curve.degenerate) {
        // gamma equals gamma_1(x) = -x + (lambda/c) sqrt2 on [0, x_1].
        BoundaryCurve g1{{0.0, model.derived.g_zero}, {model.derived.g_zero, 0.0}, model.derived.g_zero};
        double x1 = curve_intersection_xn(g1, 1, cfg.params);
        double dev = 0.0;
        for (double x : curve.xs)
            if (x <= x1) dev = std::max(dev, std::abs(curve(x) - g1(x)));
        extra["x1_certificate"] = {{"x1", x1}, {"max_abs_deviation", dev}, {"h", grid.h()}};
    }
    const fs::path out(cfg.output_dir);
    const std::string tag = method == "grid" ? "grid" : (method == "c" ? "method_c" : "method_d");
    write_boundary_csv(out / "boundary.csv", curve, classes);
    json j{{"xi", curve.xi},
           {"xi_e", xi_e ? json(*xi_e) : json(nullptr)},
           {"regime", to_string(model.derived.regime)},
           {"method", tag},
           {"grid_hash", s.hash},
           {"boundary_csv_hash", fnv1a64(read_text(out / "boundary.csv"))},
           {"params", params_to_json(cfg.params)},
           {"details", extra},
           {"manifest", manifest(cfg, "boundary", timer.seconds())}};
    emit(out / "boundary_split.json", j);
    return 0;
}

auto risk_json(const RiskEstimate& r) -> json {
    return {{"mean", r.mean}, {"stderr", r.stderr_}, {"n_paths", r.n_paths}, {"truncation_count", r.truncation_count}};
}

auto cmd_simulate(const RunConfig& cfg, const std::string& policy_kind, double p, double T, bool sweep, bool sandwich,
                  bool dynkin, double t_cap, const std::string& per_path_csv) -> int {
    Timer timer;
    Model model(cfg.params);
    const fs::path out(cfg.output_dir);
    auto prior = cfg.prior.value_or(AtomPrior::bernoulli(cfg.params));
    SimulationSettings s;
    s.n_paths = cfg.n_paths;
    s.horizon = cfg.horizon;
    s.seed = cfg.seed;
    s.workers = cfg.workers;
    s.crossing.dt_scan = cfg.dt_quad > 0.0 ? cfg.dt_quad : GridSpec::default_dt(cfg.params);

    std::optional<BoundaryCurve> curve;
    std::string grid_hash;
    auto need_curve = [&]() -> const BoundaryCurve& {
        if (!curve) {
            const auto split_path = out / "boundary_split.json";
            if (!fs::exists(out / "boundary.csv") || !fs::exists(split_path))
                throw Error("MISSING_ARTIFACT", "no boundary in " + out.string() + "; run the boundary command first");
            json meta = json::parse(read_text(split_path));
            if (params_from_json(meta.at("params")) != cfg.params)
                throw Error("CACHE_MISMATCH", "boundary in " + out.string() + " was computed for other parameters");
            auto spec = grid_spec(cfg, model);
            if (meta.at("grid_hash") != solve_hash(cfg.params, spec, cfg.epsilon))
                throw Error("CACHE_MISMATCH", "boundary in " + out.string() + " comes from a different grid");
            if (meta.at("boundary_csv_hash") != fnv1a64(read_text(out / "boundary.csv")))
                throw Error("CACHE_MISMATCH", "boundary.csv does not match boundary_split.json");
            curve = read_boundary_csv(out / "boundary.csv");
            grid_hash = meta.at("grid_hash").get<std::string>();
        }
        return *curve;
    };

    PolicySpec policy;
    if (policy_kind == "boundary") {
        policy = PolicySpec::boundary(need_curve());
    } else if (policy_kind == "threshold") {
        policy = PolicySpec::posterior_threshold(p);
    } else if (policy_kind == "fixed") {
        policy = PolicySpec::fixed_time(T);
    } else {
        throw Error("BAD_POLICY", "policy must be boundary, threshold or fixed");
    }
    auto records = simulate_policy(model, prior, policy, s);
    auto risk = risk_from_records(records);
    json j{{"policy", policy_kind},
           {"risk", risk_json(risk)},
           {"seed", cfg.seed},
           {"horizon", s.horizon > 0.0 ? s.horizon : default_horizon(model)}};
    if (!grid_hash.empty()) j["grid_hash"] = grid_hash;
    if (policy_kind == "threshold") j["p"] = p;
    if (policy_kind == "fixed") j["T"] = T;
    if (!per_path_csv.empty()) {
        std::string text = "theta,lambda_post,tau,loss\n";
        for (const auto& r : records)
            text += fmt_double(r.theta) + ',' + fmt_double(r.lambda_post) + ',' + fmt_double(r.tau) + ',' +
                    fmt_double(r.loss) + '\n';
        write_text(per_path_csv, text);
    }
    if (sweep) {
        json table = json::array();
        for (int k = 1; k <= 19; ++k) {
            double pk = 0.05 * k;
            auto r = empirical_bayes_risk(model, prior, PolicySpec::posterior_threshold(pk), s);
            table.push_back({{"p", pk}, {"risk", risk_json(r)}});
        }
        j["threshold_sweep"] = table;
    }
    if (sandwich) {
        auto rep = sandwich_check(model, need_curve(), s);
        j["sandwich"] = {{"n_paths", rep.n_paths}, {"violations", rep.violations}, {"max_excess", rep.max_excess}};
    }
    if (dynkin) {
        auto d = dynkin_check(model, s.n_paths, t_cap, s.seed, {}, s.workers);
        auto e = exit_time_bound_check(model, s.n_paths, s.seed + 1, {}, s.workers);
        j["dynkin"] = {{"t_cap", t_cap},       {"lhs", d.lhs},           {"rhs", d.rhs},
                       {"se_pooled", d.se_pooled}, {"se_diff", d.se_diff}};
        j["exit_time"] = {{"mean", e.mean}, {"stderr", e.stderr_}, {"bound", e.bound}};
    }
    j["manifest"] = manifest(cfg, "simulate", timer.seconds());
    emit(out / "simulate_report.json", j);
    return 0;
}

auto cmd_filter(const RunConfig& cfg, const std::string& events_path, double step, std::optional<double> t_end,
                const std::string& csv_path) -> int {
    Model model(cfg.params);
    auto prior = cfg.prior.value_or(AtomPrior::bernoulli(cfg.params));
    validate(prior);
    auto events = read_event_times(events_path);
    const double end = t_end.value_or(events.empty() ? 0.0 : events.back());
    if (!(step > 0.0)) throw Error("BAD_STEP", "report step must be positive");
    auto closure = closure_coeffs(prior, cfg.params.mu);
    const std::size_t k = prior.size();
    std::string text = "t";
    for (std::size_t i = 0; i <= k; ++i) text += ",phi" + std::to_string(i);
    text += ",posterior\n";
    auto row = [&](const FilterState& st) {
        text += fmt_double(st.t);
        for (double v : st.phis) text += ',' + fmt_double(v);
        text += ',' + fmt_double(closure.close(st.phis)) + ',' + fmt_double(posterior(st)) + '\n';
    };
    auto st = init_state(cfg.params, prior);
    row(st);
    std::size_t next_event = 0;
    for (long n = 1;; ++n) {
        double target = std::min(n * step, end);
        while (next_event < events.size() && events[next_event] <= target) {
            st = propagate(st, events[next_event] - st.t, model, prior);
            st = on_jump(st, cfg.params.mu, prior);
            row(st);
            ++next_event;
        }
        if (target > st.t) {
            st = propagate(st, target - st.t, model, prior);
            row(st);
        }
        if (target >= end) break;
    }
    fs::path out = csv_path.empty() ? fs::path(cfg.output_dir) / "filter.csv" : fs::path(csv_path);
    write_text(out, text);
    std::cout << out.string() << "\n";
    return 0;
}

auto cmd_smoothfit(const RunConfig& cfg, double h_fd_cells) -> int {
    Timer timer;
    auto s = obtain_grid(cfg);
    const auto& grid = s.grid;
    auto curve = extract_gamma(grid);
    const fs::path out(cfg.output_dir);
    double xi_e = curve.degenerate ? 0.0 : tangency_xi_e(a_curve(grid), grid.model());
    auto rep = smooth_fit_report(grid, curve, h_fd_cells * grid.h(), xi_e);
    std::string text = "x,gamma,gap_phi0,gap_phi1,classification\n";
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& r : rep.records) {
        text += fmt_double(r.x) + ',' + fmt_double(r.gamma) + ',' +
                (std::isnan(r.gap_phi0) ? "" : fmt_double(r.gap_phi0)) + ',' +
                (std::isnan(r.gap_phi1) ? "" : fmt_double(r.gap_phi1)) + ',' + fit_code(r.cls) + '\n';
        ++counts[static_cast<int>(r.cls)];
    }
    write_text(out / "smoothfit.csv", text);
    json j{{"xi", curve.xi},
           {"xi_e", xi_e},
           {"h", grid.h()},
           {"h_fd", rep.h_fd},
           {"gap_tol", rep.gap_tol},
           {"gap_margin", rep.gap_margin},
           {"r_min", std::isfinite(rep.r_min) ? json(rep.r_min) : json(nullptr)},
           {"insufficient_resolution", rep.insufficient_resolution},
           {"counts", {{"entrance", counts[0]}, {"exit", counts[1]}, {"undetermined", counts[2]}}},
           {"grid_hash", s.hash},
           {"manifest", manifest(cfg, "smoothfit", timer.seconds())}};
    emit(out / "smoothfit.json", j);
    return 0;
}

auto cmd_risk_curve(const RunConfig& cfg, int steps) -> int {
    if (steps < 1) throw Error("BAD_STEPS", "need at least one pi step");
    auto s = obtain_grid(cfg);
    std::string text = "pi,U\n";
    for (int k = 0; k < steps; ++k) {
        ModelParams p = cfg.params;
        p.pi = static_cast<double>(k) / steps;
        text += fmt_double(p.pi) + ',' + fmt_double(min_bayes_risk(p, s.grid.eval(initial_tilde(p)))) + '\n';
    }
    fs::path out = fs::path(cfg.output_dir) / "risk_curve.csv";
    write_text(out, text);
    std::cout << out.string() << "\n";
    return 0;
}

auto exit_status(const std::string& code) -> int {
    if (code == "MISSING_ARTIFACT" || code == "CACHE_MISMATCH") return 3;
    if (code == "BUDGET_EXCEEDED") return 4;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian quickest detection of a Poisson disorder with an uncertain post-change rate"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    Overrides o_solve, o_boundary, o_sim, o_filter, o_fit, o_risk;
    auto* solve_cmd = app.add_subcommand("solve", "value iteration on the grid; writes the grid cache");
    add_common(solve_cmd, o_solve);

    auto* boundary_cmd = app.add_subcommand("boundary", "extract the stopping boundary");
    add_common(boundary_cmd, o_boundary);
    std::string method = "grid";
    bool split = false;
    boundary_cmd->add_option("--method", method, "grid | c | d")->check(CLI::IsMember({"grid", "c", "d"}));
    boundary_cmd->add_flag("--split", split, "classify entrance/exit parts");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo Bayes risk of an alarm policy");
    add_common(sim_cmd, o_sim);
    std::string policy = "boundary";
    double p = 0.5, T = 0.0, t_cap = 1.0;
    bool sweep = false, sandwich = false, dynkin = false;
    std::string per_path;
    sim_cmd->add_option("--policy", policy, "boundary | threshold | fixed")
        ->check(CLI::IsMember({"boundary", "threshold", "fixed"}));
    sim_cmd->add_option("--p", p, "posterior threshold");
    sim_cmd->add_option("--T", T, "fixed alarm time");
    sim_cmd->add_flag("--sweep", sweep, "also run thresholds p = 0.05, ..., 0.95");
    sim_cmd->add_flag("--sandwich", sandwich, "check tau_C0 <= tau <= tau_D per path");
    sim_cmd->add_flag("--dynkin", dynkin, "reference-measure generator and exit-time checks");
    sim_cmd->add_option("--t-cap", t_cap, "time cap for the generator check");
    sim_cmd->add_option("--per-path-csv", per_path, "write theta, lambda_post, tau, loss per path");

    auto* filter_cmd = app.add_subcommand("filter", "run the odds filter over an event-time file");
    add_common(filter_cmd, o_filter);
    std::string events;
    double step = 0.1;
    std::optional<double> t_end;
    std::string filter_csv;
    filter_cmd->add_option("--events", events, "one event time per line")->required();
    filter_cmd->add_option("--step", step, "reporting step");
    filter_cmd->add_option("--t-end", t_end, "last reporting time (default: last event)");
    filter_cmd->add_option("--csv", filter_csv, "output path (default <out>/filter.csv)");

    auto* fit_cmd = app.add_subcommand("smoothfit", "derivative gaps along the boundary");
    add_common(fit_cmd, o_fit);
    double h_fd_cells = 1.0;
    fit_cmd->add_option("--h-fd", h_fd_cells, "finite-difference step in grid cells");

    auto* risk_cmd = app.add_subcommand("risk-curve", "minimal Bayes risk U(pi) on a pi grid");
    add_common(risk_cmd, o_risk);
    int pi_steps = 20;
    risk_cmd->add_option("--pi-steps", pi_steps, "number of pi values in [0, 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*solve_cmd) return cmd_solve(load_config(o_solve));
        if (*boundary_cmd) return cmd_boundary(load_config(o_boundary), method, split);
        if (*sim_cmd)
            return cmd_simulate(load_config(o_sim), policy, p, T, sweep, sandwich, dynkin, t_cap, per_path);
        if (*filter_cmd) return cmd_filter(load_config(o_filter), events, step, t_end, filter_csv);
        if (*fit_cmd) return cmd_smoothfit(load_config(o_fit), h_fd_cells);
        if (*risk_cmd) return cmd_risk_curve(load_config(o_risk), pi_steps);
    } catch (const Error& e) {
        std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return exit_status(e.code());
    } catch (const json::exception& e) {
        std::cerr << json{{"error", "BAD_CONFIG"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
    return 0;
}
