#pragma once

// Coarse reference solves shared by the solver and boundary tests. Each is
// computed once per process.

#include <vector>

#include <pdisorder/solver.hpp>

namespace fixtures {

using namespace pdisorder;

inline const ModelParams ref_l{1.0, 2.0, 1.0, 0.0, 0.2};
inline const ModelParams ref_s{0.15, 1.5, 0.7, 0.9, 0.0};

struct Sequence {
    std::vector<ValueGrid> grids;  // v_0 .. v_N
};

inline auto run(const ModelParams& p, const GridSpec& spec, double eps) -> Sequence {
    Sequence s;
    SolveOptions opt;
    opt.residual_probes = 0;
    opt.on_iterate = [&](const ValueGrid& g) { s.grids.push_back(g); };
    solve(Model(p), spec, eps, opt);
    return s;
}

// REF-L on the full box, 120 x 120, eps = 0.025 (N = 10).
inline auto large() -> const Sequence& {
    static const Sequence s = [] {
        Model m(ref_l);
        return run(ref_l, GridSpec::full(m, 120, 120), 0.025);
    }();
    return s;
}

// REF-S on the window [0, 0.6]^2, 128 x 128, eps = 0.1.
inline auto small() -> const Sequence& {
    static const Sequence s = [] {
        Model m(ref_s);
        return run(ref_s, GridSpec::window(m, 0.6, 128, 128), 0.1);
    }();
    return s;
}

}  // namespace fixtures
