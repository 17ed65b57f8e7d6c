// Quickstart: closed-system concurrence at one drive shape, then a dissipative steady state.

#include <cstdio>

#include "lambqed/lambqed.hpp"

int main() {
    using namespace lambqed;

    SystemParams p;
    p.g = 0.05;
    p.theta = 0.65;
    p.n_max = 30;
    const auto space = build_space(p.n_max);

    EvolveOptions opts;
    opts.store_states = false;
    opts.metrics = Metric::parse_list({"C", "n_ph", "p_exc"});
    const auto times = uniform_grid(0.0, 300.0, 31);
    const auto tr = evolve(DensityMatrix::ground_state(space), p, times, Frame::effective, opts);

    std::printf("  t      C        n_ph     p_exc\n");
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::printf("%5.0f  %.5f  %.5f  %.5f\n", times[k], tr.observables.at("C")[k], tr.observables.at("n_ph")[k],
                    tr.observables.at("p_exc")[k]);
    }

    p.kappa = 0.05;
    p.gamma = 0.01;
    const auto ss = steady_state(p, space, SteadyMethod::null_space);
    std::printf("\nsteady state at kappa=%.2f gamma=%.2f: C=%.4f I=%.4f n_ph=%.4f (residual %.1e)\n", p.kappa, p.gamma,
                concurrence(ss.state), mutual_information(ss.state), observables(ss.state).n_ph, ss.residual);
}
