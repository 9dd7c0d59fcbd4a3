// Solve the robust harvesting problem at coarse resolution and print a season
// plan: the stocking level and harvest schedule that reach a target remaining
// population, with the worst-case mean body weight along the way.

#include <cstdio>

#include "ayu/hjb.hpp"
#include "ayu/policy.hpp"
#include "ayu/robust.hpp"

int main() {
    try {
        const ayu::UncertainLogisticModel model(20.5, 0.079, 24.0, 123.0, 1.0, 2.5);
        const ayu::HarvestProblem problem{model,
                                          ayu::linear_decreasing_aversion(0.1, 1.0),
                                          ayu::step_terminal(50.0, 0.5),
                                          61.0,
                                          120.0,
                                          0.04,
                                          100.0,
                                          1.0};
        const ayu::SolverGrid grid{4800, 100};

        const ayu::OmegaLattice omega =
            ayu::build_omega_lattice(problem.model, problem.aversion, problem.t0,
                                     problem.horizon, grid.i_t, grid.i_n, problem.n_max);
        const auto [value, policy] =
            ayu::solve(problem, grid, ayu::Scheme::implicit_cascade, omega);
        std::printf("value surface solved on a %zux%zu grid, peak %.2f\n", grid.i_t, grid.i_n,
                    value.max_value());

        const double target = 0.5; // leave half the stock for the next season
        const ayu::Trajectory plan = ayu::backtrack_trajectory(policy, problem, target);
        std::printf("to end the season at n = %.2f, stock n = %.3f on day %.0f\n", target,
                    plan.initial_n(), problem.t0);

        std::printf("%8s %10s %14s %18s\n", "day", "stock n", "harvest q", "worst E[w] (g)");
        const std::size_t stride = plan.samples.size() / 8;
        for (std::size_t i = 0; i < plan.samples.size(); i += stride) {
            const auto& s = plan.samples[i];
            std::printf("%8.0f %10.4f %14.6f %18.2f\n", problem.t0 + s.t, s.n, s.q, s.omega);
        }

        if (const auto plateau = ayu::find_low_harvest_plateau(plan))
            std::printf("harvest pauses from day %.0f on, holding n near %.3f\n",
                        problem.t0 + plan.samples[plateau->first].t, plateau->mean_n);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
