#pragma once

// Working with a solved harvest problem: pointwise optimal controls,
// backward-tracked population trajectories, worst-case weight distributions
// along a trajectory, and parameter sensitivity runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ayu/errors.hpp"
#include "ayu/hjb.hpp"
#include "ayu/robust.hpp"

namespace ayu {

// Harvest rate at an off-grid population level: interpolate the one-sided
// slope of the value function between bracketing nodes, recompute omega at
// the exact (t, n), and apply q = omega / (h + D)^2 with the control cap.
inline double optimal_control_at(const ValueGrid& v, const HarvestProblem& p, std::size_t t_index,
                                 double n) {
    if (n < 0.0 || n > p.n_max + 1e-12)
        throw validation_error("optimal_control_at: n outside [0, n_max]");
    if (t_index > v.i_t) throw validation_error("optimal_control_at: time index out of range");
    if (n <= 0.0) return 0.0;

    const double dn = v.dn;
    // One-sided slopes D_j live at j = 1..i_n; interpolate between them.
    auto slope_at = [&](std::size_t j) {
        return (v.at(t_index, j) - v.at(t_index, j - 1)) / dn;
    };
    double d;
    const double x = n / dn;
    if (x <= 1.0) {
        d = slope_at(1); // first cell: nearest defined slope
    } else if (x >= static_cast<double>(v.i_n)) {
        d = slope_at(v.i_n);
    } else {
        const std::size_t j = static_cast<std::size_t>(x);
        const double f = x - static_cast<double>(j);
        d = slope_at(j) * (1.0 - f) + slope_at(j + 1) * f;
    }
    const double w = entropic_bound(p.model, p.t0 + v.time_at(t_index), p.aversion.at(n));
    const double denom = p.h + d;
    return std::clamp(w / (denom * denom), 0.0, p.q_bound());
}

// Policy-grid lookup with linear interpolation in n (exact in t on the grid).
inline double policy_at(const PolicyGrid& q, std::size_t t_index, double n) {
    if (n <= 0.0) return 0.0;
    const double x = std::min(n / q.dn, static_cast<double>(q.i_n));
    std::size_t j = static_cast<std::size_t>(x);
    if (j >= q.i_n) j = q.i_n - 1;
    const double f = x - static_cast<double>(j);
    return q.at(t_index, j) * (1.0 - f) + q.at(t_index, j + 1) * f;
}

struct TrajectorySample {
    double t = 0.0;     // decision time, days
    double n = 0.0;     // population
    double q = 0.0;     // harvest rate applied at (t, n)
    double omega = 0.0; // worst-case mean weight at (t, n), grams
};

struct Trajectory {
    std::vector<TrajectorySample> samples; // forward order, i = 0..i_t
    double terminal_n = 0.0;
    bool left_domain = false; // backtracking clamped at n_max

    double initial_n() const { return samples.front().n; }
};

namespace detail {

inline void fill_omega_along(Trajectory& tr, const HarvestProblem& p) {
    for (auto& s : tr.samples)
        s.omega = entropic_bound(p.model, p.t0 + s.t, p.aversion.at(s.n));
}

} // namespace detail

// Reverse the population decay dN = -q dt from a chosen terminal level:
// N_{i-1} = N_i + dt q(t_i, N_i), clamping at n_max (flagged) and recording
// the interpolated policy actually used at each sample.
inline Trajectory backtrack_trajectory(const PolicyGrid& q, const HarvestProblem& p,
                                       double terminal_n) {
    if (!(terminal_n >= 0.0 && terminal_n <= p.n_max))
        throw validation_error("backtrack_trajectory: terminal_n outside [0, n_max]");
    const std::size_t i_t = q.i_t;
    const double dt = q.dt;
    Trajectory tr;
    tr.terminal_n = terminal_n;
    tr.samples.resize(i_t + 1);
    double n = terminal_n;
    tr.samples[i_t].t = dt * static_cast<double>(i_t);
    tr.samples[i_t].n = n;
    for (std::size_t i = i_t; i >= 1; --i) {
        n += dt * policy_at(q, i, n);
        if (n > p.n_max) {
            n = p.n_max;
            tr.left_domain = true;
        }
        tr.samples[i - 1].t = dt * static_cast<double>(i - 1);
        tr.samples[i - 1].n = n;
    }
    for (std::size_t i = 0; i <= i_t; ++i)
        tr.samples[i].q = policy_at(q, i, tr.samples[i].n);
    detail::fill_omega_along(tr, p);
    return tr;
}

// Forward Euler under the same interpolated policy, from a given start.
inline Trajectory forward_simulate(const PolicyGrid& q, const HarvestProblem& p, double start_n) {
    if (!(start_n >= 0.0 && start_n <= p.n_max))
        throw validation_error("forward_simulate: start_n outside [0, n_max]");
    const std::size_t i_t = q.i_t;
    const double dt = q.dt;
    Trajectory tr;
    tr.samples.resize(i_t + 1);
    double n = start_n;
    for (std::size_t i = 0; i < i_t; ++i) {
        const double rate = policy_at(q, i, n);
        tr.samples[i] = {dt * static_cast<double>(i), n, rate, 0.0};
        n = std::max(n - dt * rate, 0.0);
    }
    tr.samples[i_t] = {dt * static_cast<double>(i_t), n, policy_at(q, i_t, n), 0.0};
    tr.terminal_n = n;
    detail::fill_omega_along(tr, p);
    return tr;
}

struct PlateauReport {
    std::size_t first = 0; // sample index range [first, last]
    std::size_t last = 0;
    double mean_n = 0.0;
};

// Low-harvest plateau: q below 5% of the trajectory's median q for at
// least 5 consecutive samples. Returns the last such run found.
inline std::optional<PlateauReport> find_low_harvest_plateau(const Trajectory& tr,
                                                             double fraction = 0.05,
                                                             std::size_t min_run = 5) {
    std::vector<double> qs;
    qs.reserve(tr.samples.size());
    for (const auto& s : tr.samples) qs.push_back(s.q);
    std::vector<double> sorted = qs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median =
        m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    const double thr = fraction * median;
    std::optional<PlateauReport> found;
    std::size_t run = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (qs[i] < thr) {
            ++run;
            if (run >= min_run) {
                PlateauReport r;
                r.first = i + 1 - run;
                r.last = i;
                found = r;
            }
        } else {
            run = 0;
        }
    }
    if (found) {
        double acc = 0.0;
        for (std::size_t i = found->first; i <= found->last; ++i) acc += tr.samples[i].n;
        found->mean_n = acc / static_cast<double>(found->last - found->first + 1);
    }
    return found;
}

// Smallest q along the trajectory relative to its median (plateau-freeness
// indicator for reward-free runs).
inline double min_over_median_q(const Trajectory& tr) {
    std::vector<double> qs;
    qs.reserve(tr.samples.size());
    for (const auto& s : tr.samples) qs.push_back(s.q);
    std::vector<double> sorted = qs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median =
        m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    if (median <= 0.0) return 1.0;
    return sorted.front() / median;
}

// Worst-case maximum-weight distributions at requested decision times,
// evaluated along the trajectory (eta depends on the population there).
inline std::vector<DistortedDensity> distortion_along(const Trajectory& tr,
                                                      const HarvestProblem& p,
                                                      const std::vector<double>& times) {
    std::vector<DistortedDensity> out;
    out.reserve(times.size());
    const double dt = tr.samples.size() > 1 ? tr.samples[1].t - tr.samples[0].t : 1.0;
    for (double t : times) {
        if (t < 0.0 || t > tr.samples.back().t + 1e-9)
            throw validation_error("distortion_along: time outside the trajectory range");
        std::size_t i = static_cast<std::size_t>(std::llround(t / dt));
        i = std::min(i, tr.samples.size() - 1);
        const double n = tr.samples[i].n;
        out.push_back(worst_case_distortion(p.model, p.t0 + t, p.aversion.at(n)));
    }
    return out;
}

// One sensitivity variant: a full re-solve plus forward re-simulation from
// the nominal trajectory's starting point.
struct SensitivityEntry {
    std::string label;
    double value_max_abs_delta = 0.0; // max |Phi_variant - Phi_nominal|
    double value_signed_mean = 0.0;   // mean  (Phi_variant - Phi_nominal)
    double forward_end_n = 0.0;       // terminal population, variant policy
};

struct SensitivityReport {
    double nominal_forward_end_n = 0.0;
    double common_start_n = 0.0;
    std::vector<SensitivityEntry> entries;
};

// Compare variants against a nominal problem: solve each with the same
// scheme/grid, diff the value functions, and re-simulate forward from the
// population level the nominal policy would need at t = 0 to land on
// terminal_target.
inline SensitivityReport sensitivity_suite(const HarvestProblem& nominal, const SolverGrid& g,
                                           Scheme scheme,
                                           const std::vector<std::pair<std::string, HarvestProblem>>& variants,
                                           double terminal_target, const SolveOptions& opt = {}) {
    const OmegaLattice base_om = build_omega_lattice(
        nominal.model, nominal.aversion, nominal.t0, nominal.horizon, g.i_t, g.i_n, nominal.n_max,
        opt.threads);
    auto [v0, q0] = solve(nominal, g, scheme, base_om, opt);
    const Trajectory back = backtrack_trajectory(q0, nominal, terminal_target);

    SensitivityReport rep;
    rep.common_start_n = back.initial_n();
    rep.nominal_forward_end_n = forward_simulate(q0, nominal, rep.common_start_n).terminal_n;

    for (const auto& [label, var] : variants) {
        // omega depends only on the growth model and the aversion profile;
        // rebuild the lattice when either changed, else reuse the nominal one.
        const bool same_omega = var.aversion.form == nominal.aversion.form &&
                                var.aversion.mu == nominal.aversion.mu &&
                                var.aversion.n_max == nominal.aversion.n_max &&
                                var.aversion.table == nominal.aversion.table &&
                                var.t0 == nominal.t0 && var.horizon == nominal.horizon &&
                                var.n_max == nominal.n_max &&
                                var.model.w0() == nominal.model.w0() &&
                                var.model.r() == nominal.model.r() &&
                                var.model.dist().w_lo == nominal.model.dist().w_lo &&
                                var.model.dist().w_hi == nominal.model.dist().w_hi &&
                                var.model.dist().a == nominal.model.dist().a &&
                                var.model.dist().b == nominal.model.dist().b &&
                                var.model.quad_points() == nominal.model.quad_points();
        OmegaLattice var_om;
        if (!same_omega)
            var_om = build_omega_lattice(var.model, var.aversion, var.t0, var.horizon, g.i_t,
                                         g.i_n, var.n_max, opt.threads);
        const OmegaLattice& om = same_omega ? base_om : var_om;
        auto [v1, q1] = solve(var, g, scheme, om, opt);
        SensitivityEntry e;
        e.label = label;
        double acc = 0.0;
        for (std::size_t k = 0; k < v0.values.size(); ++k) {
            const double d = v1.values[k] - v0.values[k];
            e.value_max_abs_delta = std::max(e.value_max_abs_delta, std::abs(d));
            acc += d;
        }
        e.value_signed_mean = acc / static_cast<double>(v0.values.size());
        e.forward_end_n = forward_simulate(q1, var, rep.common_start_n).terminal_n;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

} // namespace ayu
