#pragma once

// Backward-in-time finite-difference solver for the robust harvesting
// value function
//   -Phi_t = -delta Phi + omega(t, eta(n)) / (h + Phi_n),
//   Phi(T, n) = S(n),  Phi(t, 0) = 0,
// with three update rules: explicit, semi-implicit (only the discount term
// implicit) and fully implicit (a scalar quadratic per node, no matrices).
// The optimal harvest rate is q = omega / (h + Phi_n)^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ayu/errors.hpp"
#include "ayu/growth.hpp"
#include "ayu/parallel.hpp"
#include "ayu/robust.hpp"

namespace ayu {

enum class Scheme { explicit_euler, semi_implicit, implicit_cascade };

inline const char* scheme_name(Scheme s) {
    switch (s) {
    case Scheme::explicit_euler: return "explicit";
    case Scheme::semi_implicit: return "semi_implicit";
    case Scheme::implicit_cascade: return "implicit";
    }
    return "?";
}

enum class TerminalForm { zero, step, table };

// Terminal reward S(n): non-decreasing with S(0) = 0.
struct TerminalReward {
    TerminalForm form = TerminalForm::zero;
    double amount = 0.0;    // step height
    double threshold = 0.0; // step location
    std::vector<std::pair<double, double>> table; // sorted (n, S) knots

    void validate(double n_max) const {
        switch (form) {
        case TerminalForm::zero:
            return;
        case TerminalForm::step:
            if (!std::isfinite(amount) || amount < 0.0)
                throw validation_error("terminal step amount must be >= 0");
            if (!std::isfinite(threshold) || threshold <= 0.0 || threshold > n_max)
                throw validation_error("terminal step threshold must lie in (0, n_max]");
            return;
        case TerminalForm::table: {
            if (table.size() < 2)
                throw validation_error("terminal table needs at least two knots");
            for (std::size_t k = 0; k < table.size(); ++k) {
                if (!std::isfinite(table[k].first) || !std::isfinite(table[k].second))
                    throw validation_error("terminal table entries must be finite");
                if (k > 0 && table[k].first <= table[k - 1].first)
                    throw validation_error("terminal table abscissae must be strictly increasing");
                if (k > 0 && table[k].second < table[k - 1].second)
                    throw validation_error("terminal reward must be non-decreasing");
            }
            if (table.front().first != 0.0 || table.front().second != 0.0)
                throw validation_error("terminal table must start at (0, 0)");
            return;
        }
        }
    }

    double at(double n) const {
        switch (form) {
        case TerminalForm::zero:
            return 0.0;
        case TerminalForm::step:
            return n >= threshold ? amount : 0.0;
        case TerminalForm::table: {
            if (n <= table.front().first) return table.front().second;
            if (n >= table.back().first) return table.back().second;
            std::size_t hi = 1;
            while (table[hi].first < n) ++hi;
            const auto& [x0, y0] = table[hi - 1];
            const auto& [x1, y1] = table[hi];
            return y0 + (n - x0) / (x1 - x0) * (y1 - y0);
        }
        }
        return 0.0;
    }

    // Largest terminal reward on [0, n_max] (S is non-decreasing).
    double s_bar(double n_max) const { return at(n_max); }
};

inline TerminalReward zero_terminal() { return TerminalReward{}; }

inline TerminalReward step_terminal(double amount, double threshold) {
    TerminalReward s;
    s.form = TerminalForm::step;
    s.amount = amount;
    s.threshold = threshold;
    return s;
}

// The full decision problem: growth/ambiguity model, economics and horizon.
struct HarvestProblem {
    UncertainLogisticModel model;
    UncertaintyAversion aversion;
    TerminalReward terminal;
    double t0 = 0.0;      // growth-clock day at decision time 0
    double horizon = 0.0; // decision horizon T, days
    double delta = 0.0;   // discount rate, 1/day
    double h = 0.0;       // harvesting-cost parameter
    double n_max = 1.0;   // population domain is [0, n_max]

    void validate() const {
        aversion.validate();
        terminal.validate(n_max);
        if (!std::isfinite(horizon) || horizon <= 0.0)
            throw validation_error("harvest problem: horizon must be positive");
        if (!std::isfinite(delta) || delta < 0.0)
            throw validation_error("harvest problem: delta must be >= 0");
        if (!std::isfinite(h) || h <= 0.0)
            throw validation_error("harvest problem: h must be positive");
        if (!std::isfinite(n_max) || n_max <= 0.0)
            throw validation_error("harvest problem: n_max must be positive");
        if (model.w0() > model.dist().w_hi)
            throw validation_error("harvest problem: initial weight above the maximum-weight "
                                   "support would break the omega <= w_hi bound");
    }

    double w_bar() const { return model.dist().w_hi; }
    // Hard cap on the harvest rate (control bound).
    double q_bound() const { return w_bar() / (h * h); }
};

struct SolverGrid {
    std::size_t i_t = 0; // time steps (rows 0..i_t)
    std::size_t i_n = 0; // population steps (columns 0..i_n)

    void validate() const {
        if (i_t < 2 || i_n < 2)
            throw validation_error("solver grid needs at least 2 steps per direction");
    }
    double dt(const HarvestProblem& p) const { return p.horizon / static_cast<double>(i_t); }
    double dn(const HarvestProblem& p) const { return p.n_max / static_cast<double>(i_n); }
};

// Stability headroom of the explicit scheme: 1 - (delta + W_bar/(h^2 dn)) dt.
// Negative means the explicit update can break monotonicity.
inline double cfl_margin(const HarvestProblem& p, const SolverGrid& g) {
    const double dt = g.dt(p);
    const double dn = g.dn(p);
    return 1.0 - (p.delta + p.w_bar() / (p.h * p.h * dn)) * dt;
}

// Weaker headroom sufficient for the semi-implicit scheme (the discount
// term no longer restricts the step).
inline double semi_implicit_margin(const HarvestProblem& p, const SolverGrid& g) {
    const double dt = g.dt(p);
    const double dn = g.dn(p);
    return 1.0 - p.w_bar() / (p.h * p.h * dn) * dt;
}

struct ValueGrid {
    Scheme scheme = Scheme::explicit_euler;
    std::size_t i_t = 0;
    std::size_t i_n = 0;
    double t_start = 0.0; // decision-clock origin (0)
    double dt = 0.0;
    double dn = 0.0;
    double n_max = 0.0;
    std::vector<double> values; // row-major (i_t+1) x (i_n+1)

    double at(std::size_t i, std::size_t j) const { return values[i * (i_n + 1) + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * (i_n + 1) + j]; }
    double time_at(std::size_t i) const { return dt * static_cast<double>(i); }
    double n_at(std::size_t j) const { return dn * static_cast<double>(j); }
    double max_value() const {
        double m = values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

struct PolicyGrid {
    std::size_t i_t = 0;
    std::size_t i_n = 0;
    double dt = 0.0;
    double dn = 0.0;
    double n_max = 0.0;
    std::vector<double> values; // harvest rate q_{i,j}, same layout as ValueGrid

    double at(std::size_t i, std::size_t j) const { return values[i * (i_n + 1) + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * (i_n + 1) + j]; }
};

namespace detail {

inline void check_row_finite(const std::vector<double>& row) {
    for (double v : row)
        if (!std::isfinite(v)) throw invariant_violation("non-finite value in sweep row");
}

} // namespace detail

// One explicit backward step: row at t_{i-1} from the row at t_i.
// omega_row must hold omega(t_{i-1}, eta(n_j)) for j = 0..i_n.
inline std::vector<double> explicit_step(const std::vector<double>& row_next,
                                         const HarvestProblem& p, const SolverGrid& g,
                                         const double* omega_row, bool force = false) {
    if (row_next.size() != g.i_n + 1)
        throw validation_error("explicit_step: row size does not match grid");
    if (!force && cfl_margin(p, g) < 0.0)
        throw validation_error("explicit scheme refused: CFL margin " +
                               std::to_string(cfl_margin(p, g)) +
                               " < 0 (use force or a finer time grid)");
    const double dt = g.dt(p);
    const double dn = g.dn(p);
    std::vector<double> out(g.i_n + 1);
    out[0] = 0.0;
    for (std::size_t j = 1; j <= g.i_n; ++j) {
        const double slope = (row_next[j] - row_next[j - 1]) / dn;
        out[j] = row_next[j] + dt * (-p.delta * row_next[j] + omega_row[j] / (p.h + slope));
    }
    return out;
}

// Semi-implicit backward step: only the discount term is treated implicitly.
inline std::vector<double> semi_implicit_step(const std::vector<double>& row_next,
                                              const HarvestProblem& p, const SolverGrid& g,
                                              const double* omega_row, bool force = false) {
    if (row_next.size() != g.i_n + 1)
        throw validation_error("semi_implicit_step: row size does not match grid");
    if (!force && semi_implicit_margin(p, g) < 0.0)
        throw validation_error("semi-implicit scheme refused: stability margin " +
                               std::to_string(semi_implicit_margin(p, g)) +
                               " < 0 (use force or a finer time grid)");
    const double dt = g.dt(p);
    const double dn = g.dn(p);
    const double denom = 1.0 + p.delta * dt;
    std::vector<double> out(g.i_n + 1);
    out[0] = 0.0;
    for (std::size_t j = 1; j <= g.i_n; ++j) {
        const double slope = (row_next[j] - row_next[j - 1]) / dn;
        out[j] = (row_next[j] + dt * (omega_row[j] / (p.h + slope))) / denom;
    }
    return out;
}

// Fully implicit node update. With x = Phi_{i-1,j} the discretized equation
// becomes C_A x^2 + C_B x - C_C = 0; we take the larger root. Expanding
// C_B^2 + 4 C_A C_C shows the discriminant equals a square plus
// 4 C_A omega dt dn >= 0, so the root is always real; that rearranged form
// is also what we evaluate (no cancellation).
inline double implicit_node_update(double phi_next, double phi_left, const HarvestProblem& p,
                                   const SolverGrid& g, double omega) {
    const double dt = g.dt(p);
    const double dn = g.dn(p);
    const double ca = 1.0 + p.delta * dt;
    const double gap = p.h * dn - phi_left;
    const double cb = ca * gap - phi_next;
    const double base = ca * gap + phi_next;
    const double disc = base * base + 4.0 * ca * omega * dt * dn;
    return (-cb + std::sqrt(disc)) / (2.0 * ca);
}

// Reference evaluation of the same discriminant straight from the
// quadratic's coefficients (kept for the algebraic-identity test).
inline double implicit_discriminant_direct(double phi_next, double phi_left,
                                           const HarvestProblem& p, const SolverGrid& g,
                                           double omega) {
    const double dt = g.dt(p);
    const double dn = g.dn(p);
    const double ca = 1.0 + p.delta * dt;
    const double gap = p.h * dn - phi_left;
    const double cb = ca * gap - phi_next;
    const double cc = omega * dt * dn + gap * phi_next;
    return cb * cb + 4.0 * ca * cc;
}

inline std::vector<double> implicit_step(const std::vector<double>& row_next,
                                         const HarvestProblem& p, const SolverGrid& g,
                                         const double* omega_row) {
    if (row_next.size() != g.i_n + 1)
        throw validation_error("implicit_step: row size does not match grid");
    std::vector<double> out(g.i_n + 1);
    out[0] = 0.0;
    double left = 0.0;
    for (std::size_t j = 1; j <= g.i_n; ++j) {
        left = implicit_node_update(row_next[j], left, p, g, omega_row[j]);
        out[j] = left;
    }
    return out;
}

struct SolveOptions {
    bool force = false;            // run the conditional schemes past their margins
    bool check_invariants = true;  // assert the proven properties every sweep
    unsigned threads = 0;          // 0 = library default
};

namespace detail {

// Proven-property checks for a freshly computed row. Tolerances absorb
// roundoff only; real violations exceed them by orders of magnitude.
struct InvariantChecker {
    double h_dn;           // h * dn, the slope well-posedness gap
    double bound;          // uniform upper bound for this scheme
    bool check_monotone;   // only when omega is non-decreasing in n
    double tol;

    InvariantChecker(const HarvestProblem& pr, Scheme s, const SolverGrid& g,
                     const OmegaLattice& om) {
        h_dn = pr.h * g.dn(pr);
        const double s_bar = pr.terminal.s_bar(pr.n_max);
        if (pr.delta > 0.0) {
            bound = s_bar + pr.w_bar() / (pr.h * pr.delta);
            if (s == Scheme::implicit_cascade)
                bound = s_bar + pr.w_bar() / (pr.delta * pr.h) * (1.0 + pr.delta * pr.horizon);
        } else {
            // delta = 0 variant derived from the same recursion
            bound = s_bar + pr.horizon * pr.w_bar() / pr.h;
        }
        check_monotone = om.nondecreasing_in_n;
        tol = 1e-9 * std::max(1.0, bound);
    }

    void row(const std::vector<double>& r, std::size_t i) const {
        if (r[0] != 0.0)
            throw invariant_violation("boundary value at (i=" + std::to_string(i) +
                                      ", j=0) is " + std::to_string(r[0]) + ", expected 0");
        for (std::size_t j = 0; j < r.size(); ++j) {
            const double v = r[j];
            if (!std::isfinite(v) || v < -tol)
                throw invariant_violation("negative/non-finite value " + std::to_string(v) +
                                          " at (i=" + std::to_string(i) + ", j=" +
                                          std::to_string(j) + ")");
            if (v > bound + tol)
                throw invariant_violation("value " + std::to_string(v) + " above bound " +
                                          std::to_string(bound) + " at (i=" + std::to_string(i) +
                                          ", j=" + std::to_string(j) + ")");
            if (check_monotone && j > 0 && r[j] < r[j - 1] - tol)
                throw invariant_violation("monotonicity broken at (i=" + std::to_string(i) +
                                          ", j=" + std::to_string(j) + "): " +
                                          std::to_string(r[j - 1]) + " > " + std::to_string(v));
            // Well-posedness of the one-sided quotient: h + slope > 0,
            // i.e. the left neighbor stays below the node value plus h*dn.
            if (j > 0 && r[j - 1] >= r[j] + h_dn)
                throw invariant_violation("slope well-posedness broken at (i=" +
                                          std::to_string(i) + ", j=" + std::to_string(j) + ")");
        }
    }
};

} // namespace detail

// Backward sweep over the whole grid with the chosen scheme.
inline std::pair<ValueGrid, PolicyGrid> solve(const HarvestProblem& p, const SolverGrid& g,
                                              Scheme scheme, const OmegaLattice& omega,
                                              const SolveOptions& opt = {}) {
    p.validate();
    g.validate();
    if (omega.i_t != g.i_t || omega.i_n != g.i_n)
        throw validation_error("omega lattice shape does not match solver grid");

    const double dt = g.dt(p);
    const double dn = g.dn(p);

    ValueGrid v;
    v.scheme = scheme;
    v.i_t = g.i_t;
    v.i_n = g.i_n;
    v.dt = dt;
    v.dn = dn;
    v.n_max = p.n_max;
    v.values.assign((g.i_t + 1) * (g.i_n + 1), 0.0);

    std::vector<double> row(g.i_n + 1);
    for (std::size_t j = 0; j <= g.i_n; ++j) row[j] = p.terminal.at(dn * static_cast<double>(j));
    if (row[0] != 0.0) throw validation_error("terminal reward must vanish at n = 0");
    std::copy(row.begin(), row.end(), v.values.begin() + g.i_t * (g.i_n + 1));

    detail::InvariantChecker chk(p, scheme, g, omega);
    if (opt.check_invariants) chk.row(row, g.i_t);

    for (std::size_t i = g.i_t; i >= 1; --i) {
        const double* om_row = omega.values.data() + (i - 1) * (g.i_n + 1);
        switch (scheme) {
        case Scheme::explicit_euler:
            row = explicit_step(row, p, g, om_row, opt.force);
            break;
        case Scheme::semi_implicit:
            row = semi_implicit_step(row, p, g, om_row, opt.force);
            break;
        case Scheme::implicit_cascade:
            row = implicit_step(row, p, g, om_row);
            break;
        }
        if (opt.check_invariants) chk.row(row, i - 1);
        std::copy(row.begin(), row.end(), v.values.begin() + (i - 1) * (g.i_n + 1));
    }

    PolicyGrid q;
    q.i_t = g.i_t;
    q.i_n = g.i_n;
    q.dt = dt;
    q.dn = dn;
    q.n_max = p.n_max;
    q.values.assign(v.values.size(), 0.0);
    const double cap = p.q_bound();
    parallel_chunks(
        g.i_t + 1,
        [&](unsigned, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double* om_row = omega.values.data() + i * (g.i_n + 1);
                for (std::size_t j = 1; j <= g.i_n; ++j) {
                    const double slope = (v.at(i, j) - v.at(i, j - 1)) / dn;
                    const double denom = p.h + slope;
                    double qq = om_row[j] / (denom * denom);
                    qq = std::clamp(qq, 0.0, cap);
                    q.at(i, j) = qq;
                }
            }
        },
        opt.threads);
    return {std::move(v), std::move(q)};
}

// Pairwise scheme differences with rolled-up summaries.
struct SchemeComparison {
    struct PairSummary {
        Scheme a, b;
        double max_abs = 0.0;
        double signed_mean = 0.0;
    };
    std::vector<PairSummary> pairs;
    double max_value = 0.0; // largest Phi over all three solutions
    ValueGrid explicit_grid, semi_grid, implicit_grid;
    PolicyGrid explicit_policy, semi_policy, implicit_policy;
};

inline SchemeComparison compare_schemes(const HarvestProblem& p, const SolverGrid& g,
                                        const OmegaLattice& omega, const SolveOptions& opt = {}) {
    SchemeComparison cmp;
    auto [ve, qe] = solve(p, g, Scheme::explicit_euler, omega, opt);
    auto [vs, qs] = solve(p, g, Scheme::semi_implicit, omega, opt);
    auto [vi, qi] = solve(p, g, Scheme::implicit_cascade, omega, opt);
    cmp.max_value = std::max({ve.max_value(), vs.max_value(), vi.max_value()});
    auto summarize = [&](const ValueGrid& a, const ValueGrid& b, Scheme sa, Scheme sb) {
        SchemeComparison::PairSummary s;
        s.a = sa;
        s.b = sb;
        double acc = 0.0;
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            const double d = a.values[k] - b.values[k];
            s.max_abs = std::max(s.max_abs, std::abs(d));
            acc += d;
        }
        s.signed_mean = acc / static_cast<double>(a.values.size());
        return s;
    };
    cmp.pairs.push_back(summarize(ve, vs, Scheme::explicit_euler, Scheme::semi_implicit));
    cmp.pairs.push_back(summarize(ve, vi, Scheme::explicit_euler, Scheme::implicit_cascade));
    cmp.pairs.push_back(summarize(vs, vi, Scheme::semi_implicit, Scheme::implicit_cascade));
    cmp.explicit_grid = std::move(ve);
    cmp.semi_grid = std::move(vs);
    cmp.implicit_grid = std::move(vi);
    cmp.explicit_policy = std::move(qe);
    cmp.semi_policy = std::move(qs);
    cmp.implicit_policy = std::move(qi);
    return cmp;
}

} // namespace ayu
