#pragma once

// Entropic worst-case machinery: ambiguity-averse lower bounds on the mean
// body weight, the minimizing likelihood ratio, and the (t, n) lattice of
// bounds consumed by the dynamic-programming solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ayu/errors.hpp"
#include "ayu/growth.hpp"
#include "ayu/parallel.hpp"

namespace ayu {

// Below this aversion level the bound collapses to the plain mean (the
// entropic functional's eta -> 0 limit), sidestepping 0/0.
inline constexpr double eta_epsilon = 1e-10;

// Largest |eta * W| admitted by the incremental-exponent lattice path;
// beyond it we fall back to shifted log-sum-exp node by node.
inline constexpr double max_exponent_magnitude = 300.0;

enum class AversionForm {
    constant,          // eta(n) = mu
    linear_decreasing, // eta(n) = mu * (1 - n / n_max)
    affine_increasing, // eta(n) = mu * (1 + n / n_max)
    custom_table,      // piecewise-linear interpolation of (n, eta) knots
};

struct UncertaintyAversion {
    AversionForm form = AversionForm::constant;
    double mu = 0.0;
    double n_max = 1.0;
    std::vector<std::pair<double, double>> table; // sorted (n, eta) knots

    void validate() const {
        if (!std::isfinite(mu) || mu < 0.0)
            throw validation_error("uncertainty aversion mu must be finite and >= 0");
        if (!std::isfinite(n_max) || n_max <= 0.0)
            throw validation_error("uncertainty aversion n_max must be positive");
        if (form == AversionForm::custom_table) {
            if (table.size() < 2)
                throw validation_error("aversion table needs at least two knots");
            for (std::size_t k = 0; k < table.size(); ++k) {
                if (!std::isfinite(table[k].first) || !std::isfinite(table[k].second))
                    throw validation_error("aversion table entries must be finite");
                if (table[k].second < 0.0)
                    throw validation_error("aversion table eta values must be >= 0");
                if (k > 0 && table[k].first <= table[k - 1].first)
                    throw validation_error("aversion table abscissae must be strictly increasing");
            }
        }
    }

    double at(double n) const {
        switch (form) {
        case AversionForm::constant:
            return mu;
        case AversionForm::linear_decreasing:
            return mu * (1.0 - n / n_max);
        case AversionForm::affine_increasing:
            return mu * (1.0 + n / n_max);
        case AversionForm::custom_table: {
            if (n <= table.front().first) return table.front().second;
            if (n >= table.back().first) return table.back().second;
            std::size_t hi = 1;
            while (table[hi].first < n) ++hi;
            const auto& [x0, y0] = table[hi - 1];
            const auto& [x1, y1] = table[hi];
            const double w = (n - x0) / (x1 - x0);
            return y0 + w * (y1 - y0);
        }
        }
        return mu;
    }
};

inline UncertaintyAversion constant_aversion(double mu) {
    UncertaintyAversion a;
    a.form = AversionForm::constant;
    a.mu = mu;
    a.validate();
    return a;
}

inline UncertaintyAversion linear_decreasing_aversion(double mu, double n_max) {
    UncertaintyAversion a;
    a.form = AversionForm::linear_decreasing;
    a.mu = mu;
    a.n_max = n_max;
    a.validate();
    return a;
}

inline UncertaintyAversion affine_increasing_aversion(double mu, double n_max) {
    UncertaintyAversion a;
    a.form = AversionForm::affine_increasing;
    a.mu = mu;
    a.n_max = n_max;
    a.validate();
    return a;
}

inline UncertaintyAversion table_aversion(std::vector<std::pair<double, double>> knots) {
    UncertaintyAversion a;
    a.form = AversionForm::custom_table;
    a.table = std::move(knots);
    a.validate();
    return a;
}

namespace detail {

// Shifted log-sum-exp of sum_k p_k * exp(x_k): returns m + log(sum p e^{x-m}).
inline double log_mean_exp(const std::vector<double>& x, const std::vector<double>& p) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += p[k] * std::exp(x[k] - m);
    return m + std::log(s);
}

} // namespace detail

// Worst-case (entropically penalized) expected body weight at growth time t:
//   omega = -(1/eta) * log E[exp(-eta W)].
// Decreasing in eta; equal to the plain mean at eta = 0.
inline double entropic_bound(const UncertainLogisticModel& model, double t, double eta) {
    if (!std::isfinite(eta) || eta < 0.0)
        throw validation_error("entropic bound requires eta >= 0");
    const std::size_t q = model.nodes().size();
    std::vector<double> w(q);
    model.weights_at(t, w);
    const std::vector<double>& p = model.prob_weights();
    if (eta < eta_epsilon) {
        double mean = 0.0;
        for (std::size_t k = 0; k < q; ++k) mean += w[k] * p[k];
        return mean;
    }
    std::vector<double> x(q);
    for (std::size_t k = 0; k < q; ++k) x[k] = -eta * w[k];
    return -detail::log_mean_exp(x, p) / eta;
}

// Penalized objective E[phi W] + (1/eta) E[phi log phi - phi + 1] for a
// candidate likelihood ratio phi given on the model's quadrature nodes.
// Minimized by the exponential tilt below; its minimum equals entropic_bound.
inline double variational_objective(const UncertainLogisticModel& model, double t, double eta,
                                    const std::vector<double>& phi) {
    const std::size_t q = model.nodes().size();
    if (phi.size() != q)
        throw validation_error("likelihood ratio must be sampled on the model's quadrature nodes");
    const std::vector<double>& p = model.prob_weights();
    double mass = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        if (!std::isfinite(phi[k]) || phi[k] < 0.0)
            throw validation_error("likelihood ratio values must be finite and >= 0");
        mass += phi[k] * p[k];
    }
    if (std::abs(mass - 1.0) > 1e-8)
        throw validation_error("likelihood ratio must integrate to 1 against the base density");
    std::vector<double> w(q);
    model.weights_at(t, w);
    double mean_term = 0.0;
    double entropy_term = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        mean_term += phi[k] * w[k] * p[k];
        if (phi[k] > 0.0)
            entropy_term += (phi[k] * std::log(phi[k]) - phi[k] + 1.0) * p[k];
        else
            entropy_term += p[k]; // phi log phi -> 0 as phi -> 0
    }
    if (eta < eta_epsilon) return mean_term;
    return mean_term + entropy_term / eta;
}

// The minimizing likelihood ratio phi*(w) = exp(-eta W) / E[exp(-eta W)]
// sampled on the quadrature nodes, plus the distorted density it induces.
struct DistortedDensity {
    double t = 0.0;
    double eta = 0.0;
    std::vector<double> nodes;  // quadrature abscissae (maximum body weights)
    std::vector<double> ratio;  // phi* at each node
    std::vector<double> base_p; // base node probabilities (sum to 1)
    double cell_width = 0.0;

    double distorted_mean() const {
        double m = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) m += nodes[k] * ratio[k] * base_p[k];
        return m;
    }

    // Distorted probability density per gram at node k.
    double density(std::size_t k) const { return ratio[k] * base_p[k] / cell_width; }
};

inline DistortedDensity worst_case_distortion(const UncertainLogisticModel& model, double t,
                                              double eta) {
    if (!std::isfinite(eta) || eta < 0.0)
        throw validation_error("worst-case distortion requires eta >= 0");
    const std::size_t q = model.nodes().size();
    DistortedDensity d;
    d.t = t;
    d.eta = eta;
    d.nodes = model.nodes();
    d.base_p = model.prob_weights();
    d.cell_width = model.node_spacing();
    d.ratio.assign(q, 1.0);
    if (eta < eta_epsilon) return d;
    std::vector<double> w(q);
    model.weights_at(t, w);
    double m = -eta * w[0];
    for (std::size_t k = 0; k < q; ++k) m = std::max(m, -eta * w[k]);
    double s = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        d.ratio[k] = std::exp(-eta * w[k] - m);
        s += d.ratio[k] * d.base_p[k];
    }
    for (std::size_t k = 0; k < q; ++k) d.ratio[k] /= s;
    return d;
}

// Precomputed omega(t_i, eta(n_j)) over a uniform solver lattice. Row-major:
// values[i * (i_n + 1) + j] for i in [0, i_t], j in [0, i_n].
struct OmegaLattice {
    std::size_t i_t = 0;
    std::size_t i_n = 0;
    double t0 = 0.0;
    double dt = 0.0;
    double n_max = 0.0;
    std::vector<double> values;
    double max_value = 0.0;
    bool nondecreasing_in_n = false; // true when every row grows (weakly) in j

    double at(std::size_t i, std::size_t j) const { return values[i * (i_n + 1) + j]; }
    double time_at(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double n_at(std::size_t j) const {
        return n_max * static_cast<double>(j) / static_cast<double>(i_n);
    }
};

namespace detail {

// One lattice row (fixed growth time). exp(-eta_j W_q) varies geometrically
// in j when eta is affine in n, so a single exp per node plus running
// products covers the whole row; otherwise each (j, q) pair pays its own exp.
inline void omega_row(const UncertainLogisticModel& model, const UncertaintyAversion& eta,
                      double t, std::size_t i_n, double n_max, double* out) {
    const std::size_t q = model.nodes().size();
    std::vector<double> w(q);
    model.weights_at(t, w);
    const std::vector<double>& p = model.prob_weights();

    const double dn = n_max / static_cast<double>(i_n);
    std::vector<double> etas(i_n + 1);
    for (std::size_t j = 0; j <= i_n; ++j) etas[j] = eta.at(dn * static_cast<double>(j));

    double mean = 0.0;
    for (std::size_t k = 0; k < q; ++k) mean += w[k] * p[k];

    bool all_equal = true;
    for (std::size_t j = 1; j <= i_n; ++j)
        if (etas[j] != etas[0]) { all_equal = false; break; }
    if (all_equal) {
        double v = mean;
        if (etas[0] >= eta_epsilon) {
            std::vector<double> x(q);
            for (std::size_t k = 0; k < q; ++k) x[k] = -etas[0] * w[k];
            v = -log_mean_exp(x, p) / etas[0];
        }
        for (std::size_t j = 0; j <= i_n; ++j) out[j] = v;
        return;
    }

    const bool affine = eta.form == AversionForm::linear_decreasing ||
                        eta.form == AversionForm::affine_increasing;
    double w_hi = w[0];
    for (double v : w) w_hi = std::max(w_hi, v);
    const double eta_hi = std::max(std::abs(etas[0]), std::abs(etas[i_n]));
    if (affine && eta_hi * w_hi <= max_exponent_magnitude) {
        // eta_j = mu * (1 -+ j / i_n): step the exponent by +-mu W / i_n.
        const double sign = eta.form == AversionForm::linear_decreasing ? 1.0 : -1.0;
        std::vector<double> cur(q), step(q);
        for (std::size_t k = 0; k < q; ++k) {
            cur[k] = std::exp(-etas[0] * w[k]);
            step[k] = std::exp(sign * eta.mu * w[k] / static_cast<double>(i_n));
        }
        for (std::size_t j = 0; j <= i_n; ++j) {
            if (j > 0)
                for (std::size_t k = 0; k < q; ++k) cur[k] *= step[k];
            if (etas[j] < eta_epsilon) {
                out[j] = mean;
                continue;
            }
            double s = 0.0;
            for (std::size_t k = 0; k < q; ++k) s += cur[k] * p[k];
            out[j] = -std::log(s) / etas[j];
        }
        return;
    }

    std::vector<double> x(q);
    for (std::size_t j = 0; j <= i_n; ++j) {
        if (etas[j] < eta_epsilon) {
            out[j] = mean;
            continue;
        }
        for (std::size_t k = 0; k < q; ++k) x[k] = -etas[j] * w[k];
        out[j] = -log_mean_exp(x, p) / etas[j];
    }
}

} // namespace detail

inline OmegaLattice build_omega_lattice(const UncertainLogisticModel& model,
                                        const UncertaintyAversion& eta, double t0, double horizon,
                                        std::size_t i_t, std::size_t i_n, double n_max,
                                        unsigned threads = 0) {
    eta.validate();
    if (i_t < 1 || i_n < 1)
        throw validation_error("omega lattice needs at least one step in each direction");
    if (!std::isfinite(horizon) || horizon <= 0.0)
        throw validation_error("omega lattice horizon must be positive");
    if (!std::isfinite(n_max) || n_max <= 0.0)
        throw validation_error("omega lattice n_max must be positive");

    OmegaLattice lat;
    lat.i_t = i_t;
    lat.i_n = i_n;
    lat.t0 = t0;
    lat.dt = horizon / static_cast<double>(i_t);
    lat.n_max = n_max;
    lat.values.assign((i_t + 1) * (i_n + 1), 0.0);

    parallel_chunks(
        i_t + 1,
        [&](unsigned, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                detail::omega_row(model, eta, t0 + lat.dt * static_cast<double>(i), i_n, n_max,
                                  lat.values.data() + i * (i_n + 1));
        },
        threads);

    lat.max_value = lat.values[0];
    for (double v : lat.values) lat.max_value = std::max(lat.max_value, v);
    lat.nondecreasing_in_n = true;
    for (std::size_t i = 0; i <= i_t && lat.nondecreasing_in_n; ++i)
        for (std::size_t j = 1; j <= i_n; ++j)
            if (lat.at(i, j) < lat.at(i, j - 1)) {
                lat.nondecreasing_in_n = false;
                break;
            }
    return lat;
}

} // namespace ayu
