#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace ayu {

struct SimplexResult {
    std::vector<double> x;
    double fx = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Plain Nelder-Mead downhill simplex. Stops when the simplex diameter shrinks
// below rel_tol relative to the best vertex (or after max_iter reflections).
// Deterministic: no randomness, ties resolved by stable ordering.
template <class F>
SimplexResult nelder_mead(F&& f, const std::vector<double>& start,
                          const std::vector<double>& step, double rel_tol = 1e-10,
                          std::size_t max_iter = 5000) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> vx(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) vx[i + 1][i] += step[i];
    std::vector<double> vf(n + 1);
    for (std::size_t v = 0; v <= n; ++v) vf[v] = f(vx[v]);

    std::vector<std::size_t> order(n + 1);
    auto sort_vertices = [&] {
        for (std::size_t v = 0; v <= n; ++v) order[v] = v;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t p, std::size_t q) { return vf[p] < vf[q]; });
    };
    auto diameter = [&]() {
        double scale = 1.0;
        for (double c : vx[order[0]]) scale = std::max(scale, std::abs(c));
        double d = 0.0;
        for (std::size_t v = 1; v <= n; ++v)
            for (std::size_t i = 0; i < n; ++i)
                d = std::max(d, std::abs(vx[order[v]][i] - vx[order[0]][i]));
        return d / scale;
    };

    SimplexResult res;
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
        sort_vertices();
        if (diameter() < rel_tol) {
            res.converged = true;
            break;
        }
        const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t v = 0; v <= n; ++v)
                if (v != worst) s += vx[v][i];
            centroid[i] = s / static_cast<double>(n);
        }
        for (std::size_t i = 0; i < n; ++i) xr[i] = centroid[i] + (centroid[i] - vx[worst][i]);
        const double fr = f(xr);
        if (fr < vf[best]) {
            for (std::size_t i = 0; i < n; ++i) xe[i] = centroid[i] + 2.0 * (centroid[i] - vx[worst][i]);
            const double fe = f(xe);
            if (fe < fr) {
                vx[worst] = xe;
                vf[worst] = fe;
            } else {
                vx[worst] = xr;
                vf[worst] = fr;
            }
        } else if (fr < vf[second_worst]) {
            vx[worst] = xr;
            vf[worst] = fr;
        } else {
            const bool outside = fr < vf[worst];
            const std::vector<double>& toward = outside ? xr : vx[worst];
            for (std::size_t i = 0; i < n; ++i) xc[i] = centroid[i] + 0.5 * (toward[i] - centroid[i]);
            const double fc = f(xc);
            if (fc < std::min(fr, vf[worst])) {
                vx[worst] = xc;
                vf[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t v = 0; v <= n; ++v) {
                    if (v == best) continue;
                    for (std::size_t i = 0; i < n; ++i)
                        vx[v][i] = vx[best][i] + 0.5 * (vx[v][i] - vx[best][i]);
                    vf[v] = f(vx[v]);
                }
            }
        }
    }
    sort_vertices();
    res.x = vx[order[0]];
    res.fx = vf[order[0]];
    return res;
}

}
