#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ayu/errors.hpp"
#include "ayu/growth.hpp"
#include "ayu/nelder_mead.hpp"
#include "ayu/parallel.hpp"

namespace ayu {

// Historical averaged body weights, days counted from May 1.
struct WeightSeries {
    std::vector<std::pair<double, double>> observations;  // (day, avg weight g)

    void validate() const {
        if (observations.size() < 3)
            throw validation_error("weight series needs at least 3 observations, got " +
                                   std::to_string(observations.size()));
        for (std::size_t i = 0; i < observations.size(); ++i) {
            if (!(observations[i].second > 0.0))
                throw validation_error("weight series: nonpositive weight at row " + std::to_string(i));
            if (i > 0 && !(observations[i].first > observations[i - 1].first))
                throw validation_error("weight series: days not strictly increasing at row " +
                                       std::to_string(i));
        }
    }
};

// One competition's individual catches, all weighed on the same day.
struct CompetitionSample {
    double day = 0.0;             // growth-days since May 1
    std::vector<double> weights;  // grams, one fish each

    void validate() const {
        if (weights.size() < 2) throw validation_error("competition sample needs at least 2 weights");
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (!(weights[i] > 0.0))
                throw validation_error("competition sample: nonpositive weight at row " + std::to_string(i));
    }
};

// Population (biased) moments throughout: the model side uses the same
// convention, which keeps the comparison symmetric.
inline StatsSummary empirical_stats(const CompetitionSample& sample) {
    sample.validate();
    const std::size_t n = sample.weights.size();
    StatsSummary s;
    s.count = n;
    double sum = 0.0;
    for (double w : sample.weights) sum += w;
    s.mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (double w : sample.weights) {
        const double d = w - s.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    s.std = std::sqrt(m2);
    if (s.std > 0.0) {
        s.skew = m3 / (s.std * s.std * s.std);
        s.skew_defined = true;
    }
    std::vector<double> sorted = sample.weights;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return s;
}

// Squared-relative-error misfit between empirical and modeled mean/std.
inline double error_metric(const StatsSummary& target, const StatsSummary& fitted) {
    if (!(target.mean != 0.0) || !(target.std != 0.0))
        throw validation_error("error_metric: target mean and std must be nonzero");
    const double ea = (target.mean - fitted.mean) / target.mean;
    const double es = (target.std - fitted.std) / target.std;
    return ea * ea + es * es;
}

// ---------------------------------------------------------------------------
// Deterministic-curve least squares
// ---------------------------------------------------------------------------

struct FitResult {
    LogisticParams params;
    double residual = 0.0;  // sum of squared errors at the optimum
    bool converged = false;
};

struct fit_failure : validation_error {
    fit_failure(const std::string& msg, LogisticParams best_so_far, double residual_)
        : validation_error(msg), best(best_so_far), residual(residual_) {}
    LogisticParams best;
    double residual;
};

// Multi-start Nelder-Mead least squares in log-parameter space. Starts are the
// eight combinations of w0 in {first obs, half of it}, w_max in {1.1 max obs,
// 2 max obs}, r in {0.01, 0.05}; each run stops at simplex diameter < 1e-10
// relative, and the winner gets one polish run with a smaller initial step.
inline FitResult fit_logistic(const WeightSeries& series) {
    series.validate();
    double ymax = 0.0, ymin = std::numeric_limits<double>::infinity();
    for (const auto& [t, y] : series.observations) {
        ymax = std::max(ymax, y);
        ymin = std::min(ymin, y);
    }
    if (!((ymax - ymin) > 1e-12 * ymax)) throw validation_error("fit_logistic: no sigmoid signal (flat series)");

    auto ssr = [&](const std::vector<double>& logp) {
        const double w0 = std::exp(logp[0]), wmax = std::exp(logp[1]), r = std::exp(logp[2]);
        double acc = 0.0;
        for (const auto& [t, y] : series.observations) {
            const double d = logistic_weight(t, w0, wmax, r) - y;
            acc += d * d;
        }
        return acc;
    };

    const double y_first = series.observations.front().second;
    SimplexResult best;
    best.fx = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (double w0s : {y_first, 0.5 * y_first})
        for (double wms : {1.1 * ymax, 2.0 * ymax})
            for (double rs : {0.01, 0.05}) {
                std::vector<double> start = {std::log(w0s), std::log(wms), std::log(rs)};
                auto res = nelder_mead(ssr, start, {0.25, 0.25, 0.25});
                any_converged = any_converged || res.converged;
                if (res.fx < best.fx) best = res;
            }
    auto polish = nelder_mead(ssr, best.x, {0.01, 0.01, 0.01});
    if (polish.fx <= best.fx) {
        any_converged = any_converged || polish.converged;
        best = polish;
    }

    FitResult out;
    out.params = {std::exp(best.x[0]), std::exp(best.x[1]), std::exp(best.x[2])};
    out.residual = best.fx;
    out.converged = any_converged;
    if (!any_converged)
        throw fit_failure("fit_logistic: no start converged", out.params, out.residual);
    if (!(out.params.w0 < out.params.w_max))
        throw fit_failure("fit_logistic: degenerate optimum (w_max <= w0)", out.params, out.residual);
    return out;
}

// ---------------------------------------------------------------------------
// Moment-matching grid search
// ---------------------------------------------------------------------------

// Index tuple into the exploration grid; decodes to model parameters as
// r = 0.020 + 0.001 i (1/day), w_lo = j (g), w_hi = k (g), a = l/4, b = m/4.
struct GridIndex {
    long i = 0, j = 0, k = 0, l = 0, m = 0;

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
    // Lexicographic order; the grid-search tie-break.
    friend bool operator<(const GridIndex& x, const GridIndex& y) {
        if (x.i != y.i) return x.i < y.i;
        if (x.j != y.j) return x.j < y.j;
        if (x.k != y.k) return x.k < y.k;
        if (x.l != y.l) return x.l < y.l;
        return x.m < y.m;
    }
};

inline double decode_r(long i) { return 0.020 + 0.001 * static_cast<double>(i); }
inline double decode_a(long l) { return 0.25 * static_cast<double>(l); }
inline double decode_b(long m) { return 0.25 * static_cast<double>(m); }

struct IndexRange {
    long lo = 0, hi = 0;  // inclusive
    long span() const { return hi - lo + 1; }
};

// Rectangular search box. Candidates with k <= j decode to an empty support
// and are skipped during sweeps rather than excluded from the box, which keeps
// the linear index arithmetic trivial.
struct SearchGrid {
    IndexRange i{0, 40}, j{1, 50}, k{1, 300}, l{1, 40}, m{1, 40};

    // The published exploration box. Calibrated reference tuples for some
    // seasons fall outside it (r up to 0.079, b up to 10.25), so restrictions
    // may legitimately extend past these defaults.
    static SearchGrid published_box() { return SearchGrid{}; }

    void validate() const {
        auto chk = [](const IndexRange& r, long min_lo, const char* name) {
            if (r.lo > r.hi)
                throw validation_error(std::string("search grid: empty ") + name + " range");
            if (r.lo < min_lo)
                throw validation_error(std::string("search grid: ") + name + " range below " +
                                       std::to_string(min_lo));
        };
        chk(i, 0, "i");
        chk(j, 1, "j");
        chk(k, 1, "k");
        chk(l, 1, "l");
        chk(m, 1, "m");
    }

    std::uint64_t box_count() const {
        return static_cast<std::uint64_t>(i.span()) * j.span() * k.span() * l.span() * m.span();
    }

    bool contains(const GridIndex& g) const {
        return g.i >= i.lo && g.i <= i.hi && g.j >= j.lo && g.j <= j.hi && g.k >= k.lo &&
               g.k <= k.hi && g.l >= l.lo && g.l <= l.hi && g.m >= m.lo && g.m <= m.hi;
    }
};

// +/- radius box around a center tuple, clipped to structural validity only
// (i >= 0; j,k,l,m >= 1), not to the published box.
inline SearchGrid neighborhood(const GridIndex& c, long radius) {
    SearchGrid g;
    g.i = {std::max(0L, c.i - radius), c.i + radius};
    g.j = {std::max(1L, c.j - radius), c.j + radius};
    g.k = {std::max(1L, c.k - radius), c.k + radius};
    g.l = {std::max(1L, c.l - radius), c.l + radius};
    g.m = {std::max(1L, c.m - radius), c.m + radius};
    return g;
}

struct CandidateEvaluation {
    UncertainLogisticModel model;
    StatsSummary fitted;
    double er = 0.0;
};

// Decode and score one candidate; empty result = skipped (empty support).
inline std::optional<CandidateEvaluation> evaluate_candidate(const GridIndex& g, double w0,
                                                             double day,
                                                             const StatsSummary& target) {
    if (g.k <= g.j) return std::nullopt;
    UncertainLogisticModel model(w0, decode_r(g.i), static_cast<double>(g.j),
                                 static_cast<double>(g.k), decode_a(g.l), decode_b(g.m));
    StatsSummary fitted = model.stats_at(day);
    const double er = error_metric(target, fitted);
    return CandidateEvaluation{std::move(model), fitted, er};
}

struct CalibrationResult {
    GridIndex index;
    double er = 0.0;
    StatsSummary fitted;
    StatsSummary target;
    double w0 = 0.0;
    double day = 0.0;
    std::uint64_t evaluated = 0;  // candidates scored (skips excluded)

    UncertainLogisticModel rebuild_model() const {
        return UncertainLogisticModel(w0, decode_r(index.i), static_cast<double>(index.j),
                                      static_cast<double>(index.k), decode_a(index.l),
                                      decode_b(index.m));
    }
};

// Exhaustive scan of the box for the minimal error metric. Parallel map with
// an (er, index) min-reduction; the lexicographic tie-break makes the argmin a
// total order, so the result is identical for any worker count or chunking.
inline CalibrationResult grid_search(double w0, double day, const StatsSummary& target,
                                     const SearchGrid& grid, unsigned threads = 0) {
    grid.validate();
    if (!(target.mean != 0.0) || !(target.std != 0.0))
        throw validation_error("grid_search: target mean and std must be nonzero");

    const std::uint64_t total = grid.box_count();
    // Mixed-radix linear index with i fastest: consecutive candidates share the
    // (j,k,l,m) distribution, so one model serves a whole run of r values.
    const std::uint64_t ni = static_cast<std::uint64_t>(grid.i.span());
    const std::uint64_t nm = static_cast<std::uint64_t>(grid.m.span());
    const std::uint64_t nl = static_cast<std::uint64_t>(grid.l.span());
    const std::uint64_t nk = static_cast<std::uint64_t>(grid.k.span());

    struct Local {
        bool has = false;
        double er = 0.0;
        GridIndex idx;
        std::uint64_t evaluated = 0;
    };
    const unsigned nthreads = threads ? threads : worker_count();
    std::vector<Local> locals(std::max(1u, nthreads));

    parallel_chunks(
        total,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            Local loc;
            GridIndex cur{-1, -1, -1, -1, -1};
            std::optional<UncertainLogisticModel> model;
            for (std::uint64_t lin = begin; lin < end; ++lin) {
                std::uint64_t rest = lin;
                const long ii = grid.i.lo + static_cast<long>(rest % ni);
                rest /= ni;
                const long mm = grid.m.lo + static_cast<long>(rest % nm);
                rest /= nm;
                const long ll = grid.l.lo + static_cast<long>(rest % nl);
                rest /= nl;
                const long kk = grid.k.lo + static_cast<long>(rest % nk);
                rest /= nk;
                const long jj = grid.j.lo + static_cast<long>(rest);
                if (kk <= jj) continue;
                // The cached node weights depend only on (w0, j, k, l, m);
                // consecutive candidates vary r, so one model serves the run.
                if (!model || cur.j != jj || cur.k != kk || cur.l != ll || cur.m != mm)
                    model.emplace(w0, decode_r(ii), static_cast<double>(jj),
                                  static_cast<double>(kk), decode_a(ll), decode_b(mm));
                cur = GridIndex{ii, jj, kk, ll, mm};
                StatsSummary fitted = model->stats_with_rate(day, decode_r(ii));
                const double er = error_metric(target, fitted);
                ++loc.evaluated;
                if (!loc.has || er < loc.er || (er == loc.er && cur < loc.idx)) {
                    loc.has = true;
                    loc.er = er;
                    loc.idx = cur;
                }
            }
            locals[chunk] = loc;
        },
        nthreads);

    CalibrationResult out;
    bool has = false;
    for (const Local& loc : locals) {
        out.evaluated += loc.evaluated;
        if (!loc.has) continue;
        if (!has || loc.er < out.er || (loc.er == out.er && loc.idx < out.index)) {
            has = true;
            out.er = loc.er;
            out.index = loc.idx;
        }
    }
    if (!has) throw validation_error("grid_search: no valid candidate in the searched box");
    out.target = target;
    out.w0 = w0;
    out.day = day;
    auto eval = evaluate_candidate(out.index, w0, day, target);
    out.fitted = eval->fitted;
    out.er = eval->er;  // bit-identical recomputation through the same path
    return out;
}

}
