#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ayu/errors.hpp"

namespace ayu {

// Deterministic logistic growth triple of W(t) = w_max / (1 + (w_max/w0 - 1) e^{-rt}).
struct LogisticParams {
    double w0 = 0.0;     // initial body weight, g
    double w_max = 0.0;  // maximum body weight, g
    double r = 0.0;      // growth rate, 1/day

    void validate() const {
        if (!(w0 > 0.0) || !(w_max > w0))
            throw validation_error("logistic params need 0 < w0 < w_max (got w0=" +
                                   std::to_string(w0) + ", w_max=" + std::to_string(w_max) + ")");
        if (!(r > 0.0)) throw validation_error("logistic params need r > 0");
    }
};

// Closed-form logistic growth curve. Defined for any w_max > 0: when
// w_max < w0 the curve decreases toward w_max instead (several calibrated
// supports dip below w0, so this is a legitimate regime, not an error).
inline double logistic_weight(double t, double w0, double w_max, double r) {
    if (!std::isfinite(t) || !std::isfinite(w0) || !std::isfinite(w_max) || !std::isfinite(r))
        throw validation_error("logistic_weight: non-finite input");
    return w_max / (1.0 + (w_max / w0 - 1.0) * std::exp(-r * t));
}

inline double logistic_weight(double t, const LogisticParams& p) {
    return logistic_weight(t, p.w0, p.w_max, p.r);
}

// Right-hand side of the logistic ODE dW/dt = r W (1 - W/w_max).
inline double logistic_rhs(double w, const LogisticParams& p) {
    return p.r * w * (1.0 - w / p.w_max);
}

// Summary statistics shared by empirical samples and model predictions.
// Model-side summaries fill mean/std/skew only (count stays 0).
struct StatsSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
    double skew = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;
    bool skew_defined = false;
    bool variance_clamped = false;  // set when raw_moment(2) - mean^2 < 0 numerically
};

// Beta law p(w) = C (w - w_lo)^{a-1} (w_hi - w)^{b-1} on (w_lo, w_hi).
// C is fixed by the same midpoint rule used for every other integral, so the
// density integrates to 1 on the lattice actually used (to round-off), which a
// Gamma-function constant would not guarantee for a,b < 1 kernels.
struct MaxWeightDistribution {
    double w_lo = 0.0, w_hi = 0.0;  // support bounds, g
    double a = 0.0, b = 0.0;        // shape parameters
    double norm_c = 0.0;            // normalization constant, 1/g

    // Canonical kernel evaluation: exp-log form so that batched and one-off
    // evaluations produce bit-identical values (pow() need not agree with it).
    double kernel(double w) const {
        return std::exp((a - 1.0) * std::log(w - w_lo) + (b - 1.0) * std::log(w_hi - w));
    }

    // Density value; zero outside the open support.
    double density(double w) const {
        if (!(w > w_lo) || !(w < w_hi)) return 0.0;
        return norm_c * kernel(w);
    }
};

// Logistic growth with beta-distributed maximum body weight, plus the
// midpoint-rule quadrature all moments and expectations run on.
class UncertainLogisticModel {
  public:
    UncertainLogisticModel(double w0, double r, double w_lo, double w_hi, double a, double b,
                           std::size_t quad_points = 1000)
        : w0_(w0), r_(r), quad_(quad_points) {
        if (!(w0 > 0.0)) throw validation_error("uncertain model: w0 must be > 0");
        if (!(r > 0.0)) throw validation_error("uncertain model: r must be > 0");
        if (!(w_lo > 0.0) || !(w_hi > w_lo))
            throw validation_error("uncertain model: need 0 < w_lo < w_hi (got w_lo=" +
                                   std::to_string(w_lo) + ", w_hi=" + std::to_string(w_hi) + ")");
        if (!(a > 0.0) || !(b > 0.0)) throw validation_error("uncertain model: shapes a,b must be > 0");
        if (quad_points < 2) throw validation_error("uncertain model: need at least 2 quadrature points");

        dist_.w_lo = w_lo;
        dist_.w_hi = w_hi;
        dist_.a = a;
        dist_.b = b;
        dist_.norm_c = 0.0;  // fixed below

        const double dw = (w_hi - w_lo) / static_cast<double>(quad_);
        nodes_.resize(quad_);
        pweights_.resize(quad_);
        ratio_.resize(quad_);
        double ksum = 0.0;
        for (std::size_t k = 0; k < quad_; ++k) {
            const double w = w_lo + (static_cast<double>(k) + 0.5) * dw;
            nodes_[k] = w;
            pweights_[k] = dist_.kernel(w);
            ksum += pweights_[k];
        }
        dist_.norm_c = 1.0 / (ksum * dw);
        for (std::size_t k = 0; k < quad_; ++k) pweights_[k] /= ksum;  // probability weights, sum = 1
        for (std::size_t k = 0; k < quad_; ++k) ratio_[k] = nodes_[k] / w0_ - 1.0;
    }

    double w0() const { return w0_; }
    double r() const { return r_; }
    const MaxWeightDistribution& dist() const { return dist_; }
    std::size_t quad_points() const { return quad_; }
    const std::vector<double>& nodes() const { return nodes_; }
    // Probability weight of each node (kernel / kernel-sum); adds up to 1.
    const std::vector<double>& prob_weights() const { return pweights_; }
    double node_spacing() const { return (dist_.w_hi - dist_.w_lo) / static_cast<double>(quad_); }

    // Growth curve realization for a given maximum weight.
    double weight_at(double t, double w_max) const { return logistic_weight(t, w0_, w_max, r_); }

    // Curve values at every quadrature node for one time; the single shared
    // exp(-rt) keeps this cheap enough for grid searches and lattice builds.
    void weights_at(double t, std::vector<double>& out) const {
        const double decay = std::exp(-r_ * t);
        out.resize(quad_);
        for (std::size_t k = 0; k < quad_; ++k)
            out[k] = nodes_[k] / (1.0 + ratio_[k] * decay);
    }

    // m-th raw moment of body weight at time t (midpoint rule).
    double raw_moment(int m, double t) const {
        if (m < 1) throw validation_error("raw_moment: m must be >= 1");
        const double decay = std::exp(-r_ * t);
        double acc = 0.0;
        for (std::size_t k = 0; k < quad_; ++k) {
            const double w = nodes_[k] / (1.0 + ratio_[k] * decay);
            double p = w;
            for (int e = 1; e < m; ++e) p *= w;
            acc += p * pweights_[k];
        }
        return acc;
    }

    // Mean, standard deviation and skewness of body weight at time t, from the
    // first three raw moments in one pass. This is the canonical evaluation the
    // calibration error metric is defined through.
    StatsSummary stats_at(double t) const { return stats_with_rate(t, r_); }

    // Same statistics under a different growth rate. The cached node weights
    // do not depend on r, so rate sweeps can reuse one model instance; the
    // arithmetic is bit-identical to stats_at on a model built with that rate.
    StatsSummary stats_with_rate(double t, double rate) const {
        const double decay = std::exp(-rate * t);
        double s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (std::size_t k = 0; k < quad_; ++k) {
            const double w = nodes_[k] / (1.0 + ratio_[k] * decay);
            const double pw = pweights_[k];
            const double w2 = w * w;
            s1 += w * pw;
            s2 += w2 * pw;
            s3 += w2 * w * pw;
        }
        StatsSummary s;
        s.mean = s1;
        double var = s2 - s1 * s1;
        if (var < 0.0) {
            var = 0.0;
            s.variance_clamped = true;
        }
        s.std = std::sqrt(var);
        if (s.std > 0.0) {
            s.skew = (s3 - 3.0 * s1 * var - s1 * s1 * s1) / (s.std * s.std * s.std);
            s.skew_defined = true;
        }
        return s;
    }

    // Theoretical minimum and maximum growth curves (support endpoints).
    std::pair<double, double> envelope(double t) const {
        return {weight_at(t, dist_.w_lo), weight_at(t, dist_.w_hi)};
    }

  private:
    double w0_, r_;
    std::size_t quad_;
    MaxWeightDistribution dist_;
    std::vector<double> nodes_;     // midpoint nodes in (w_lo, w_hi)
    std::vector<double> pweights_;  // probability weights, sum = 1
    std::vector<double> ratio_;     // nodes/w0 - 1, cached for curve evaluation
};

}
