#include <doctest.h>

#include <cmath>

#include "ayu/calibration.hpp"
#include "ayu/growth.hpp"

using namespace ayu;

TEST_CASE("logistic curve basics") {
    // fixed point of the sigmoid
    CHECK(logistic_weight(0.0, 20.5, 83.2, 0.0272) == doctest::Approx(20.5).epsilon(1e-15));
    // independently computed value on the same curve
    CHECK(logistic_weight(90.0, 20.5, 83.2, 0.0272) ==
          doctest::Approx(65.798813855087957).epsilon(1e-13));
    // t -> inf saturates at w_max
    CHECK(logistic_weight(1e6, 20.5, 83.2, 0.0272) == doctest::Approx(83.2).epsilon(1e-12));
    // half-saturation time: w_max/w0 = 10 crosses w_max/2 at ln(9)/r
    const double t_half = 43.944491546724386; // ln 9 / 0.05
    CHECK(logistic_weight(t_half, 8.32, 83.2, 0.05) == doctest::Approx(41.6).epsilon(1e-12));

    LogisticParams p{8.32, 83.2, 0.05};
    CHECK(logistic_weight(t_half, p) == logistic_weight(t_half, 8.32, 83.2, 0.05));
    // growth speed vanishes at the carrying capacity
    CHECK(logistic_rhs(83.2, p) == doctest::Approx(0.0));
    CHECK(logistic_rhs(41.6, p) == doctest::Approx(0.05 * 41.6 * 0.5).epsilon(1e-15));

    CHECK_THROWS_AS(LogisticParams(0.0, 10.0, 0.1).validate(), validation_error);
    CHECK_THROWS_AS(LogisticParams(10.0, 10.0, 0.1).validate(), validation_error);
    CHECK_THROWS_AS(logistic_weight(std::nan(""), 1.0, 2.0, 0.1), validation_error);
}

TEST_CASE("max weight distribution density") {
    MaxWeightDistribution d;
    d.w_lo = 1.0;
    d.w_hi = 3.0;
    d.a = 1.0;
    d.b = 1.0;
    d.norm_c = 0.5; // uniform on (1,3)
    CHECK(d.kernel(2.0) == doctest::Approx(1.0));
    CHECK(d.density(2.0) == doctest::Approx(0.5));
    CHECK(d.density(0.5) == 0.0);
    CHECK(d.density(3.0) == 0.0); // density vanishes off the open support
}

TEST_CASE("quadrature nodes are cell midpoints and weights are a probability") {
    UncertainLogisticModel m(10.0, 0.05, 20.0, 120.0, 2.0, 3.0, 10);
    REQUIRE(m.quad_points() == 10);
    CHECK(m.node_spacing() == doctest::Approx(10.0));
    CHECK(m.nodes().front() == doctest::Approx(25.0));
    CHECK(m.nodes().back() == doctest::Approx(115.0));
    double sum = 0.0;
    for (double p : m.prob_weights()) {
        CHECK(p > 0.0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

    // flat shape parameters give equal weights
    UncertainLogisticModel u(10.0, 0.05, 20.0, 120.0, 1.0, 1.0, 8);
    for (double p : u.prob_weights()) CHECK(p == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("model statistics at a fixed day") {
    // 2023-season harvesting model used throughout the solver tests
    UncertainLogisticModel m(20.5, 0.079, 24.0, 123.0, 1.0, 2.5);
    const StatsSummary s = m.stats_at(90.0);
    CHECK(s.mean == doctest::Approx(52.201967106393916).epsilon(1e-12));
    CHECK(s.std == doctest::Approx(20.999573572302925).epsilon(1e-12));
    REQUIRE(s.skew_defined);
    CHECK(s.skew == doctest::Approx(0.7287365386513719).epsilon(1e-10));

    // the envelope brackets every realized curve
    const auto [wlo, whi] = m.envelope(90.0);
    CHECK(wlo == doctest::Approx(23.996653189738396).epsilon(1e-12));
    CHECK(whi == doctest::Approx(122.49965323369396).epsilon(1e-12));
    CHECK(wlo < s.mean);
    CHECK(s.mean < whi);

    // raw moments tie out with the summary
    CHECK(m.raw_moment(1, 90.0) == doctest::Approx(s.mean).epsilon(1e-14));
    const double m2 = m.raw_moment(2, 90.0);
    CHECK(std::sqrt(m2 - s.mean * s.mean) == doctest::Approx(s.std).epsilon(1e-12));

    // stats_with_rate at the model's own rate reproduces stats_at
    const StatsSummary sr = m.stats_with_rate(90.0, 0.079);
    CHECK(sr.mean == s.mean);
    CHECK(sr.std == s.std);
}

TEST_CASE("weights_at matches pointwise weight_at") {
    UncertainLogisticModel m(9.8, 0.075, 24.0, 187.0, 2.0, 8.25, 50);
    std::vector<double> w;
    m.weights_at(97.0, w);
    REQUIRE(w.size() == 50);
    for (std::size_t k = 0; k < w.size(); ++k)
        CHECK(w[k] == doctest::Approx(m.weight_at(97.0, m.nodes()[k])).epsilon(1e-14));
}

TEST_CASE("model construction rejects bad parameters") {
    CHECK_THROWS_AS(UncertainLogisticModel(0.0, 0.05, 20.0, 120.0, 1.0, 1.0), validation_error);
    CHECK_THROWS_AS(UncertainLogisticModel(10.0, 0.05, 120.0, 20.0, 1.0, 1.0), validation_error);
    CHECK_THROWS_AS(UncertainLogisticModel(10.0, 0.05, 20.0, 20.0, 1.0, 1.0), validation_error);
    CHECK_THROWS_AS(UncertainLogisticModel(10.0, 0.05, 20.0, 120.0, 0.0, 1.0), validation_error);
    CHECK_THROWS_AS(UncertainLogisticModel(10.0, 0.05, 20.0, 120.0, 1.0, -2.0), validation_error);
    CHECK_THROWS_AS(UncertainLogisticModel(10.0, 0.05, 20.0, 120.0, 1.0, 1.0, 1), validation_error);
}

TEST_CASE("empirical statistics, population convention") {
    CompetitionSample s;
    s.day = 90.0;
    s.weights = {1.0, 2.0, 3.0};
    const StatsSummary st = empirical_stats(s);
    CHECK(st.count == 3);
    CHECK(st.mean == doctest::Approx(2.0));
    CHECK(st.std == doctest::Approx(0.816496580927726).epsilon(1e-14));
    CHECK(st.median == doctest::Approx(2.0));
    CHECK(st.min == 1.0);
    CHECK(st.max == 3.0);
    REQUIRE(st.skew_defined);
    CHECK(st.skew == doctest::Approx(0.0));

    // even count: median averages the two middle order statistics
    s.weights = {4.0, 1.0, 3.0, 2.0};
    CHECK(empirical_stats(s).median == doctest::Approx(2.5));

    s.weights = {1.0};
    CHECK_THROWS_AS(empirical_stats(s), validation_error);
    s.weights = {1.0, -1.0};
    CHECK_THROWS_AS(empirical_stats(s), validation_error);
}

TEST_CASE("input records validate themselves") {
    WeightSeries w;
    w.observations = {{61.0, 52.6}, {71.0, 57.6}};
    CHECK_THROWS_AS(w.validate(), validation_error); // too short
    w.observations.push_back({71.0, 60.0});
    CHECK_THROWS_AS(w.validate(), validation_error); // day repeats
    w.observations.back() = {81.0, 62.2};
    CHECK_NOTHROW(w.validate());
}
