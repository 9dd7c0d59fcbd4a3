// Re-calibrate the uncertain growth model against one competition's weigh-in:
// rescan the exploration grid around a previously calibrated tuple and report
// the best moment match. Usage: calibrate_from_sample [weights.csv [day [w0]]]

#include <cstdio>
#include <cstdlib>

#include "ayu/calibration.hpp"
#include "ayu/io.hpp"

int main(int argc, char** argv) {
    const char* path = argc > 1 ? argv[1] : AYU_FIXTURE_DIR "/competition_2023.csv";
    const double day = argc > 2 ? std::atof(argv[2]) : 90.0;
    const double w0 = argc > 3 ? std::atof(argv[3]) : 20.5;

    try {
        const ayu::CompetitionSample sample = ayu::load_competition_sample(path, day);
        const ayu::StatsSummary target = ayu::empirical_stats(sample);
        std::printf("%zu fish weighed on day %g: mean %.1f g, std %.1f g, skew %.2f\n",
                    sample.weights.size(), day, target.mean, target.std, target.skew);

        // previously calibrated tuple for the 20.5 g release cohort; the +-4
        // rescan is cheap and absorbs season-to-season drift
        const ayu::GridIndex last_season{59, 24, 123, 4, 10};
        const ayu::CalibrationResult res =
            ayu::grid_search(w0, day, target, ayu::neighborhood(last_season, 4));

        std::printf("best of %llu candidates: r=%.3f, support (%ld, %ld) g, shapes (%.2f, %.2f)\n",
                    static_cast<unsigned long long>(res.evaluated), ayu::decode_r(res.index.i),
                    res.index.j, res.index.k, ayu::decode_a(res.index.l),
                    ayu::decode_b(res.index.m));
        std::printf("fitted stats at day %g: mean %.2f g, std %.2f g, skew %.2f\n", day,
                    res.fitted.mean, res.fitted.std, res.fitted.skew);
        std::printf("misfit Er = %s\n", ayu::format_double(res.er).c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
