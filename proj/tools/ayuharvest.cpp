// ayuharvest: calibrate uncertain logistic growth models from competition
// weigh-ins and solve the robust optimal-harvesting problem on a grid.
//
// Subcommands: fit-logistic, calibrate, solve, compare-schemes, trajectory,
// sensitivity. Exit codes: 0 success, 1 invalid input/configuration,
// 2 numerical invariant violation.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ayu/calibration.hpp"
#include "ayu/hjb.hpp"
#include "ayu/io.hpp"
#include "ayu/policy.hpp"
#include "ayu/robust.hpp"
#include "ayu/version.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ayu::Scheme parse_scheme(const std::string& s) {
    if (s == "explicit") return ayu::Scheme::explicit_euler;
    if (s == "semi") return ayu::Scheme::semi_implicit;
    if (s == "implicit") return ayu::Scheme::implicit_cascade;
    throw ayu::validation_error("unknown scheme '" + s + "' (want explicit|semi|implicit)");
}

// --restrict i0:i1,j0:j1,k0:k1,l0:l1,m0:m1
ayu::SearchGrid parse_restrict(const std::string& spec) {
    const auto parts = ayu::detail::split(spec, ',');
    if (parts.size() != 5)
        throw ayu::validation_error("--restrict wants 5 comma-separated lo:hi ranges");
    auto parse_range = [&](const std::string& p) {
        const std::size_t c = p.find(':');
        if (c == std::string::npos)
            throw ayu::validation_error("--restrict range '" + p + "' is not lo:hi");
        return ayu::IndexRange{std::stol(p.substr(0, c)), std::stol(p.substr(c + 1))};
    };
    ayu::SearchGrid g{parse_range(parts[0]), parse_range(parts[1]), parse_range(parts[2]),
                      parse_range(parts[3]), parse_range(parts[4])};
    g.validate();
    return g;
}

std::string stats_line(const ayu::StatsSummary& s) {
    return "mean=" + ayu::format_double(s.mean) + " std=" + ayu::format_double(s.std) +
           " skew=" + (s.skew_defined ? ayu::format_double(s.skew) : std::string("n/a"));
}

int cmd_fit_logistic(const std::string& input) {
    const ayu::WeightSeries series = ayu::load_weight_series(input);
    const ayu::FitResult fit = ayu::fit_logistic(series);
    std::printf("logistic fit of %zu observations\n", series.observations.size());
    std::printf("  w0    = %s g\n", ayu::format_double(fit.params.w0).c_str());
    std::printf("  w_max = %s g\n", ayu::format_double(fit.params.w_max).c_str());
    std::printf("  r     = %s 1/day\n", ayu::format_double(fit.params.r).c_str());
    std::printf("  sum squared residual = %s\n", ayu::format_double(fit.residual).c_str());
    return 0;
}

int cmd_calibrate(const std::string& competition, double day, double w0,
                  const std::string& restrict_spec, bool full, const std::string& out_dir) {
    const auto t_start = Clock::now();
    const ayu::CompetitionSample sample = ayu::load_competition_sample(competition, day);
    const ayu::StatsSummary target = ayu::empirical_stats(sample);
    ayu::SearchGrid box = ayu::SearchGrid::published_box();
    if (!restrict_spec.empty()) {
        if (full) throw ayu::validation_error("--restrict and --full are mutually exclusive");
        box = parse_restrict(restrict_spec);
    }
    const ayu::CalibrationResult res = ayu::grid_search(w0, day, target, box);

    std::printf("empirical target (day %s, %zu fish): %s\n", ayu::format_double(day).c_str(),
                sample.weights.size(), stats_line(target).c_str());
    std::printf("best index (i,j,k,l,m) = (%ld,%ld,%ld,%ld,%ld)\n", res.index.i, res.index.j,
                res.index.k, res.index.l, res.index.m);
    std::printf("decoded: r=%s  w_lo=%s  w_hi=%s  a=%s  b=%s\n",
                ayu::format_double(ayu::decode_r(res.index.i)).c_str(),
                ayu::format_double(static_cast<double>(res.index.j)).c_str(),
                ayu::format_double(static_cast<double>(res.index.k)).c_str(),
                ayu::format_double(ayu::decode_a(res.index.l)).c_str(),
                ayu::format_double(ayu::decode_b(res.index.m)).c_str());
    std::printf("model stats at day: %s\n", stats_line(res.fitted).c_str());
    std::printf("error metric Er = %s (sqrt = %s)\n", ayu::format_double(res.er).c_str(),
                ayu::format_double(std::sqrt(res.er)).c_str());
    std::printf("candidates evaluated: %zu\n", res.evaluated);

    if (!out_dir.empty()) {
        ayu::RunManifest man;
        man.command = "calibrate";
        man.config_echo = "";
        man.inputs.emplace_back(competition, ayu::digest_file(competition));
        std::string csv = "i,j,k,l,m,r,w_lo,w_hi,a,b,er,fitted_mean,fitted_std,fitted_skew\n";
        csv += std::to_string(res.index.i) + "," + std::to_string(res.index.j) + "," +
               std::to_string(res.index.k) + "," + std::to_string(res.index.l) + "," +
               std::to_string(res.index.m) + "," +
               ayu::format_double(ayu::decode_r(res.index.i)) + "," +
               ayu::format_double(static_cast<double>(res.index.j)) + "," +
               ayu::format_double(static_cast<double>(res.index.k)) + "," +
               ayu::format_double(ayu::decode_a(res.index.l)) + "," +
               ayu::format_double(ayu::decode_b(res.index.m)) + "," +
               ayu::format_double(res.er) + "," + ayu::format_double(res.fitted.mean) + "," +
               ayu::format_double(res.fitted.std) + "," + ayu::format_double(res.fitted.skew) +
               "\n";
        ayu::emit_output(out_dir, "calibration.csv", csv, man);
        man.wall_clock_s = seconds_since(t_start);
        man.threads = ayu::worker_count();
        ayu::finish_manifest(out_dir, man);
    }
    return 0;
}

int cmd_solve(const std::string& config, const std::string& scheme_name,
              const std::string& out_dir, bool force) {
    const auto t_start = Clock::now();
    const ayu::RunConfig cfg = ayu::parse_config(config);
    const ayu::HarvestProblem problem = cfg.make_problem();
    const ayu::SolverGrid grid = cfg.make_grid();
    const ayu::Scheme scheme = parse_scheme(scheme_name);

    const ayu::OmegaLattice omega =
        ayu::build_omega_lattice(problem.model, problem.aversion, problem.t0, problem.horizon,
                                 grid.i_t, grid.i_n, problem.n_max);
    if (scheme == ayu::Scheme::explicit_euler)
        std::printf("CFL margin: %s\n", ayu::format_double(ayu::cfl_margin(problem, grid)).c_str());
    ayu::SolveOptions opt;
    opt.force = force;
    auto [value, policy] = ayu::solve(problem, grid, scheme, omega, opt);

    ayu::RunManifest man;
    man.command = "solve";
    man.scheme = scheme_name;
    man.config_echo = cfg.echo();
    man.inputs.emplace_back(config, ayu::digest_file(config));
    ayu::emit_output(out_dir, "value.csv", ayu::grid_csv(value), man);
    ayu::emit_output(out_dir, "policy.csv", ayu::grid_csv(policy), man);
    man.wall_clock_s = seconds_since(t_start);
    man.threads = ayu::worker_count();
    ayu::finish_manifest(out_dir, man);
    std::printf("solved %zux%zu grid (%s scheme), max value %s\n", grid.i_t, grid.i_n,
                scheme_name.c_str(), ayu::format_double(value.max_value()).c_str());
    return 0;
}

int cmd_compare(const std::string& config, const std::string& out_dir, bool force) {
    const auto t_start = Clock::now();
    const ayu::RunConfig cfg = ayu::parse_config(config);
    const ayu::HarvestProblem problem = cfg.make_problem();
    const ayu::SolverGrid grid = cfg.make_grid();
    const ayu::OmegaLattice omega =
        ayu::build_omega_lattice(problem.model, problem.aversion, problem.t0, problem.horizon,
                                 grid.i_t, grid.i_n, problem.n_max);
    ayu::SolveOptions opt;
    opt.force = force;
    const ayu::SchemeComparison cmp = ayu::compare_schemes(problem, grid, omega, opt);

    std::string csv = "pair,max_abs,signed_mean\n";
    for (const auto& p : cmp.pairs) {
        const std::string label =
            std::string(ayu::scheme_name(p.a)) + "-" + ayu::scheme_name(p.b);
        csv += label + "," + ayu::format_double(p.max_abs) + "," +
               ayu::format_double(p.signed_mean) + "\n";
        std::printf("%s: max |diff| = %s, signed mean = %s\n", label.c_str(),
                    ayu::format_double(p.max_abs).c_str(),
                    ayu::format_double(p.signed_mean).c_str());
    }
    ayu::RunManifest man;
    man.command = "compare-schemes";
    man.config_echo = cfg.echo();
    man.inputs.emplace_back(config, ayu::digest_file(config));
    ayu::emit_output(out_dir, "compare.csv", csv, man);
    man.wall_clock_s = seconds_since(t_start);
    man.threads = ayu::worker_count();
    ayu::finish_manifest(out_dir, man);
    return 0;
}

int cmd_trajectory(const std::string& config, const std::string& scheme_name,
                   const std::vector<double>& terminals, const std::vector<double>& distort_at,
                   const std::string& out_dir, bool force) {
    const auto t_start = Clock::now();
    const ayu::RunConfig cfg = ayu::parse_config(config);
    const ayu::HarvestProblem problem = cfg.make_problem();
    const ayu::SolverGrid grid = cfg.make_grid();
    const ayu::Scheme scheme = parse_scheme(scheme_name);
    const ayu::OmegaLattice omega =
        ayu::build_omega_lattice(problem.model, problem.aversion, problem.t0, problem.horizon,
                                 grid.i_t, grid.i_n, problem.n_max);
    ayu::SolveOptions opt;
    opt.force = force;
    auto [value, policy] = ayu::solve(problem, grid, scheme, omega, opt);

    ayu::RunManifest man;
    man.command = "trajectory";
    man.scheme = scheme_name;
    man.config_echo = cfg.echo();
    man.inputs.emplace_back(config, ayu::digest_file(config));

    std::vector<double> terms = terminals;
    if (terms.empty())
        for (int k = 1; k <= 9; ++k) terms.push_back(0.1 * k); // default fan
    int idx = 0;
    for (double tn : terms) {
        const ayu::Trajectory tr = ayu::backtrack_trajectory(policy, problem, tn);
        const std::string name = "trajectory_" + std::to_string(idx) + ".csv";
        ayu::emit_output(out_dir, name, ayu::trajectory_csv(tr), man);
        std::printf("terminal n=%s: starts at n=%s%s\n", ayu::format_double(tn).c_str(),
                    ayu::format_double(tr.initial_n()).c_str(),
                    tr.left_domain ? " (left domain, clamped at n_max)" : "");
        if (!distort_at.empty()) {
            const auto ds = ayu::distortion_along(tr, problem, distort_at);
            ayu::emit_output(out_dir, "distortion_" + std::to_string(idx) + ".csv",
                             ayu::density_csv(ds), man);
        }
        ++idx;
    }
    man.wall_clock_s = seconds_since(t_start);
    man.threads = ayu::worker_count();
    ayu::finish_manifest(out_dir, man);
    return 0;
}

int cmd_sensitivity(const std::string& config, const std::string& variants_path,
                    const std::string& scheme_name, double terminal_target,
                    const std::string& out_dir, bool force) {
    const auto t_start = Clock::now();
    const ayu::RunConfig cfg = ayu::parse_config(config);
    const ayu::HarvestProblem nominal = cfg.make_problem();
    const ayu::SolverGrid grid = cfg.make_grid();

    // Variants file: one `label: key=value key=value ...` per line, each
    // overriding the base config.
    std::vector<std::pair<std::string, ayu::HarvestProblem>> variants;
    std::istringstream in(ayu::read_file(variants_path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string s = ayu::detail::trim(line);
        if (s.empty()) continue;
        const std::size_t colon = s.find(':');
        if (colon == std::string::npos)
            throw ayu::validation_error(variants_path + ":" + std::to_string(lineno) +
                                        ": expected 'label: key=value ...'");
        const std::string label = ayu::detail::trim(std::string_view(s).substr(0, colon));
        std::string text = cfg.echo();
        std::istringstream overrides(s.substr(colon + 1));
        std::string tok;
        std::map<std::string, std::string> override_map;
        while (overrides >> tok) {
            const std::size_t eq = tok.find('=');
            if (eq == std::string::npos)
                throw ayu::validation_error(variants_path + ":" + std::to_string(lineno) +
                                            ": override '" + tok + "' is not key=value");
            override_map[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        // rebuild the config text with overrides applied
        std::string merged;
        for (const auto& e : cfg.entries) {
            auto it = override_map.find(e.key);
            if (it != override_map.end()) {
                merged += e.key + " = " + it->second + "\n";
                override_map.erase(it);
            } else {
                merged += e.key + " = " + e.value + "\n";
            }
        }
        for (const auto& [k, v] : override_map) merged += k + " = " + v + "\n";
        const ayu::RunConfig vcfg =
            ayu::parse_config_text(merged, variants_path + ":" + label);
        variants.emplace_back(label, vcfg.make_problem());
    }

    ayu::SolveOptions opt;
    opt.force = force;
    const ayu::SensitivityReport rep = ayu::sensitivity_suite(
        nominal, grid, parse_scheme(scheme_name), variants, terminal_target, opt);

    std::string csv = "label,value_max_abs_delta,value_signed_mean,forward_end_n\n";
    csv += "nominal,0,0," + ayu::format_double(rep.nominal_forward_end_n) + "\n";
    std::printf("common start n = %s; nominal forward end n = %s\n",
                ayu::format_double(rep.common_start_n).c_str(),
                ayu::format_double(rep.nominal_forward_end_n).c_str());
    for (const auto& e : rep.entries) {
        csv += e.label + "," + ayu::format_double(e.value_max_abs_delta) + "," +
               ayu::format_double(e.value_signed_mean) + "," +
               ayu::format_double(e.forward_end_n) + "\n";
        std::printf("%s: max |dPhi| = %s, mean dPhi = %s, forward end n = %s\n", e.label.c_str(),
                    ayu::format_double(e.value_max_abs_delta).c_str(),
                    ayu::format_double(e.value_signed_mean).c_str(),
                    ayu::format_double(e.forward_end_n).c_str());
    }
    ayu::RunManifest man;
    man.command = "sensitivity";
    man.scheme = scheme_name;
    man.config_echo = cfg.echo();
    man.inputs.emplace_back(config, ayu::digest_file(config));
    man.inputs.emplace_back(variants_path, ayu::digest_file(variants_path));
    ayu::emit_output(out_dir, "sensitivity.csv", csv, man);
    man.wall_clock_s = seconds_since(t_start);
    man.threads = ayu::worker_count();
    ayu::finish_manifest(out_dir, man);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"uncertain fish growth calibration and robust harvesting solver"};
    app.set_version_flag("--version", std::string("ayuharvest ") + ayu::version);
    app.require_subcommand(1);

    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware default)");

    // fit-logistic
    auto* fit = app.add_subcommand("fit-logistic", "least-squares logistic fit of a weight series");
    std::string fit_input;
    fit->add_option("--input", fit_input, "CSV with header day,avg_weight_g")->required();

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "grid-search moment matching of the uncertain model");
    std::string cal_comp, cal_restrict, cal_out;
    double cal_day = 0.0, cal_w0 = 0.0;
    bool cal_full = false;
    cal->add_option("--competition", cal_comp, "CSV with header weight_g")->required();
    cal->add_option("--day", cal_day, "weigh-in day (days since May 1)")->required();
    cal->add_option("--w0", cal_w0, "release weight, g")->required();
    cal->add_option("--restrict", cal_restrict, "i0:i1,j0:j1,k0:k1,l0:l1,m0:m1 search box");
    cal->add_flag("--full", cal_full, "search the full published box (default)");
    cal->add_option("--out", cal_out, "output directory for calibration.csv + manifest");

    // solve
    auto* sol = app.add_subcommand("solve", "backward HJB sweep, one scheme");
    std::string sol_cfg, sol_scheme, sol_out;
    bool sol_force = false;
    sol->add_option("--config", sol_cfg, "run configuration file")->required();
    sol->add_option("--scheme", sol_scheme, "explicit|semi|implicit")->required();
    sol->add_option("--out", sol_out, "output directory")->required();
    sol->add_flag("--force", sol_force, "run conditional schemes past their stability margins");

    // compare-schemes
    auto* cmp = app.add_subcommand("compare-schemes", "run all three schemes and diff them");
    std::string cmp_cfg, cmp_out;
    bool cmp_force = false;
    cmp->add_option("--config", cmp_cfg, "run configuration file")->required();
    cmp->add_option("--out", cmp_out, "output directory")->required();
    cmp->add_flag("--force", cmp_force, "run conditional schemes past their stability margins");

    // trajectory
    auto* trj = app.add_subcommand("trajectory", "backtrack harvest trajectories from terminal values");
    std::string trj_cfg, trj_scheme = "implicit", trj_out;
    std::vector<double> trj_terms, trj_distort;
    bool trj_force = false;
    trj->add_option("--config", trj_cfg, "run configuration file")->required();
    trj->add_option("--scheme", trj_scheme, "explicit|semi|implicit (default implicit)");
    trj->add_option("--terminal", trj_terms, "terminal population targets (default fan 0.1..0.9)");
    trj->add_option("--distort-at", trj_distort, "decision-clock days for distorted densities");
    trj->add_option("--out", trj_out, "output directory")->required();
    trj->add_flag("--force", trj_force, "run conditional schemes past their stability margins");

    // sensitivity
    auto* sen = app.add_subcommand("sensitivity", "re-solve under parameter variants and compare");
    std::string sen_cfg, sen_var, sen_scheme = "implicit", sen_out;
    double sen_term = 0.5;
    bool sen_force = false;
    sen->add_option("--config", sen_cfg, "run configuration file")->required();
    sen->add_option("--variants", sen_var, "variants file: label: key=value ...")->required();
    sen->add_option("--scheme", sen_scheme, "explicit|semi|implicit (default implicit)");
    sen->add_option("--terminal", sen_term, "terminal target for the common start (default 0.5)");
    sen->add_option("--out", sen_out, "output directory")->required();
    sen->add_flag("--force", sen_force, "run conditional schemes past their stability margins");

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) ayu::worker_count() = threads;
        if (*fit) return cmd_fit_logistic(fit_input);
        if (*cal) return cmd_calibrate(cal_comp, cal_day, cal_w0, cal_restrict, cal_full, cal_out);
        if (*sol) return cmd_solve(sol_cfg, sol_scheme, sol_out, sol_force);
        if (*cmp) return cmd_compare(cmp_cfg, cmp_out, cmp_force);
        if (*trj)
            return cmd_trajectory(trj_cfg, trj_scheme, trj_terms, trj_distort, trj_out, trj_force);
        if (*sen)
            return cmd_sensitivity(sen_cfg, sen_var, sen_scheme, sen_term, sen_out, sen_force);
    } catch (const ayu::invariant_violation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 2;
    } catch (const ayu::validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
