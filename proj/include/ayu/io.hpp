#pragma once

// File plumbing: strict key=value run configuration, CSV ingestion of weight
// data, bit-exact CSV emission of grids/trajectories/densities, FNV-1a
// digests and the per-run manifest. All numeric output uses 17 significant
// digits so doubles round-trip exactly.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ayu/calibration.hpp"
#include "ayu/errors.hpp"
#include "ayu/hjb.hpp"
#include "ayu/policy.hpp"
#include "ayu/robust.hpp"
#include "ayu/version.hpp"

namespace ayu {

// ---------------------------------------------------------------- printing

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ----------------------------------------------------------------- digests

inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a_hex(std::string_view bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a:%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string digest_file(const std::string& path) { return fnv1a_hex(read_file(path)); }

// ------------------------------------------------------------ config parse

struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct RunConfig {
    // growth model
    double w0 = 0.0, r = 0.0, w_lo = 0.0, w_hi = 0.0, a = 0.0, b = 0.0;
    std::size_t quad_points = 1000;
    // ambiguity aversion
    AversionForm eta_form = AversionForm::linear_decreasing;
    double mu = 0.0;
    std::vector<std::pair<double, double>> eta_table;
    // economics / horizon
    double t0 = 0.0;
    double horizon = 0.0;
    double delta = 0.0;
    double h = 0.0;
    double n_max = 1.0;
    TerminalReward terminal; // default: zero
    // discretization
    std::size_t i_t = 0, i_n = 0;

    std::vector<ConfigEntry> entries; // raw lines for the manifest echo

    UncertainLogisticModel make_model() const {
        return UncertainLogisticModel(w0, r, w_lo, w_hi, a, b, quad_points);
    }
    UncertaintyAversion make_aversion() const {
        UncertaintyAversion av;
        av.form = eta_form;
        av.mu = mu;
        av.n_max = n_max;
        av.table = eta_table;
        av.validate();
        return av;
    }
    HarvestProblem make_problem() const {
        HarvestProblem p{make_model(), make_aversion(), terminal, t0, horizon, delta, h, n_max};
        p.validate();
        return p;
    }
    SolverGrid make_grid() const {
        SolverGrid g{i_t, i_n};
        g.validate();
        return g;
    }

    std::map<std::string, std::string> flat() const {
        std::map<std::string, std::string> m;
        for (const auto& e : entries) m[e.key] = e.value;
        return m;
    }
    std::string echo() const {
        std::string out;
        for (const auto& e : entries) {
            out += e.key;
            out += " = ";
            out += e.value;
            out += '\n';
        }
        return out;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline double parse_number(const std::string& tok, const std::string& where) {
    const char* s = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw validation_error(where + ": unparsable numeric value '" + tok + "'");
    return v;
}

inline std::size_t parse_count(const std::string& tok, const std::string& where) {
    const char* s = tok.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || tok.find('-') != std::string::npos)
        throw validation_error(where + ": unparsable integer value '" + tok + "'");
    return static_cast<std::size_t>(v);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t b = 0;
    while (true) {
        const std::size_t e = s.find(sep, b);
        if (e == std::string::npos) {
            out.push_back(trim(std::string_view(s).substr(b)));
            break;
        }
        out.push_back(trim(std::string_view(s).substr(b, e - b)));
        b = e + 1;
    }
    return out;
}

// "n:v,n:v,..." pair lists used by table-style config values
inline std::vector<std::pair<double, double>> parse_pairs(const std::string& tok,
                                                          const std::string& where) {
    std::vector<std::pair<double, double>> out;
    for (const std::string& item : split(tok, ',')) {
        const std::size_t c = item.find(':');
        if (c == std::string::npos)
            throw validation_error(where + ": expected n:value pair, got '" + item + "'");
        out.emplace_back(parse_number(trim(std::string_view(item).substr(0, c)), where),
                         parse_number(trim(std::string_view(item).substr(c + 1)), where));
    }
    return out;
}

inline TerminalReward parse_terminal(const std::string& val, const std::string& where) {
    std::istringstream ss(val);
    std::string kind;
    ss >> kind;
    if (kind == "zero") {
        std::string rest;
        if (ss >> rest) throw validation_error(where + ": 'zero' takes no arguments");
        return zero_terminal();
    }
    if (kind == "step") {
        std::string amt, thr, rest;
        if (!(ss >> amt >> thr) || (ss >> rest))
            throw validation_error(where + ": expected 'step AMOUNT THRESHOLD'");
        return step_terminal(parse_number(amt, where), parse_number(thr, where));
    }
    if (kind == "table") {
        std::string spec, rest;
        if (!(ss >> spec) || (ss >> rest))
            throw validation_error(where + ": expected 'table n:S,n:S,...'");
        TerminalReward t;
        t.form = TerminalForm::table;
        t.table = parse_pairs(spec, where);
        return t;
    }
    throw validation_error(where + ": unknown terminal form '" + kind + "'");
}

inline AversionForm parse_eta_form(const std::string& val, const std::string& where) {
    if (val == "constant") return AversionForm::constant;
    if (val == "linear_decreasing") return AversionForm::linear_decreasing;
    if (val == "affine_increasing") return AversionForm::affine_increasing;
    if (val == "table") return AversionForm::custom_table;
    throw validation_error(where + ": unknown eta_form '" + val + "'");
}

} // namespace detail

// Strict line-oriented `key = value` parser. `#` starts a comment, bracketed
// section headers are allowed (and ignored), every key must be known, no key
// may repeat, and all required keys must be present.
inline RunConfig parse_config_text(const std::string& text, const std::string& name) {
    RunConfig cfg;
    std::map<std::string, std::size_t> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;

    auto where = [&](std::size_t ln) { return name + ":" + std::to_string(ln); };

    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string s = detail::trim(line);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw validation_error(where(lineno) + ": malformed section header '" + s + "'");
            continue; // sections are cosmetic
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw validation_error(where(lineno) + ": expected 'key = value', got '" + s + "'");
        const std::string key = detail::trim(std::string_view(s).substr(0, eq));
        const std::string val = detail::trim(std::string_view(s).substr(eq + 1));
        if (key.empty() || val.empty())
            throw validation_error(where(lineno) + ": empty key or value");
        if (seen.count(key))
            throw validation_error(where(lineno) + ": duplicate key '" + key +
                                   "' (first on line " + std::to_string(seen[key]) + ")");
        seen[key] = lineno;
        cfg.entries.push_back({key, val, lineno});

        const std::string w = where(lineno);
        if (key == "w0") cfg.w0 = detail::parse_number(val, w);
        else if (key == "r") cfg.r = detail::parse_number(val, w);
        else if (key == "w_lo") cfg.w_lo = detail::parse_number(val, w);
        else if (key == "w_hi") cfg.w_hi = detail::parse_number(val, w);
        else if (key == "a") cfg.a = detail::parse_number(val, w);
        else if (key == "b") cfg.b = detail::parse_number(val, w);
        else if (key == "quad_points") cfg.quad_points = detail::parse_count(val, w);
        else if (key == "eta_form") cfg.eta_form = detail::parse_eta_form(val, w);
        else if (key == "mu") cfg.mu = detail::parse_number(val, w);
        else if (key == "eta_table") cfg.eta_table = detail::parse_pairs(val, w);
        else if (key == "t0") cfg.t0 = detail::parse_number(val, w);
        else if (key == "horizon") cfg.horizon = detail::parse_number(val, w);
        else if (key == "delta") cfg.delta = detail::parse_number(val, w);
        else if (key == "h") cfg.h = detail::parse_number(val, w);
        else if (key == "n_max") cfg.n_max = detail::parse_number(val, w);
        else if (key == "terminal") cfg.terminal = detail::parse_terminal(val, w);
        else if (key == "i_t") cfg.i_t = detail::parse_count(val, w);
        else if (key == "i_n") cfg.i_n = detail::parse_count(val, w);
        else throw validation_error(where(lineno) + ": unknown key '" + key + "'");
    }

    for (const char* k : {"w0", "r", "w_lo", "w_hi", "a", "b", "mu", "horizon", "delta", "h",
                          "i_t", "i_n"})
        if (!seen.count(k)) throw validation_error(name + ": missing key " + k);
    if (cfg.eta_form == AversionForm::custom_table && cfg.eta_table.empty())
        throw validation_error(name + ": eta_form table requires eta_table");
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    return parse_config_text(read_file(path), path);
}

// --------------------------------------------------------------- CSV input

inline WeightSeries load_weight_series(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "day,avg_weight_g")
        throw validation_error(path + ": unexpected header (want 'day,avg_weight_g')");
    WeightSeries s;
    std::size_t rowno = 1;
    while (std::getline(in, line)) {
        ++rowno;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto cells = detail::split(t, ',');
        const std::string w = path + " row " + std::to_string(rowno);
        if (cells.size() != 2) throw validation_error(w + ": expected 2 columns");
        const double day = detail::parse_number(cells[0], w);
        const double wt = detail::parse_number(cells[1], w);
        if (!s.observations.empty() && day <= s.observations.back().first)
            throw validation_error(w + ": days must be strictly increasing");
        if (wt <= 0.0) throw validation_error(w + ": weight must be positive");
        s.observations.emplace_back(day, wt);
    }
    s.validate();
    return s;
}

inline CompetitionSample load_competition_sample(const std::string& path, double day) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "weight_g")
        throw validation_error(path + ": unexpected header (want 'weight_g')");
    CompetitionSample s;
    s.day = day;
    std::size_t rowno = 1;
    while (std::getline(in, line)) {
        ++rowno;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const std::string w = path + " row " + std::to_string(rowno);
        const double wt = detail::parse_number(t, w);
        if (wt <= 0.0) throw validation_error(w + ": weight must be positive");
        s.weights.push_back(wt);
    }
    s.validate();
    return s;
}

// -------------------------------------------------------------- CSV output

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write file: " + path);
    out << content;
    if (!out) throw validation_error("write failed: " + path);
}

inline std::string grid_csv(const ValueGrid& v) {
    std::string out = "t_day,n,value\n";
    for (std::size_t i = 0; i <= v.i_t; ++i)
        for (std::size_t j = 0; j <= v.i_n; ++j) {
            out += format_double(v.time_at(i));
            out += ',';
            out += format_double(v.n_at(j));
            out += ',';
            out += format_double(v.at(i, j));
            out += '\n';
        }
    return out;
}

inline std::string grid_csv(const PolicyGrid& q) {
    std::string out = "t_day,n,q\n";
    for (std::size_t i = 0; i <= q.i_t; ++i)
        for (std::size_t j = 0; j <= q.i_n; ++j) {
            out += format_double(q.dt * static_cast<double>(i));
            out += ',';
            out += format_double(q.dn * static_cast<double>(j));
            out += ',';
            out += format_double(q.at(i, j));
            out += '\n';
        }
    return out;
}

inline std::string trajectory_csv(const Trajectory& tr) {
    std::string out = "t_day,n,q,omega_g\n";
    for (const auto& s : tr.samples) {
        out += format_double(s.t);
        out += ',';
        out += format_double(s.n);
        out += ',';
        out += format_double(s.q);
        out += ',';
        out += format_double(s.omega);
        out += '\n';
    }
    return out;
}

inline std::string density_csv(const std::vector<DistortedDensity>& ds) {
    std::string out = "t_day,wmax_g,density_per_g\n";
    for (const auto& d : ds)
        for (std::size_t k = 0; k < d.nodes.size(); ++k) {
            out += format_double(d.t);
            out += ',';
            out += format_double(d.nodes[k]);
            out += ',';
            out += format_double(d.density(k));
            out += '\n';
        }
    return out;
}

// Parse a written grid CSV back (round-trip checks).
inline std::vector<double> read_grid_csv_values(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line); // header
    std::vector<double> vals;
    while (std::getline(in, line)) {
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto cells = detail::split(t, ',');
        vals.push_back(detail::parse_number(cells.back(), path));
    }
    return vals;
}

// ---------------------------------------------------------------- manifest

struct RunManifest {
    std::string command;
    std::string scheme;
    std::string config_echo;
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
    std::vector<std::pair<std::string, std::string>> outputs; // (name, digest)
    std::string invariant_summary = "all invariant checks passed";
    double wall_clock_s = 0.0;
    unsigned threads = 0;
};

inline std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["tool"] = "ayuharvest";
    j["version"] = version;
    j["command"] = m.command;
    if (!m.scheme.empty()) j["scheme"] = m.scheme;
    j["config"] = m.config_echo;
    nlohmann::ordered_json ins = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.inputs) ins[k] = v;
    j["inputs"] = ins;
    nlohmann::ordered_json outs = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.outputs) outs[k] = v;
    j["outputs"] = outs;
    j["invariants"] = m.invariant_summary;
    j["wall_clock_s"] = m.wall_clock_s;
    j["threads"] = m.threads;
    return j.dump(2) + "\n";
}

// Emit a data file into `dir` and record its digest in the manifest.
inline void emit_output(const std::string& dir, const std::string& name,
                        const std::string& content, RunManifest& m) {
    std::filesystem::create_directories(dir);
    write_text_file(dir + "/" + name, content);
    m.outputs.emplace_back(name, fnv1a_hex(content));
}

inline void finish_manifest(const std::string& dir, RunManifest& m) {
    std::filesystem::create_directories(dir);
    write_text_file(dir + "/manifest.json", manifest_json(m));
}

} // namespace ayu
