#include "opkin/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

#include <json.hpp>

#include "opkin/csv.hpp"

namespace opkin {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    if (line > 0) throw ConfigError("line " + std::to_string(line) + ": " + msg);
    throw ConfigError(msg);
}

} // namespace

RawConfig parse_ini(const std::string& text) {
    RawConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(lineno, "malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail(lineno, "empty section name");
            cfg.sections[section]; // a section may legitimately stay empty
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key = value");
        if (section.empty()) fail(lineno, "key outside any [section]");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        // strip a trailing comment
        const auto hash = value.find('#');
        if (hash != std::string::npos) value = trim(value.substr(0, hash));
        if (key.empty()) fail(lineno, "empty key");
        if (value.empty()) fail(lineno, "empty value for key '" + key + "'");
        auto [it, inserted] = cfg.sections[section].emplace(key, RawEntry{value, lineno});
        if (!inserted)
            fail(lineno, "duplicate key '" + key + "' in [" + section + "]");
    }
    return cfg;
}

namespace {

// Cursor over one parse: tracks consumption, accumulates the resolved echo.
class Reader {
public:
    Reader(const RawConfig& raw, Resolution& res) : raw_(raw), res_(res) {}

    bool has(const std::string& section, const std::string& key) const {
        const auto s = raw_.sections.find(section);
        if (s == raw_.sections.end()) return false;
        return s->second.count(key) > 0;
    }

    std::string take(const std::string& section, const std::string& key, int* line = nullptr) {
        auto& e = raw_.sections.at(section).at(key);
        e.consumed = true;
        if (line) *line = e.line;
        echo(section, key, e.value);
        return e.value;
    }

    std::string take_or(const std::string& section, const std::string& key,
                        const std::string& def, int* line = nullptr) {
        if (has(section, key)) return take(section, key, line);
        if (line) *line = 0;
        echo(section, key, def);
        return def;
    }

    double take_double(const std::string& section, const std::string& key) {
        int line = 0;
        const std::string v = take(section, key, &line);
        return parse_double(v, key, line);
    }

    double take_double_or(const std::string& section, const std::string& key, double def) {
        if (!has(section, key)) {
            echo(section, key, format_double(def));
            return def;
        }
        return take_double(section, key);
    }

    long long take_int(const std::string& section, const std::string& key) {
        int line = 0;
        const std::string v = take(section, key, &line);
        long long out = 0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size())
            fail(line, "key '" + key + "': expected an integer, got '" + v + "'");
        return out;
    }

    long long take_int_or(const std::string& section, const std::string& key, long long def) {
        if (!has(section, key)) {
            echo(section, key, std::to_string(def));
            return def;
        }
        return take_int(section, key);
    }

    bool take_bool_or(const std::string& section, const std::string& key, bool def) {
        if (!has(section, key)) {
            echo(section, key, def ? "true" : "false");
            return def;
        }
        int line = 0;
        const std::string v = take(section, key, &line);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        fail(line, "key '" + key + "': expected true/false, got '" + v + "'");
    }

    int line_of(const std::string& section, const std::string& key) const {
        const auto s = raw_.sections.find(section);
        if (s == raw_.sections.end()) return 0;
        const auto k = s->second.find(key);
        return k == s->second.end() ? 0 : k->second.line;
    }

    void echo(const std::string& section, const std::string& key, const std::string& value) {
        res_.resolved[section][key] = value;
    }

    // removes a key from the canonical echo (used when a convenience spelling
    // is folded into its canonical counterpart)
    void drop_echo(const std::string& section, const std::string& key) {
        const auto s = res_.resolved.find(section);
        if (s != res_.resolved.end()) s->second.erase(key);
    }

    void warn(const std::string& msg) { res_.warnings.push_back(msg); }

    // every provided key must have been consumed by the command
    void reject_leftovers() const {
        for (const auto& [section, keys] : raw_.sections)
            for (const auto& [key, entry] : keys)
                if (!entry.consumed)
                    fail(entry.line, "unknown key '" + key + "' in [" + section + "]");
    }

    static double parse_double(const std::string& v, const std::string& key, int line) {
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            fail(line, "key '" + key + "': expected a number, got '" + v + "'");
        }
    }

private:
    RawConfig raw_; // private copy; consumption flags live here
    Resolution& res_;
};

std::vector<double> parse_double_list(const std::string& v, const std::string& key, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(line, "key '" + key + "': empty list entry");
        out.push_back(Reader::parse_double(item, key, line));
    }
    if (out.empty()) fail(line, "key '" + key + "': empty list");
    return out;
}

CompromiseFunction parse_p(Reader& r, const std::string& def = "constant") {
    int line = 0;
    const std::string v = r.has("model", "p") ? r.take("model", "p", &line)
                                              : (r.echo("model", "p", def), def);
    try {
        if (v == "constant") return CompromiseFunction::constant();
        if (v == "one_minus_w2") return CompromiseFunction::one_minus_w2();
        if (v.rfind("table:", 0) == 0)
            return CompromiseFunction::from_table(parse_double_list(v.substr(6), "p", line));
    } catch (const std::exception& e) {
        fail(line, std::string("key 'p': ") + e.what());
    }
    fail(line, "key 'p': expected constant, one_minus_w2 or table:v0,v1,..., got '" + v + "'");
}

DiffusionFunction parse_d(Reader& r, double gamma_for_reg, const std::string& def) {
    int line = 0;
    const std::string v = r.has("model", "d") ? r.take("model", "d", &line)
                                              : (r.echo("model", "d", def), def);
    try {
        if (v == "one_minus_abs") return DiffusionFunction::one_minus_abs();
        if (v == "one_minus_w2") return DiffusionFunction::one_minus_w2();
        if (v == "sqrt_one_minus_w2") return DiffusionFunction::sqrt_one_minus_w2();
        if (v == "sqrt_regularized") {
            const double p = r.take_double_or("model", "d_reg_p", 2.0 / 3.0);
            // commands without a compromise strength of their own (the solver,
            // in particular) name the regularization gamma explicitly
            const double reg_gamma = gamma_for_reg > 0.0
                                         ? gamma_for_reg
                                         : r.take_double_or("model", "d_reg_gamma", 0.0);
            if (!(reg_gamma > 0.0))
                fail(line, "key 'd': sqrt_regularized needs gamma or d_reg_gamma");
            return DiffusionFunction::sqrt_regularized(p, reg_gamma);
        }
        if (v.rfind("table:", 0) == 0)
            return DiffusionFunction::from_table(parse_double_list(v.substr(6), "d", line));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(line, std::string("key 'd': ") + e.what());
    }
    fail(line, "key 'd': expected one_minus_abs, one_minus_w2, sqrt_one_minus_w2, "
               "sqrt_regularized or table:v0,v1,..., got '" + v + "'");
}

InitSpec parse_init(Reader& r) {
    const std::string v = r.take_or("numerics", "init", "uniform");
    const int line = r.line_of("numerics", "init");
    try {
        if (v == "uniform") {
            r.take_double_or("numerics", "init_center", 0.0);
            r.take_double_or("numerics", "init_halfwidth", 1.0);
            return InitSpec::uniform();
        }
        if (v == "box") {
            const double c = r.take_double_or("numerics", "init_center", 0.0);
            const double hw = r.take_double_or("numerics", "init_halfwidth", 0.5);
            return InitSpec::box(c, hw);
        }
        if (v == "point") {
            const double c = r.take_double_or("numerics", "init_center", 0.0);
            r.take_double_or("numerics", "init_halfwidth", 0.0);
            return InitSpec::point(c);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(line, std::string("key 'init': ") + e.what());
    }
    fail(line, "key 'init': expected uniform, box or point, got '" + v + "'");
}

KineticParams parse_kinetic_params(Reader& r) {
    const int gline = r.line_of("model", "gamma");
    if (!r.has("model", "gamma")) fail(0, "[model] gamma is required");
    const double gamma = r.take_double("model", "gamma");
    const bool has_lambda = r.has("model", "lambda");
    const bool has_sigma2 = r.has("model", "sigma2");
    if (has_lambda && has_sigma2)
        fail(r.line_of("model", "sigma2"), "give either lambda or sigma2, not both");
    if (!has_lambda && !has_sigma2) fail(0, "[model] needs lambda or sigma2");
    try {
        if (has_lambda) {
            const double lambda = r.take_double("model", "lambda");
            const auto p = KineticParams::from_lambda(gamma, lambda);
            // canonicalize to sigma2 so a replayed manifest resolves cleanly
            r.drop_echo("model", "lambda");
            r.echo("model", "sigma2", format_double(p.sigma2));
            return p;
        }
        const double sigma2 = r.take_double("model", "sigma2");
        return KineticParams(gamma, sigma2);
    } catch (const std::exception& e) {
        fail(gline, e.what());
    }
}

NoiseModel parse_noise(Reader& r, const KineticParams& params) {
    const double sigma = std::sqrt(params.sigma2);
    if (!r.has("noise", "type"))
        r.warn("no [noise] section: defaulting to uniform noise with exact variance sigma2");
    const std::string v = r.take_or("noise", "type", "uniform");
    const int line = r.line_of("noise", "type");
    try {
        if (v == "uniform") return NoiseModel::uniform_symmetric(sigma * std::sqrt(3.0));
        if (v == "scaled_uniform") return NoiseModel::scaled_uniform(sigma);
        if (v == "scaled_bimodal") return NoiseModel::scaled_bimodal(sigma);
        if (v == "truncated_gaussian") {
            const double cutoff = r.take_double_or("noise", "cutoff", 3.0 * sigma);
            return NoiseModel::truncated_gaussian(sigma, cutoff);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(line, std::string("key 'type': ") + e.what());
    }
    fail(line, "key 'type': expected uniform, scaled_uniform, scaled_bimodal or "
               "truncated_gaussian, got '" + v + "'");
}

FluxScheme parse_scheme(Reader& r) {
    const std::string v = r.take_or("numerics", "scheme", "chang_cooper");
    if (v == "chang_cooper") return FluxScheme::ChangCooper;
    if (v == "upwind") return FluxScheme::Upwind;
    fail(r.line_of("numerics", "scheme"),
         "key 'scheme': expected chang_cooper or upwind, got '" + v + "'");
}

SimConfig resolve_sim_common(Reader& r, std::uint64_t seed) {
    SimConfig sim;
    sim.params = parse_kinetic_params(r);
    sim.p = parse_p(r);
    sim.d = parse_d(r, sim.params.gamma, "one_minus_w2");
    sim.noise = parse_noise(r, sim.params);
    sim.init = parse_init(r);

    const int nline = r.line_of("numerics", "n");
    sim.n = static_cast<int>(r.take_int_or("numerics", "n", 10000));
    if (sim.n < 2) fail(nline, "n: ensemble needs at least 2 agents");
    sim.t_end = r.take_double_or("numerics", "t_end", 100.0);
    if (!(sim.t_end > 0.0)) fail(r.line_of("numerics", "t_end"), "t_end: must be positive");
    sim.record_every = r.take_double_or("numerics", "record_every", 1.0);
    if (!(sim.record_every > 0.0))
        fail(r.line_of("numerics", "record_every"), "record_every: must be positive");
    sim.histogram_bins = static_cast<int>(r.take_int_or("numerics", "bins", 100));
    if (sim.histogram_bins < 2) fail(r.line_of("numerics", "bins"), "bins: must be >= 2");
    sim.realizations = static_cast<int>(r.take_int_or("numerics", "realizations", 1));
    if (sim.realizations < 1)
        fail(r.line_of("numerics", "realizations"), "realizations: must be >= 1");
    sim.seed = seed;

    // clip the noise support against the admissibility bound up front so the
    // run and its manifest agree on what is executed
    const double cap = max_noise_halfwidth(sim.d, sim.params.gamma);
    if (cap > 0.0 && sim.noise.support_halfwidth() > cap) {
        sim.noise = sim.noise.clipped_to(cap);
        r.warn("noise support clipped to the admissible halfwidth " + format_double(cap) +
               "; effective lambda = " +
               format_double(sim.noise.realized_variance() / sim.params.gamma));
    }
    return sim;
}

OutputOptions resolve_output(Reader& r) {
    OutputOptions out;
    out.timing = r.take_bool_or("output", "timing", false);
    return out;
}

} // namespace

SimulateCommand resolve_simulate(const RawConfig& raw, std::uint64_t seed, Resolution& res) {
    Reader r(raw, res);
    SimulateCommand cmd;
    cmd.sim = resolve_sim_common(r, seed);
    cmd.out = resolve_output(r);
    r.reject_leftovers();
    cmd.sim.validate();
    return cmd;
}

MomentCheckCommand resolve_moment_check(const RawConfig& raw, std::uint64_t seed,
                                        Resolution& res) {
    Reader r(raw, res);
    MomentCheckCommand cmd;
    cmd.sim = resolve_sim_common(r, seed);
    if (cmd.sim.p.kind() != CompromiseFunction::Kind::Constant)
        fail(r.line_of("model", "p"), "the rate check requires p = constant");
    cmd.fit_window = r.take_double_or("numerics", "fit_window", 0.0);
    cmd.out = resolve_output(r);
    r.reject_leftovers();
    cmd.sim.validate();
    return cmd;
}

FpSolveCommand resolve_fp_solve(const RawConfig& raw, Resolution& res) {
    Reader r(raw, res);
    FpSolveCommand cmd;

    const std::string eq = r.take_or("model", "equation", "full");
    const int eqline = r.line_of("model", "equation");
    const double lambda = (eq == "pure_drift" || eq == "sznajd")
                              ? r.take_double_or("model", "lambda", 0.0)
                              : r.take_double_or("model", "lambda", 1.0);
    try {
        if (eq == "full") {
            cmd.eq = FPEquationSpec::full_fp(parse_d(r, 0.0, "sqrt_one_minus_w2"), lambda);
        } else if (eq == "general_p") {
            cmd.eq = FPEquationSpec::general_p(parse_d(r, 0.0, "sqrt_one_minus_w2"), lambda,
                                               parse_p(r, "one_minus_w2"));
        } else if (eq == "pure_diffusion") {
            cmd.eq = FPEquationSpec::pure_diffusion(parse_d(r, 0.0, "sqrt_one_minus_w2"), lambda);
        } else if (eq == "pure_drift") {
            cmd.eq = FPEquationSpec::pure_drift(parse_p(r, "one_minus_w2"));
        } else if (eq == "sznajd") {
            cmd.eq = FPEquationSpec::sznajd_drift();
        } else {
            fail(eqline, "key 'equation': expected full, general_p, pure_diffusion, "
                         "pure_drift or sznajd, got '" + eq + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(eqline, e.what());
    }

    cmd.init = parse_init(r);
    cmd.cells = static_cast<int>(r.take_int_or("numerics", "cells", 400));
    if (cmd.cells < 4) fail(r.line_of("numerics", "cells"), "cells: must be >= 4");
    cmd.tau_end = r.take_double_or("numerics", "tau_end", 40.0);
    if (!(cmd.tau_end > 0.0)) fail(r.line_of("numerics", "tau_end"), "tau_end: must be positive");
    cmd.record_every = r.take_double_or("numerics", "record_every", 1.0);
    if (!(cmd.record_every > 0.0))
        fail(r.line_of("numerics", "record_every"), "record_every: must be positive");
    cmd.control.scheme = parse_scheme(r);
    cmd.out = resolve_output(r);
    r.reject_leftovers();
    return cmd;
}

SteadyStateCommand resolve_steady_state(const RawConfig& raw, Resolution& res) {
    Reader r(raw, res);
    SteadyStateCommand cmd;
    const std::string d = r.take_or("model", "d", "sqrt_one_minus_w2");
    const int dline = r.line_of("model", "d");
    SteadyD sd;
    if (d == "one_minus_w2") sd = SteadyD::OneMinusWSquared;
    else if (d == "one_minus_abs") sd = SteadyD::OneMinusAbs;
    else if (d == "sqrt_one_minus_w2") sd = SteadyD::SqrtOneMinusWSquared;
    else fail(dline, "key 'd': expected one_minus_w2, one_minus_abs or sqrt_one_minus_w2, "
                     "got '" + d + "'");
    const double m = r.take_double_or("model", "m", 0.0);
    const double lambda = r.take_double_or("model", "lambda", 1.0);
    try {
        cmd.spec = StationarySpec(sd, m, lambda);
    } catch (const std::exception& e) {
        fail(r.line_of("model", "m"), e.what());
    }
    cmd.cells = static_cast<int>(r.take_int_or("numerics", "cells", 400));
    if (cmd.cells < 2) fail(r.line_of("numerics", "cells"), "cells: must be >= 2");
    cmd.out = resolve_output(r);
    r.reject_leftovers();
    return cmd;
}

SweepCommand resolve_sweep(const RawConfig& raw, std::uint64_t seed, Resolution& res) {
    Reader r(raw, res);
    SweepCommand cmd;
    SweepConfig& sw = cmd.sweep;

    if (!r.has("numerics", "gammas")) fail(0, "[numerics] gammas is required");
    int gline = 0;
    sw.gammas = parse_double_list(r.take("numerics", "gammas", &gline), "gammas", gline);
    sw.lambda = r.take_double_or("model", "lambda", 0.5);
    sw.p = parse_p(r);
    sw.d = parse_d(r, sw.gammas.front(), "one_minus_w2");
    sw.init = parse_init(r);
    sw.n = static_cast<int>(r.take_int_or("numerics", "n", 100000));
    sw.realizations = static_cast<int>(r.take_int_or("numerics", "realizations", 20));
    sw.bins = static_cast<int>(r.take_int_or("numerics", "bins", 100));
    sw.tau_end = r.take_double_or("numerics", "tau_end", 10.0);
    const std::string metric = r.take_or("numerics", "metric", "l1");
    if (metric == "l1") sw.metric = SweepConfig::Metric::L1;
    else if (metric == "w1") sw.metric = SweepConfig::Metric::Wasserstein1;
    else fail(r.line_of("numerics", "metric"), "key 'metric': expected l1 or w1, got '" +
                                               metric + "'");
    sw.seed = seed;
    cmd.out = resolve_output(r);
    sw.timing = cmd.out.timing;
    r.reject_leftovers();
    try {
        sw.validate();
    } catch (const std::exception& e) {
        fail(gline, e.what());
    }
    return cmd;
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["timestamp"] = m.timestamp;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [section, keys] : m.config) {
        nlohmann::json sec = nlohmann::json::object();
        for (const auto& [k, v] : keys) sec[k] = v;
        cfg[section] = sec;
    }
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    RunManifest m;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        m.command = j.at("command").get<std::string>();
        m.version = j.at("version").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.timestamp = j.value("timestamp", "");
        for (const auto& [section, keys] : j.at("config").items())
            for (const auto& [k, v] : keys.items())
                m.config[section][k] = v.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

RawConfig manifest_to_raw(const RunManifest& m) {
    RawConfig raw;
    for (const auto& [section, keys] : m.config)
        for (const auto& [k, v] : keys) raw.sections[section][k] = RawEntry{v, 0};
    return raw;
}

std::string current_timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace opkin
