// config.cpp — INI-style config parsing

#include "omprobe/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "omprobe/errors.hpp"

namespace omprobe {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
    std::ostringstream os;
    os << path << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

double parse_number(const std::string& path, int line, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) fail(path, line, "trailing characters in number '" + v + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(path, line, "expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& path, int line, const std::string& v) {
    const double x = parse_number(path, line, v);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) fail(path, line, "expected an integer, got '" + v + "'");
    return i;
}

std::vector<double> parse_list(const std::string& path, int line, const std::string& v) {
    std::vector<double> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) out.push_back(parse_number(path, line, tok));
    if (out.empty()) fail(path, line, "expected a list of numbers");
    return out;
}

bool parse_bool(const std::string& path, int line, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(path, line, "expected a boolean, got '" + v + "'");
}

} // namespace

RunMode parse_mode(const std::string& w) {
    if (w == "spectrum") return RunMode::Spectrum;
    if (w == "sweep-g") return RunMode::SweepG;
    if (w == "lindblad") return RunMode::Lindblad;
    if (w == "nonlinear-check") return RunMode::NonlinearCheck;
    if (w == "classify") return RunMode::Classify;
    throw ConfigError("unknown mode '" + w +
                      "' (expected spectrum | sweep-g | lindblad | nonlinear-check | classify)");
}

ResponseMethod parse_method(const std::string& w) {
    if (w == "exact") return ResponseMethod::Exact;
    if (w == "closed") return ResponseMethod::ClosedForm;
    if (w == "weak") return ResponseMethod::WeakControl;
    throw ConfigError("unknown method '" + w + "' (expected exact | closed | weak)");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);

    RunConfig c;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(path, lineno, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(path, lineno, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) fail(path, lineno, "empty key");
        if (value.empty()) fail(path, lineno, "empty value for key '" + key + "'");

        auto num = [&] { return parse_number(path, lineno, value); };
        auto integer = [&] { return parse_int(path, lineno, value); };

        if (section == "run") {
            if (key == "mode") {
                try {
                    c.mode = parse_mode(value);
                } catch (const ConfigError& e) {
                    fail(path, lineno, e.what());
                }
            } else if (key == "preset")
                c.preset = value;
            else if (key == "method") {
                try {
                    c.method = parse_method(value);
                } catch (const ConfigError& e) {
                    fail(path, lineno, e.what());
                }
            } else if (key == "out")
                c.out_path = value;
            else if (key == "out_dir")
                c.out_dir = value;
            else
                fail(path, lineno, "unknown key '" + key + "' in [run]");
        } else if (section == "system") {
            if (key == "units") {
                if (value == "kappa")
                    c.units = RateUnits::Kappa;
                else if (value == "absolute")
                    c.units = RateUnits::Absolute;
                else
                    fail(path, lineno, "units must be kappa or absolute");
            } else if (key == "kappa")
                c.kappa_absolute = num();
            else if (key == "gamma_m")
                c.gamma_m = num();
            else if (key == "omega_m")
                c.omega_m = num();
            else if (key == "g0")
                c.g0 = num();
            else if (key == "eta")
                c.eta = num();
            else if (key == "delta0")
                c.delta0 = num();
            else
                fail(path, lineno, "unknown key '" + key + "' in [system]");
        } else if (section == "working_point") {
            if (key == "G")
                c.g_mag = num();
            else if (key == "phi")
                c.phi = num();
            else if (key == "y")
                c.y = num();
            else if (key == "probe")
                c.probe_mag = num();
            else
                fail(path, lineno, "unknown key '" + key + "' in [working_point]");
        } else if (section == "drives") {
            if (key == "control_mag")
                c.control_mag = num();
            else if (key == "control_phase")
                c.control_phase = num();
            else if (key == "probe_mag")
                c.probe_mag = num();
            else if (key == "probe_phase")
                c.probe_phase = num();
            else if (key == "mech_mag")
                c.mech_mag = num();
            else if (key == "mech_phase")
                c.mech_phase = num();
            else
                fail(path, lineno, "unknown key '" + key + "' in [drives]");
        } else if (section == "grid") {
            if (key == "delta_prime_min")
                c.grid_lo = num();
            else if (key == "delta_prime_max")
                c.grid_hi = num();
            else if (key == "points")
                c.points = integer();
            else
                fail(path, lineno, "unknown key '" + key + "' in [grid]");
        } else if (section == "sweep") {
            if (key == "g_min")
                c.g_lo = num();
            else if (key == "g_max")
                c.g_hi = num();
            else if (key == "g_points")
                c.g_points = integer();
            else if (key == "y_values")
                c.sweep_y = parse_list(path, lineno, value);
            else
                fail(path, lineno, "unknown key '" + key + "' in [sweep]");
        } else if (section == "lindblad") {
            if (key == "nth")
                c.n_thermal = num();
            else if (key == "ncut_cav")
                c.ncut_cav = integer();
            else if (key == "ncut_mech")
                c.ncut_mech = integer();
            else if (key == "converge")
                c.converge = parse_bool(path, lineno, value);
            else
                fail(path, lineno, "unknown key '" + key + "' in [lindblad]");
        } else if (section == "nonlinear") {
            if (key == "eps_ratios")
                c.eps_ratios = parse_list(path, lineno, value);
            else if (key == "delta_prime")
                c.delta_prime = num();
            else if (key == "timeseries")
                c.write_timeseries = parse_bool(path, lineno, value);
            else
                fail(path, lineno, "unknown key '" + key + "' in [nonlinear]");
        } else if (section.empty()) {
            fail(path, lineno, "key '" + key + "' outside any [section]");
        } else {
            fail(path, lineno, "unknown section [" + section + "]");
        }
    }
    return c;
}

RunConfig merge_configs(RunConfig flags, const RunConfig& file) {
    auto take = [](auto& dst, const auto& src) {
        if (!dst && src) dst = src;
    };
    take(flags.mode, file.mode);
    take(flags.preset, file.preset);
    if (flags.units == RateUnits::Kappa && file.units == RateUnits::Absolute) {
        flags.units = file.units;
        flags.kappa_absolute = file.kappa_absolute;
    }
    take(flags.gamma_m, file.gamma_m);
    take(flags.omega_m, file.omega_m);
    take(flags.g0, file.g0);
    take(flags.eta, file.eta);
    take(flags.delta0, file.delta0);
    take(flags.g_mag, file.g_mag);
    take(flags.phi, file.phi);
    take(flags.y, file.y);
    take(flags.probe_mag, file.probe_mag);
    take(flags.control_mag, file.control_mag);
    take(flags.control_phase, file.control_phase);
    take(flags.probe_phase, file.probe_phase);
    take(flags.mech_mag, file.mech_mag);
    take(flags.mech_phase, file.mech_phase);
    take(flags.grid_lo, file.grid_lo);
    take(flags.grid_hi, file.grid_hi);
    take(flags.points, file.points);
    take(flags.method, file.method);
    take(flags.g_lo, file.g_lo);
    take(flags.g_hi, file.g_hi);
    take(flags.g_points, file.g_points);
    if (flags.sweep_y.empty()) flags.sweep_y = file.sweep_y;
    take(flags.n_thermal, file.n_thermal);
    take(flags.ncut_cav, file.ncut_cav);
    take(flags.ncut_mech, file.ncut_mech);
    flags.converge = flags.converge || file.converge;
    if (flags.eps_ratios.empty()) flags.eps_ratios = file.eps_ratios;
    take(flags.delta_prime, file.delta_prime);
    flags.write_timeseries = flags.write_timeseries || file.write_timeseries;
    take(flags.out_path, file.out_path);
    take(flags.out_dir, file.out_dir);
    return flags;
}

} // namespace omprobe
