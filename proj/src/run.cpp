// run.cpp — mode dispatch and artifact writing

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "omprobe/config.hpp"
#include "omprobe/csv.hpp"
#include "omprobe/errors.hpp"
#include "omprobe/lindblad.hpp"
#include "omprobe/linear_response.hpp"
#include "omprobe/nonlinear.hpp"
#include "omprobe/presets.hpp"
#include "omprobe/version.hpp"

namespace omprobe {

namespace {

using json = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

struct Resolved {
    RunMode mode = RunMode::Spectrum;
    const Preset* preset = nullptr;
    SystemParams params;
    double g_mag = 0.0;
    double phi = 0.0;
    double y = 1.0;
    double probe_mag = 1e-3;
    double grid_lo = -1.0, grid_hi = 1.0;
    int points = 2001;
    ResponseMethod method = ResponseMethod::Exact;
    double g_lo = 1e-4, g_hi = 1.0;
    int g_points = 500;
    std::vector<double> sweep_y{1.0};
    double n_thermal = 0.0;
    TruncationSpec trunc;
    bool converge = false;
    std::vector<double> phases;
    std::vector<double> eps_ratios{1e-4, 1e-3, 1e-2};
    double delta_prime = 0.0;
    bool write_timeseries = false;
    std::string out_path;

    // Direct-drive mode ([drives] section in the config file).
    bool direct_drives = false;
    std::optional<double> delta0;
    Complex control{0.0, 0.0};
    Complex probe{0.0, 0.0};
    Complex mech_drive{0.0, 0.0};
};

double rate_scale_of(const RunConfig& c) {
    return (c.units == RateUnits::Absolute) ? c.kappa_absolute : 1.0;
}

Resolved resolve(const RunConfig& c) {
    Resolved r;
    if (c.preset) {
        r.preset = find_preset(*c.preset);
        if (!r.preset)
            throw ConfigError("unknown preset '" + *c.preset + "'; did you mean '" +
                              suggest_preset(*c.preset) + "'? (see list-presets)");
    }

    if (c.mode)
        r.mode = *c.mode;
    else if (r.preset)
        r.mode = r.preset->mode;
    else
        throw ConfigError("no mode given and no preset named");

    const double scale = rate_scale_of(c);
    auto rate = [&](const std::optional<double>& v, double preset_v, double fallback) {
        if (v) return *v / scale;
        return r.preset ? preset_v : fallback;
    };
    auto plain = [&](const std::optional<double>& v, double preset_v, double fallback) {
        if (v) return *v;
        return r.preset ? preset_v : fallback;
    };

    const Preset def; // documented defaults when neither flag nor preset is set
    const Preset& p = r.preset ? *r.preset : def;

    const double gamma_m = rate(c.gamma_m, p.gamma_m, def.gamma_m);
    const double omega_m = rate(c.omega_m, p.omega_m, def.omega_m);
    const double g0 = rate(c.g0, p.g0, def.g0);
    const double eta = plain(c.eta, p.eta, def.eta);
    r.params = SystemParams::make(1.0, gamma_m, omega_m, g0, eta);

    r.g_mag = rate(c.g_mag, p.g_mag, 0.0);
    r.phi = plain(c.phi, p.phi, 0.0);
    r.y = plain(c.y, p.y, 1.0);
    r.probe_mag = rate(c.probe_mag, p.probe_mag, def.probe_mag);
    r.grid_lo = rate(c.grid_lo, p.grid_lo, def.grid_lo);
    r.grid_hi = rate(c.grid_hi, p.grid_hi, def.grid_hi);
    r.points = c.points ? *c.points : p.grid_points;
    if (c.method) r.method = *c.method;
    r.g_lo = rate(c.g_lo, p.g_lo, def.g_lo);
    r.g_hi = rate(c.g_hi, p.g_hi, def.g_hi);
    r.g_points = c.g_points ? *c.g_points : p.g_points;
    if (!c.sweep_y.empty())
        r.sweep_y = c.sweep_y;
    else if (!p.sweep_y.empty())
        r.sweep_y = p.sweep_y;
    r.n_thermal = plain(c.n_thermal, p.n_thermal, 0.0);
    r.trunc = default_truncation(r.n_thermal);
    if (r.preset) {
        r.trunc.n_cav = p.n_cav;
        r.trunc.n_mech = p.n_mech;
    }
    if (c.ncut_cav) r.trunc.n_cav = *c.ncut_cav;
    if (c.ncut_mech) r.trunc.n_mech = *c.ncut_mech;
    r.converge = c.converge;
    if (!p.phases.empty()) r.phases = p.phases;
    if (c.phi) r.phases = {*c.phi};
    if (r.phases.empty()) r.phases = {r.phi};
    if (!c.eps_ratios.empty()) r.eps_ratios = c.eps_ratios;
    r.delta_prime = rate(c.delta_prime, 0.0, 0.0);
    r.write_timeseries = c.write_timeseries;

    if (c.control_mag) {
        r.direct_drives = true;
        if (!c.delta0)
            throw ConfigError("[drives] mode needs delta0 in [system]");
        r.delta0 = *c.delta0 / scale;
        r.control = std::polar(*c.control_mag / scale, c.control_phase.value_or(0.0));
        if (!c.probe_mag) throw ConfigError("[drives] mode needs probe_mag");
        r.probe = std::polar(*c.probe_mag / scale, c.probe_phase.value_or(0.0));
        r.mech_drive = std::polar(c.mech_mag.value_or(0.0) / scale,
                                  c.mech_phase.value_or(0.0));
        if (r.mode != RunMode::Spectrum && r.mode != RunMode::Classify)
            throw ConfigError("[drives] mode supports spectrum and classify only");
    }

    std::string dir = ".";
    if (c.out_dir)
        dir = *c.out_dir;
    else if (const char* env = std::getenv("OMPROBE_OUT_DIR"); env && *env)
        dir = env;
    std::string name;
    if (c.out_path)
        name = *c.out_path;
    else if (r.preset)
        name = r.preset->name + ".csv";
    else
        name = "run.csv";
    const std::filesystem::path given(name);
    r.out_path = given.is_absolute() ? given.string() : (std::filesystem::path(dir) / given).string();
    return r;
}

std::string stem_of(const std::string& out) {
    if (out.size() > 4 && out.substr(out.size() - 4) == ".csv") return out.substr(0, out.size() - 4);
    return out;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json working_point_json(const WorkingPoint& wp) {
    json j;
    j["cavity_amp"] = complex_json(wp.cavity_amp);
    j["mech_amp"] = complex_json(wp.mech_amp);
    j["detuning_eff"] = wp.detuning_eff;
    j["coupling"] = complex_json(wp.coupling);
    j["coupling_mag"] = std::abs(wp.coupling);
    j["total_phase"] = wp.total_phase;
    j["cooperativity"] = wp.cooperativity;
    j["drive_ratio"] = wp.drive_ratio;
    return j;
}

json base_metadata(const Resolved& r) {
    json j;
    j["version"] = kVersion;
    switch (r.mode) {
    case RunMode::Spectrum: j["mode"] = "spectrum"; break;
    case RunMode::SweepG: j["mode"] = "sweep-g"; break;
    case RunMode::Lindblad: j["mode"] = "lindblad"; break;
    case RunMode::NonlinearCheck: j["mode"] = "nonlinear-check"; break;
    case RunMode::Classify: j["mode"] = "classify"; break;
    }
    if (r.preset) {
        j["preset"] = r.preset->name;
        j["figure"] = r.preset->figure;
    }
    json sys;
    sys["units"] = "kappa";
    sys["kappa"] = r.params.kappa;
    sys["gamma_m"] = r.params.gamma_m;
    sys["omega_m"] = r.params.omega_m;
    sys["g0"] = r.params.g0;
    sys["eta"] = r.params.eta;
    if (r.params.delta0) sys["delta0"] = *r.params.delta0;
    j["system"] = sys;
    if (!r.params.warnings.empty()) j["warnings"] = r.params.warnings;
    return j;
}

void add_drive_metadata(json& j, const PreparedSystem& sys) {
    json d;
    d["control"] = complex_json(sys.drives.control);
    d["probe"] = complex_json(sys.drives.probe);
    d["mech_drive"] = complex_json(sys.drives.mech_drive);
    j["drives"] = d;
    j["system"]["delta0"] = sys.params.delta0 ? *sys.params.delta0 : 0.0;
    j["working_point"] = working_point_json(sys.working_point);

    const RegimeReport regime =
        classify_regime(sys.working_point, sys.params, sys.working_point.drive_ratio);
    json g;
    g["cooperativity"] = regime.cooperativity;
    g["t_max_estimate"] = regime.t_max_estimate;
    const double eps_c = std::abs(sys.drives.control);
    if (eps_c > 0.0) {
        const LinearityCheck lin =
            linearity_bound(regime.t_max_estimate, std::abs(sys.drives.probe), eps_c);
        g["linearity_margin"] = lin.margin;
        g["linearity_flag"] = lin.flag == LinearityFlag::Pass   ? "pass"
                              : lin.flag == LinearityFlag::Warn ? "warn"
                                                                : "fail";
    }
    j["derived"] = g;
}

void write_meta(const std::string& csv_path, const json& j) {
    write_file(stem_of(csv_path) + ".meta.json", j.dump(2) + "\n");
}

PreparedSystem prepare_system(const Resolved& r, double phi) {
    if (!r.direct_drives)
        return working_point_from_G(r.params, r.g_mag, r.params.omega_m, r.y, phi,
                                    r.probe_mag);
    PreparedSystem sys;
    sys.params = r.params.with_delta0(*r.delta0);
    sys.drives = DriveSet::make(r.control, r.probe, r.mech_drive, 0.0);
    sys.working_point = solve_steady_state(sys.params, sys.drives);
    return sys;
}

RunResult run_spectrum(const Resolved& r) {
    const PreparedSystem sys = prepare_system(r, r.phases[0]);
    const std::vector<double> grid =
        (r.points == 1) ? std::vector<double>{0.5 * (r.grid_lo + r.grid_hi)}
                        : linear_grid(r.grid_lo, r.grid_hi, r.points);
    const Spectrum s =
        compute_spectrum(sys.working_point, sys.params, sys.drives, grid, r.method);

    write_file(r.out_path, spectrum_csv(s));
    json meta = base_metadata(r);
    add_drive_metadata(meta, sys);
    meta["grid"] = {{"delta_prime_min", grid.front()},
                    {"delta_prime_max", grid.back()},
                    {"points", grid.size()}};
    meta["method"] = r.method == ResponseMethod::Exact       ? "exact"
                     : r.method == ResponseMethod::ClosedForm ? "closed"
                                                              : "weak";
    write_meta(r.out_path, meta);
    return RunResult{{r.out_path, stem_of(r.out_path) + ".meta.json"}, {}};
}

RunResult run_sweep_g(const Resolved& r) {
    if (!(r.g_lo > 0.0 && r.g_hi > r.g_lo))
        throw ConfigError("sweep-g needs 0 < g_min < g_max");
    if (r.g_points < 2) throw ConfigError("sweep-g needs at least 2 grid points");

    std::vector<SweepGRow> rows;
    rows.reserve(r.sweep_y.size() * static_cast<std::size_t>(r.g_points));
    const double log_lo = std::log(r.g_lo), log_hi = std::log(r.g_hi);
    for (double y : r.sweep_y) {
        for (int i = 0; i < r.g_points; ++i) {
            const double g =
                std::exp(log_lo + (log_hi - log_lo) * i / (r.g_points - 1));
            const PreparedSystem sys = working_point_from_G(
                r.params, g, r.params.omega_m, y, r.phases[0], r.probe_mag);
            SweepGRow row;
            row.y = y;
            row.g_mag = g;
            row.point = response_closed_form(sys.working_point, sys.params, r.probe_mag,
                                             y * r.probe_mag, sys.working_point.total_phase,
                                             r.delta_prime)
                            .point;
            rows.push_back(row);
        }
    }
    write_file(r.out_path, sweep_g_csv(rows));
    json meta = base_metadata(r);
    meta["phi"] = r.phases[0];
    meta["y_values"] = r.sweep_y;
    meta["g_grid"] = {{"min", r.g_lo}, {"max", r.g_hi}, {"points", r.g_points}, {"spacing", "log"}};
    meta["delta_prime"] = r.delta_prime;
    meta["probe_mag"] = r.probe_mag;
    write_meta(r.out_path, meta);
    return RunResult{{r.out_path, stem_of(r.out_path) + ".meta.json"}, {}};
}

std::string phase_suffix(double phi) {
    std::ostringstream os;
    os << "-phi" << phi / kPi << "pi";
    std::string s = os.str();
    for (char& ch : s)
        if (ch == '.') ch = 'p';
    return s;
}

RunResult run_lindblad_convergence(const Resolved& r) {
    const PreparedSystem sys = working_point_from_G(
        r.params, r.g_mag, r.params.omega_m, r.y, r.phases[0], r.probe_mag);
    const LindbladModel model = lindblad_model(sys.params, sys.working_point,
                                               sys.drives, r.n_thermal, r.delta_prime);
    std::vector<TruncationSpec> ladder;
    for (double frac : {0.5, 0.75, 1.0}) {
        TruncationSpec t = r.trunc;
        t.n_mech = std::max(1, static_cast<int>(std::lround(frac * r.trunc.n_mech)));
        ladder.push_back(t);
    }
    const ConvergenceTable table = convergence_sweep(model, ladder);
    write_file(r.out_path, convergence_csv(table));

    json meta = base_metadata(r);
    meta["n_thermal"] = r.n_thermal;
    meta["delta_prime"] = r.delta_prime;
    meta["phi"] = r.phases[0];
    meta["working_point"] = working_point_json(sys.working_point);
    meta["converged"] = table.converged;
    write_meta(r.out_path, meta);
    return RunResult{{r.out_path, stem_of(r.out_path) + ".meta.json"}, {}};
}

RunResult run_lindblad(const Resolved& r) {
    if (r.converge) return run_lindblad_convergence(r);
    RunResult result;
    json meta = base_metadata(r);
    meta["n_thermal"] = r.n_thermal;
    meta["truncation"] = {{"n_cav", r.trunc.n_cav}, {"n_mech", r.trunc.n_mech}};
    json runs = json::array();

    const std::vector<double> grid =
        (r.points == 1) ? std::vector<double>{0.5 * (r.grid_lo + r.grid_hi)}
                        : linear_grid(r.grid_lo, r.grid_hi, r.points);
    const bool multi = r.phases.size() > 1;
    for (double phi : r.phases) {
        const PreparedSystem sys = working_point_from_G(
            r.params, r.g_mag, r.params.omega_m, r.y, phi, r.probe_mag);
        const auto rows = lindblad_vs_analytic(sys.params, sys.working_point, sys.drives,
                                               r.n_thermal, r.trunc, grid);
        const std::string path =
            multi ? stem_of(r.out_path) + phase_suffix(phi) + ".csv" : r.out_path;
        write_file(path, lindblad_csv(rows));
        result.artifacts.push_back(path);

        json rj;
        rj["phi"] = phi;
        rj["file"] = path;
        rj["working_point"] = working_point_json(sys.working_point);
        double max_err = 0.0;
        for (const auto& row : rows) max_err = std::max(max_err, row.abs_err);
        rj["max_abs_err"] = max_err;
        runs.push_back(rj);
    }
    meta["grid"] = {{"delta_prime_min", grid.front()},
                    {"delta_prime_max", grid.back()},
                    {"points", grid.size()}};
    meta["probe_mag"] = r.probe_mag;
    meta["y"] = r.y;
    meta["g_mag"] = r.g_mag;
    meta["runs"] = runs;
    write_meta(r.out_path, meta);
    result.artifacts.push_back(stem_of(r.out_path) + ".meta.json");
    return result;
}

RunResult run_nonlinear(const Resolved& r) {
    const MeanFieldControls controls; // stock integration controls
    const LinearityReport report = validate_linearity(
        r.params, r.g_mag, r.phases[0], r.y, r.delta_prime, r.eps_ratios, controls);
    write_file(r.out_path, linearity_csv(report));
    RunResult result;
    result.artifacts.push_back(r.out_path);

    json meta = base_metadata(r);
    meta["phi"] = r.phases[0];
    meta["y"] = r.y;
    meta["g_mag"] = r.g_mag;
    meta["delta_prime"] = r.delta_prime;
    meta["eps_ratios"] = r.eps_ratios;
    meta["t_max_estimate"] = report.t_max_estimate;
    meta["integration"] = {
        {"rtol", controls.rtol},
        {"atol", controls.atol},
        {"settle_time", controls.settle_time >= 0.0
                            ? controls.settle_time
                            : 20.0 / r.params.gamma_m},
        {"fit_periods", controls.fit_periods},
        {"samples_per_period", controls.samples_per_period}};

    if (r.write_timeseries && !r.eps_ratios.empty()) {
        double ratio = 0.0;
        for (double x : r.eps_ratios) ratio = std::max(ratio, x);
        if (ratio > 0.0) {
            PreparedSystem probe_sys = working_point_from_G(
                r.params, r.g_mag, r.params.omega_m, r.y, r.phases[0], 1e-6);
            const double eps_c = std::abs(probe_sys.drives.control);
            const PreparedSystem sys = working_point_from_G(
                r.params, r.g_mag, r.params.omega_m, r.y, r.phases[0], ratio * eps_c,
                r.delta_prime);
            MeanFieldControls ctl;
            const double omega_a = sys.params.omega_m + r.delta_prime;
            ctl.full_series_dt = kTwoPi / omega_a / 16.0;
            const TimeSeries series =
                integrate_mean_field(sys.params, sys.drives, 40.0 * kTwoPi / omega_a, ctl);
            const std::string ts_path = stem_of(r.out_path) + "-timeseries.csv";
            write_file(ts_path, timeseries_csv(series));
            result.artifacts.push_back(ts_path);
            meta["timeseries_file"] = ts_path;
        }
    }
    write_meta(r.out_path, meta);
    result.artifacts.push_back(stem_of(r.out_path) + ".meta.json");
    return result;
}

RunResult run_classify(const Resolved& r) {
    const PreparedSystem sys = prepare_system(r, r.phases[0]);
    const double y = r.direct_drives ? sys.working_point.drive_ratio : r.y;
    const RegimeReport rep = classify_regime(sys.working_point, sys.params, y);

    RunResult result;
    std::ostringstream os;
    os << "cooperativity C = " << rep.cooperativity << "\n";
    os << "regime: "
       << (rep.label == RegimeLabel::GwiLike       ? "GWI_like"
           : rep.label == RegimeLabel::WeakControl ? "weak_control"
                                                   : "transitional")
       << "\n";
    if (rep.amp_window_phi0)
        os << "amplification window (phi = 0):  |G| in (0, " << rep.amp_window_phi0->hi << ")\n";
    if (rep.amp_window_phipi)
        os << "amplification window (phi = pi): |G| > " << rep.amp_window_phipi->lo << "\n";
    if (rep.g_max_gain) os << "max-gain point: |G| = " << *rep.g_max_gain << "\n";
    if (rep.g_absorb_phi0)
        os << "perfect absorption (phi = 0):  |G| = " << *rep.g_absorb_phi0 << "\n";
    if (rep.g_absorb_phipi)
        os << "perfect absorption (phi = pi): |G| = " << *rep.g_absorb_phipi << "\n";
    os << "T_max estimate: " << rep.t_max_estimate << "\n";
    result.messages.push_back(os.str());

    json meta = base_metadata(r);
    add_drive_metadata(meta, sys);
    json rj;
    rj["cooperativity"] = rep.cooperativity;
    rj["label"] = rep.label == RegimeLabel::GwiLike       ? "GWI_like"
                  : rep.label == RegimeLabel::WeakControl ? "weak_control"
                                                          : "transitional";
    if (rep.amp_window_phi0)
        rj["amp_window_phi0"] = {rep.amp_window_phi0->lo, rep.amp_window_phi0->hi};
    if (rep.amp_window_phipi)
        rj["amp_window_phipi_lo"] = rep.amp_window_phipi->lo;
    if (rep.g_max_gain) rj["g_max_gain"] = *rep.g_max_gain;
    if (rep.g_absorb_phi0) rj["g_absorb_phi0"] = *rep.g_absorb_phi0;
    if (rep.g_absorb_phipi) rj["g_absorb_phipi"] = *rep.g_absorb_phipi;
    rj["t_max_estimate"] = rep.t_max_estimate;
    meta["regime"] = rj;
    write_meta(r.out_path, meta);
    result.artifacts.push_back(stem_of(r.out_path) + ".meta.json");
    return result;
}

} // namespace

RunResult run(const RunConfig& config) {
    const Resolved r = resolve(config);
    switch (r.mode) {
    case RunMode::Spectrum: return run_spectrum(r);
    case RunMode::SweepG: return run_sweep_g(r);
    case RunMode::Lindblad: return run_lindblad(r);
    case RunMode::NonlinearCheck: return run_nonlinear(r);
    case RunMode::Classify: return run_classify(r);
    }
    throw ConfigError("unreachable mode");
}

} // namespace omprobe
