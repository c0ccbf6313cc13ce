// omprobe_main.cpp — command-line front end
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "omprobe/config.hpp"
#include "omprobe/csv.hpp"
#include "omprobe/errors.hpp"
#include "omprobe/presets.hpp"
#include "omprobe/version.hpp"

namespace {

using namespace omprobe;

void add_common_options(CLI::App* cmd, RunConfig& c, std::string& config_path,
                        std::string& units_word, std::string& method_word) {
    cmd->add_option("--config", config_path, "INI config file (flags override file values)");
    cmd->add_option("--preset", c.preset, "named preset (see list-presets)");
    cmd->add_option("--units", units_word, "kappa (default) or absolute");
    cmd->add_option("--kappa", c.kappa_absolute,
                    "cavity decay rate in absolute units (with --units absolute)");
    cmd->add_option("--gamma-m", c.gamma_m, "mechanical decay rate");
    cmd->add_option("--omega-m", c.omega_m, "mechanical frequency");
    cmd->add_option("--g0", c.g0, "single-photon coupling");
    cmd->add_option("--eta", c.eta, "cavity-waveguide coupling (0, 1]");
    cmd->add_option("--G", c.g_mag, "linearized coupling magnitude |G|");
    cmd->add_option("--phi", c.phi, "total phase Phi");
    cmd->add_option("--y", c.y, "drive ratio |eps_a/eps_p|");
    cmd->add_option("--probe", c.probe_mag, "probe amplitude |eps_p|");
    cmd->add_option("--method", method_word, "exact | closed | weak");
    cmd->add_option("--out", c.out_path, "output CSV path");
    cmd->add_option("--out-dir", c.out_dir,
                    "output directory (default $OMPROBE_OUT_DIR or .)");
}

int dispatch(RunConfig flags, const std::string& config_path,
             const std::string& units_word, const std::string& method_word,
             RunMode mode) {
    try {
        if (!units_word.empty()) {
            if (units_word == "kappa")
                flags.units = RateUnits::Kappa;
            else if (units_word == "absolute")
                flags.units = RateUnits::Absolute;
            else
                throw ConfigError("--units must be kappa or absolute");
        }
        if (!method_word.empty()) flags.method = parse_method(method_word);
        flags.mode = mode;
        if (!config_path.empty())
            flags = merge_configs(std::move(flags), parse_config_file(config_path));

        const RunResult result = run(flags);
        for (const auto& msg : result.messages) std::cout << msg;
        for (const auto& f : result.artifacts) std::cout << "wrote " << f << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int list_presets() {
    std::printf("%-8s %-10s %-16s %s\n", "name", "figure", "mode", "parameters");
    for (const auto& p : preset_catalog()) {
        std::string mode;
        switch (p.mode) {
        case RunMode::Spectrum: mode = "spectrum"; break;
        case RunMode::SweepG: mode = "sweep-g"; break;
        case RunMode::Lindblad: mode = "lindblad"; break;
        case RunMode::NonlinearCheck: mode = "nonlinear-check"; break;
        case RunMode::Classify: mode = "classify"; break;
        }
        std::string params = "|G|=" + format_double(p.g_mag) + " phi=" + format_double(p.phi) +
                             " y=" + format_double(p.y) + " eta=" + format_double(p.eta) +
                             " gamma_m=" + format_double(p.gamma_m) +
                             " omega_m=" + format_double(p.omega_m);
        if (p.mode == RunMode::Lindblad) {
            params += " N_th=" + format_double(p.n_thermal) +
                      " |eps_p|=" + format_double(p.probe_mag) + " trunc=(" +
                      std::to_string(p.n_cav) + "," + std::to_string(p.n_mech) + ")";
        }
        std::printf("%-8s %-10s %-16s %s\n    %s\n", p.name.c_str(), p.figure.c_str(),
                    mode.c_str(), params.c_str(), p.description.c_str());
    }
    std::printf("%zu presets\n", preset_catalog().size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-dependent optomechanical probe response calculator"};
    app.set_version_flag("--version", omprobe::kVersion);
    app.require_subcommand(1);

    RunConfig flags;
    std::string config_path, units_word, method_word;

    auto* spectrum = app.add_subcommand("spectrum", "probe response over a detuning grid");
    add_common_options(spectrum, flags, config_path, units_word, method_word);
    spectrum->add_option("--delta-prime-min", flags.grid_lo, "grid start");
    spectrum->add_option("--delta-prime-max", flags.grid_hi, "grid end");
    spectrum->add_option("--points", flags.points, "grid points");

    auto* sweep = app.add_subcommand("sweep-g", "resonant transmission vs |G|");
    add_common_options(sweep, flags, config_path, units_word, method_word);
    sweep->add_option("--g-min", flags.g_lo, "sweep start (log grid)");
    sweep->add_option("--g-max", flags.g_hi, "sweep end");
    sweep->add_option("--g-points", flags.g_points, "sweep points");
    sweep->add_option("--sweep-y", flags.sweep_y, "drive ratios to sweep");
    sweep->add_option("--delta-prime", flags.delta_prime, "probe detuning (default 0)");

    auto* lind = app.add_subcommand("lindblad", "master-equation check vs analytic response");
    add_common_options(lind, flags, config_path, units_word, method_word);
    lind->add_option("--delta-prime-min", flags.grid_lo, "grid start");
    lind->add_option("--delta-prime-max", flags.grid_hi, "grid end");
    lind->add_option("--points", flags.points, "grid points");
    lind->add_option("--nth", flags.n_thermal, "mean thermal phonon number");
    lind->add_option("--ncut-cav", flags.ncut_cav, "photon cutoff");
    lind->add_option("--ncut-mech", flags.ncut_mech, "phonon cutoff");
    lind->add_option("--delta-prime", flags.delta_prime,
                     "detuning for the convergence table");
    lind->add_flag("--converge", flags.converge,
                   "emit a truncation-convergence table instead of the sweep");

    auto* nl = app.add_subcommand("nonlinear-check", "mean-field validation of the linear response");
    add_common_options(nl, flags, config_path, units_word, method_word);
    nl->add_option("--eps-ratio", flags.eps_ratios, "|eps_p/eps_c| ladder");
    nl->add_option("--delta-prime", flags.delta_prime, "probe detuning");
    nl->add_flag("--timeseries", flags.write_timeseries, "also write the sampled trajectory");

    auto* cls = app.add_subcommand("classify", "regime report for a working point");
    add_common_options(cls, flags, config_path, units_word, method_word);

    auto* lp = app.add_subcommand("list-presets", "print the preset catalog");

    CLI11_PARSE(app, argc, argv);

    if (lp->parsed()) return list_presets();
    omprobe::RunMode mode{};
    if (spectrum->parsed()) mode = omprobe::RunMode::Spectrum;
    if (sweep->parsed()) mode = omprobe::RunMode::SweepG;
    if (lind->parsed()) mode = omprobe::RunMode::Lindblad;
    if (nl->parsed()) mode = omprobe::RunMode::NonlinearCheck;
    if (cls->parsed()) mode = omprobe::RunMode::Classify;
    return dispatch(std::move(flags), config_path, units_word, method_word, mode);
}
