// config.hpp — run configuration shared by the CLI flags and the config file

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omprobe/presets.hpp"
#include "omprobe/types.hpp"

namespace omprobe {

/// Everything a run needs; unset fields fall back to the preset (when named)
/// and then to documented defaults. Flags override file values field by field.
struct RunConfig {
    std::optional<RunMode> mode;
    std::optional<std::string> preset;

    RateUnits units = RateUnits::Kappa;
    double kappa_absolute = 1.0; // used only with units == Absolute

    std::optional<double> gamma_m;
    std::optional<double> omega_m;
    std::optional<double> g0;
    std::optional<double> eta;
    std::optional<double> delta0; // bare detuning (direct-drive mode)

    std::optional<double> g_mag;
    std::optional<double> phi;
    std::optional<double> y;
    std::optional<double> probe_mag;

    // Raw drive amplitudes ([drives] section); when control_mag is set the
    // run uses solve_steady_state on these instead of the |G|/Phi inversion.
    std::optional<double> control_mag;
    std::optional<double> control_phase;
    std::optional<double> probe_phase;
    std::optional<double> mech_mag;
    std::optional<double> mech_phase;

    std::optional<double> grid_lo;
    std::optional<double> grid_hi;
    std::optional<int> points;
    std::optional<ResponseMethod> method;

    std::optional<double> g_lo;
    std::optional<double> g_hi;
    std::optional<int> g_points;
    std::vector<double> sweep_y;

    std::optional<double> n_thermal;
    std::optional<int> ncut_cav;
    std::optional<int> ncut_mech;
    bool converge = false; // emit a truncation-convergence table instead

    std::vector<double> eps_ratios;
    std::optional<double> delta_prime;
    bool write_timeseries = false;

    std::optional<std::string> out_path;
    std::optional<std::string> out_dir; // env OMPROBE_OUT_DIR supplies a default
};

/// Parses the INI-style config file (sections of key = value). Throws
/// ConfigError with file:line diagnostics.
RunConfig parse_config_file(const std::string& path);

/// file values filled into unset fields of flags (flags win).
RunConfig merge_configs(RunConfig flags, const RunConfig& file);

RunMode parse_mode(const std::string& word);        // throws ConfigError
ResponseMethod parse_method(const std::string& word); // throws ConfigError

struct RunResult {
    std::vector<std::string> artifacts; // files written
    std::vector<std::string> messages;  // human-readable notes (classify mode)
};

/// Executes one run and writes the CSV plus a .meta.json sidecar recording
/// every resolved parameter. Throws ConfigError for configuration problems
/// and the module errors for numerical ones.
RunResult run(const RunConfig& config);

} // namespace omprobe
