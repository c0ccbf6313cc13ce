// presets.hpp — named parameter sets for the paper-figure runs

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omprobe/types.hpp"

namespace omprobe {

enum class RunMode { Spectrum, SweepG, Lindblad, NonlinearCheck, Classify };

struct Preset {
    std::string name;
    std::string figure;
    std::string description;
    RunMode mode = RunMode::Spectrum;

    // Device parameters (units of kappa).
    double gamma_m = 1e-3;
    double omega_m = 10.0;
    double g0 = 1e-3;
    double eta = 0.05;

    // Working point.
    double g_mag = 0.0;      // |G|
    double phi = 0.0;        // total phase
    double y = 1.0;          // |eps_a/eps_p|
    double probe_mag = 1e-3; // |eps_p|

    // Detuning grid (spectrum / lindblad modes).
    double grid_lo = -1.0;
    double grid_hi = 1.0;
    int grid_points = 2001;

    // sweep-g mode.
    double g_lo = 1e-4;
    double g_hi = 1.0;
    int g_points = 500;
    std::vector<double> sweep_y;

    // lindblad mode.
    double n_thermal = 0.0;
    int n_cav = 5;
    int n_mech = 8;
    std::vector<double> phases; // one comparison run per phase
};

const std::vector<Preset>& preset_catalog();

const Preset* find_preset(const std::string& name);

/// Closest catalog name by edit distance, for error messages.
std::string suggest_preset(const std::string& name);

} // namespace omprobe
