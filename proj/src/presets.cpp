// presets.cpp — the figure preset catalog

#include "omprobe/presets.hpp"

#include <algorithm>
#include <cmath>

namespace omprobe {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Preset> build_catalog() {
    std::vector<Preset> cat;

    auto spectrum = [](std::string name, std::string figure, double g_mag, double phi,
                       double eta, double lo, double hi, std::string desc) {
        Preset p;
        p.name = std::move(name);
        p.figure = std::move(figure);
        p.description = std::move(desc);
        p.mode = RunMode::Spectrum;
        p.g_mag = g_mag;
        p.phi = phi;
        p.eta = eta;
        p.grid_lo = lo;
        p.grid_hi = hi;
        return p;
    };

    const double g_fig2 = 1.0 / 3.0;
    const double gamma_m = 1e-3;
    const double narrow = 5.0 * gamma_m;
    const double g_gain = 0.5 * std::sqrt(gamma_m); // sqrt(kappa*gamma_m)/2

    // GWI-like spectra, |G| = kappa/3, undercoupled cavity.
    cat.push_back(spectrum("fig2a", "Fig. 2(a)", g_fig2, 0.0, 0.05, -1.0, 1.0,
                           "phase 0: absorption with anomalous dispersion at resonance"));
    cat.push_back(spectrum("fig2b", "Fig. 2(b)", g_fig2, 0.5 * kPi, 0.05, -1.0, 1.0,
                           "phase pi/2: asymmetric gain spectrum"));
    cat.push_back(spectrum("fig2c", "Fig. 2(c)", g_fig2, kPi, 0.05, -1.0, 1.0,
                           "phase pi: gain between Autler-Townes peaks"));
    cat.push_back(spectrum("fig2d", "Fig. 2(d)", g_fig2, 1.5 * kPi, 0.05, -1.0, 1.0,
                           "phase 3pi/2: mirror image of fig2b"));

    // Weak control field: OMIA / EIT-like, narrow then wide ranges.
    cat.push_back(spectrum("fig3a", "Fig. 3(a)", 0.5 * gamma_m, 0.0, 0.05, -narrow, narrow,
                           "weak control, phase 0: sharp OMIA absorption"));
    cat.push_back(spectrum("fig3b", "Fig. 3(b)", 0.5 * gamma_m, kPi, 0.05, -narrow, narrow,
                           "weak control, phase pi: EIT-like dip with T = 1"));
    cat.push_back(spectrum("fig3c", "Fig. 3(c)", gamma_m, kPi, 0.05, -narrow, narrow,
                           "weak control, phase pi: gain dip at resonance"));
    cat.push_back(spectrum("fig3d", "Fig. 3(d)", 0.5 * gamma_m, 0.0, 0.05, -1.0, 1.0,
                           "fig3a over the full cavity line"));
    cat.push_back(spectrum("fig3e", "Fig. 3(e)", 0.5 * gamma_m, kPi, 0.05, -1.0, 1.0,
                           "fig3b over the full cavity line"));
    cat.push_back(spectrum("fig3f", "Fig. 3(f)", gamma_m, kPi, 0.05, -1.0, 1.0,
                           "fig3c over the full cavity line"));

    // Overcoupled cavity: amplification / perfect absorption.
    {
        Preset p;
        p.name = "fig4a";
        p.figure = "Fig. 4(a)";
        p.description = "T at resonance vs |G| for y in {0.5, 1, 2}, phase 0";
        p.mode = RunMode::SweepG;
        p.eta = 1.0;
        p.phi = 0.0;
        p.sweep_y = {0.5, 1.0, 2.0};
        cat.push_back(p);
        p.name = "fig4b";
        p.figure = "Fig. 4(b)";
        p.description = "T at resonance vs |G| for y in {0.5, 1, 2}, phase pi";
        p.phi = kPi;
        cat.push_back(p);
    }
    cat.push_back(spectrum("fig4c", "Fig. 4(c)", g_gain, 0.0, 1.0, -0.02, 0.02,
                           "maximal amplification point, phase 0"));
    cat.push_back(spectrum("fig4d", "Fig. 4(d)", g_gain, kPi, 1.0, -0.02, 0.02,
                           "maximal amplification point, phase pi"));
    cat.push_back(spectrum("fig4e", "Fig. 4(e)", 1.0, 0.0, 1.0, -0.02, 0.02,
                           "perfect absorption, phase 0, |G| = kappa"));
    cat.push_back(spectrum("fig4f", "Fig. 4(f)", 0.25 * gamma_m, kPi, 1.0, -0.02, 0.02,
                           "perfect absorption, phase pi, |G| = gamma_m/4"));

    // Master-equation verification with thermal phonons.
    {
        Preset p;
        p.name = "fig5a";
        p.figure = "Fig. 5(a)";
        p.description = "numeric vs analytic absorption, phases {0, pi}, N_th = 10";
        p.mode = RunMode::Lindblad;
        p.g_mag = g_fig2;
        p.eta = 0.05;
        p.probe_mag = 1.0 / 30.0;
        p.n_thermal = 10.0;
        p.n_cav = 5;
        p.n_mech = 50;
        p.grid_lo = -1.0;
        p.grid_hi = 1.0;
        p.grid_points = 21;
        p.phases = {0.0, kPi};
        cat.push_back(p);
        p.name = "fig5b";
        p.figure = "Fig. 5(b)";
        p.description = "numeric vs analytic absorption, phases {pi/2, 3pi/2}, N_th = 10";
        p.phases = {0.5 * kPi, 1.5 * kPi};
        cat.push_back(p);
    }

    return cat;
}

} // namespace

const std::vector<Preset>& preset_catalog() {
    static const std::vector<Preset> catalog = build_catalog();
    return catalog;
}

const Preset* find_preset(const std::string& name) {
    for (const auto& p : preset_catalog())
        if (p.name == name) return &p;
    return nullptr;
}

namespace {

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace

std::string suggest_preset(const std::string& name) {
    std::string best;
    std::size_t best_d = static_cast<std::size_t>(-1);
    for (const auto& p : preset_catalog()) {
        const std::size_t d = edit_distance(name, p.name);
        if (d < best_d) {
            best_d = d;
            best = p.name;
        }
    }
    return best;
}

} // namespace omprobe
