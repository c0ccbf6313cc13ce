// linear_response.hpp — probe response, spectra, regime classification

#pragma once

#include <vector>

#include "omprobe/types.hpp"

namespace omprobe {

/// Solves the steady-state 2x2 linear system (full complex coupling and
/// drives, no phase bookkeeping) and maps <dc> to eps_T = eta*kappa*<dc>/eps_p.
/// Throws SingularSystemError when |det| < 1e-300.
ResponsePoint response_exact(const WorkingPoint& wp, const SystemParams& params,
                             Complex eps_p, Complex eps_a, double delta_prime);

/// Closed-form response split into its two interference pathways.
struct ClosedFormResponse {
    ResponsePoint point;
    Complex omit_term{0.0, 0.0};       // (gamma_m/2 - i*delta')*|eps_p| pathway
    Complex parametric_term{0.0, 0.0}; // |eps_a||G|e^{i*Phi} pathway
};

/// Term-by-term evaluation of the closed-form response at total phase
/// phi_total. Exactly equals response_exact whenever Delta = omega_m.
ClosedFormResponse response_closed_form(const WorkingPoint& wp,
                                        const SystemParams& params,
                                        double eps_p_mag, double eps_a_mag,
                                        double phi_total, double delta_prime);

/// Weak-control approximation (C << 1): bare Lorentzian of width kappa plus a
/// narrow width-gamma_m interference term. regime_warning is set (not fatal)
/// when C > 0.01.
struct WeakControlResponse {
    ResponsePoint point;
    double cooperativity = 0.0;
    std::optional<std::string> regime_warning;
};

WeakControlResponse response_weak_control(const SystemParams& params,
                                          double eps_p_mag, double eps_a_mag,
                                          double coupling_mag, double phi_total,
                                          double delta_prime);

/// Sweeps one of the response operations over a strictly increasing grid.
/// Point-level failures are rethrown with the grid index attached. Grid points
/// may be evaluated concurrently; assembly order is deterministic.
Spectrum compute_spectrum(const WorkingPoint& wp, const SystemParams& params,
                          const DriveSet& drives, const std::vector<double>& grid,
                          ResponseMethod method);

/// Default grids matching the two feature scales.
std::vector<double> wide_grid(const SystemParams& params, int points = 2001);
std::vector<double> narrow_grid(const SystemParams& params, int points = 2001);
std::vector<double> linear_grid(double lo, double hi, int points);

/// Cooperativity-based regime label plus the amplification windows and
/// special |G| points for Phi in {0, pi}.
RegimeReport classify_regime(const WorkingPoint& wp, const SystemParams& params,
                             double drive_ratio);

/// Margin sqrt(T_max)*|eps_p/eps_c| with pass (< 0.1) / warn / fail (> 0.3).
LinearityCheck linearity_bound(double t_max_estimate, double eps_p_mag,
                               double eps_c_mag);

} // namespace omprobe
