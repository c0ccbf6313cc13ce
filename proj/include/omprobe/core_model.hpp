// core_model.hpp — strong-field steady state and working-point construction

#pragma once

#include "omprobe/types.hpp"

namespace omprobe {

struct SteadyStateOptions {
    double relaxation = 0.5;  // damping of the fixed-point iteration on Delta
    int max_iterations = 10000;
    double tolerance = 1e-13;
};

/// Total phase Phi = arctan(kappa/(2*omega_m)) + phi_c + phi_a - phi_p,
/// reduced to [0, 2*pi). Only this combination is physical; the individual
/// drive phases are gauge.
double total_phase(const SystemParams& params, double phi_c, double phi_a,
                   double phi_p);

/// Solves c_s = eps_c/(i*Delta + kappa/2), b_s = i*g0*|c_s|^2/(i*omega_m +
/// gamma_m/2) with Delta = delta0 - g0*(b_s + conj(b_s)) self-consistent.
/// Uses a damped fixed-point iteration on Delta, falling back to (and always
/// cross-checking against) the equivalent real cubic with stability
/// classification of its roots.
///
/// Throws NonConvergenceError if no stable root can be reached and
/// MultistableError (reporting every root) when more than one stable root
/// exists. Requires params.delta0.
WorkingPoint solve_steady_state(const SystemParams& params,
                                const DriveSet& drives,
                                const SteadyStateOptions& options = {});

/// How the arctan(kappa/(2*omega_m)) term enters the total phase when
/// assigning drive phases. Exact keeps it; ResolvedSidebandApprox drops it
/// (the paper's Phi ~ phi_c + phi_a - phi_p limit), shifting phi_a so the
/// realized Phi matches the approximation instead of the target.
enum class PhaseConvention { Exact, ResolvedSidebandApprox };

/// Result of inverting a figure-style operating point (|G|, Delta, y, Phi) into
/// concrete drives. params carries the back-solved delta0.
struct PreparedSystem {
    SystemParams params;
    DriveSet drives;
    WorkingPoint working_point;
};

/// Inverts (G, Delta, y, Phi, |eps_p|) to a concrete DriveSet and
/// WorkingPoint. Phase assignment: phi_p = 0, phi_c chosen so arg(g0*c_s) =
/// arg(coupling_target), phi_a = Phi - arctan(kappa/(2*omega_m)) - phi_c.
/// Round-trips through solve_steady_state to 1e-10 relative.
PreparedSystem working_point_from_G(const SystemParams& params,
                                    Complex coupling_target, double detuning_eff,
                                    double drive_ratio, double phi_total,
                                    double probe_mag, double delta_prime = 0.0,
                                    PhaseConvention convention = PhaseConvention::Exact);

/// All real roots of the steady-state cubic in Delta, with per-root linear
/// stability (Routh-Hurwitz on the linearized mean-field dynamics).
struct SteadyStateRoots {
    std::vector<double> detunings;
    std::vector<bool> stable;
};

SteadyStateRoots steady_state_roots(const SystemParams& params,
                                    const DriveSet& drives);

namespace detail {
/// Stability of the linearized (c, b) dynamics at a given working point.
bool working_point_stable(const SystemParams& params, double detuning_eff,
                          Complex coupling);
/// Real cubic roots of x^3 + a*x^2 + b*x + c, Newton-polished.
std::vector<double> cubic_real_roots(double a, double b, double c);
} // namespace detail

} // namespace omprobe
