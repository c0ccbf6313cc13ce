// lindblad.hpp — thermal Lindblad master equation on the truncated Fock space

#pragma once

#include <vector>

#include "omprobe/fock.hpp"
#include "omprobe/types.hpp"

namespace omprobe {

/// Effective beam-splitter Hamiltonian coefficients and dissipator rates.
struct LindbladModel {
    double delta_prime = 0.0;
    Complex coupling{0.0, 0.0};   // G
    Complex probe{0.0, 0.0};      // eps_p
    Complex mech_drive{0.0, 0.0}; // eps_a
    double kappa = 1.0;
    double gamma_m = 0.0;
    double n_thermal = 0.0;

    static LindbladModel make(double delta_prime, Complex coupling, Complex probe,
                              Complex mech_drive, double kappa, double gamma_m,
                              double n_thermal);
};

/// Convenience constructor from a solved working point.
LindbladModel lindblad_model(const SystemParams& params, const WorkingPoint& wp,
                             const DriveSet& drives, double n_thermal,
                             double delta_prime);

/// Fock-truncated two-mode state with validation diagnostics.
struct DensityMatrix {
    MatrixCd rho;
    TruncationSpec trunc;
    // Diagnostics captured before any cleanup was applied.
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
};

DensityMatrix vacuum_state(const TruncationSpec& trunc);

Complex mean_cavity_amp(const DensityMatrix& state); // tr(rho * dc)
Complex mean_mech_amp(const DensityMatrix& state);   // tr(rho * db)
double mean_mech_number(const DensityMatrix& state); // tr(rho * db†db)

/// Sparse superoperator L with d(vec rho)/dt = L vec(rho) (column-major vec):
/// commutator with the effective Hamiltonian plus dissipators at rates kappa,
/// gamma_m*(N_th+1) and gamma_m*N_th.
SparseCd build_liouvillian(const LindbladModel& model, const TruncationSpec& trunc);

enum class SteadySolver { PrecondGmres, SparseLU, TimeEvolution };

struct SteadyStateOptionsL {
    double residual_tol = 1e-10; // ||L rho|| / (||L||_F ||rho||_F)
    int direct_max_dim = 40000;  // D^2 above which sparse LU is not attempted
    bool allow_evolve_fallback = true;
    double evolve_t_max = 4000.0;
    double positivity_slack = 1e-8;
};

struct SteadyStateResult {
    DensityMatrix state;
    double residual = 0.0;
    SteadySolver backend = SteadySolver::PrecondGmres;
};

/// Steady state as the null vector of L with the trace constraint substituted
/// into the linear system. The model-aware overload first runs GMRES
/// preconditioned with the shifted no-jump (Sylvester) part of the
/// Liouvillian; both fall back to sparse LU and then to time evolution.
/// Throws SolverFailureError when nothing reaches the residual tolerance.
SteadyStateResult steady_state(const LindbladModel& model,
                               const TruncationSpec& trunc,
                               const SteadyStateOptionsL& options = {});
SteadyStateResult steady_state(const SparseCd& liouvillian,
                               const TruncationSpec& trunc,
                               const SteadyStateOptionsL& options = {});

struct EvolveControls {
    double rtol = 1e-8;
    double atol = 1e-10;
};

struct TrajectoryPoint {
    double t = 0.0;
    DensityMatrix state; // raw integrator output (no renormalization)
};

/// Time-ordered snapshots at n_snapshots uniformly spaced times in
/// (0, t_final].
std::vector<TrajectoryPoint> evolve(const SparseCd& liouvillian,
                                    const DensityMatrix& rho0, double t_final,
                                    const EvolveControls& controls = {},
                                    int n_snapshots = 10);

/// eps_T = eta*kappa*tr(rho dc)/eps_p and derived transmission fields.
ResponsePoint extract_response(const DensityMatrix& state, double eta,
                               double kappa, Complex eps_p, double delta_prime);

struct ConvergenceRow {
    TruncationSpec trunc;
    Complex mean_cavity{0.0, 0.0};
    double diff = 0.0; // relative change vs previous rung
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool converged = false; // last two rungs agree within 1e-4 relative
};

/// Requires a ladder of at least 3 non-decreasing truncations.
ConvergenceTable convergence_sweep(const LindbladModel& model,
                                   const std::vector<TruncationSpec>& ladder,
                                   const SteadyStateOptionsL& options = {});

struct LindbladComparisonRow {
    double delta_prime = 0.0;
    Complex eps_t_numeric{0.0, 0.0};
    Complex eps_t_analytic{0.0, 0.0};
    double abs_err = 0.0;
};

/// Numeric (master equation) vs analytic response over a detuning grid;
/// grid points solve independently and may run concurrently.
std::vector<LindbladComparisonRow> lindblad_vs_analytic(
    const SystemParams& params, const WorkingPoint& wp, const DriveSet& drives,
    double n_thermal, const TruncationSpec& trunc, const std::vector<double>& grid,
    const SteadyStateOptionsL& options = {});

/// Cutoffs sized to the drive strengths and thermal tail mass used in the
/// figure-level runs.
TruncationSpec default_truncation(double n_thermal);

} // namespace omprobe
