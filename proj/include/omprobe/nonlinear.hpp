// nonlinear.hpp — full nonlinear mean-field dynamics and sideband extraction

#pragma once

#include <vector>

#include "omprobe/core_model.hpp"
#include "omprobe/types.hpp"

namespace omprobe {

struct MeanFieldControls {
    double rtol = 1e-10;
    double atol = 1e-12;
    double settle_time = -1.0;      // < 0 -> 20/gamma_m
    double fit_periods = 50.0;      // drive periods in the fit window
    int samples_per_period = 32;
    double full_series_dt = 0.0;    // > 0 -> sample the whole run at this step
};

/// Sampled mean-field trajectory; times in units of 1/kappa.
struct TimeSeries {
    std::vector<double> t;
    std::vector<Complex> cavity;
    std::vector<Complex> mech;
};

/// Integrates the nonlinear mean-field equations (noise means dropped)
/// starting from the self-consistent (c_s, b_s). Returns samples over the fit
/// window [t_final - fit_periods*T_a, t_final] (or the whole run when
/// full_series_dt is set). t_final < 0 selects settle_time + fit window.
/// Throws DivergenceError if the trajectory leaves the finite domain.
TimeSeries integrate_mean_field(const SystemParams& params, const DriveSet& drives,
                                double t_final = -1.0,
                                const MeanFieldControls& controls = {});

struct FitWindow {
    double t_begin = 0.0;
    double t_end = 0.0;
};

/// Static component plus the e^{-i w t} / e^{+i w t} sideband coefficients of
/// cavity(t) - reference over the window, by least squares. The window is
/// truncated to an integer number of 2*pi/omega_a periods; IllConditioned if
/// it covers less than one.
struct SidebandFit {
    Complex dc{0.0, 0.0};
    Complex amp_plus{0.0, 0.0};  // coefficient of e^{-i omega_a t}
    Complex amp_minus{0.0, 0.0}; // coefficient of e^{+i omega_a t}
    double residual = 0.0;       // relative L2 misfit
    int periods_used = 0;
    std::vector<std::string> warnings; // e.g. window under 10 periods
};

SidebandFit fit_sidebands(const TimeSeries& series, double omega_a,
                          const FitWindow& window, Complex reference);

/// One convenience call: prepare drives at the working point, integrate,
/// fit, and return the nonlinear estimate of eps_T.
struct NonlinearResponse {
    ResponsePoint point;         // from amp_plus
    SidebandFit fit;
    WorkingPoint working_point;
};

NonlinearResponse nonlinear_response(const SystemParams& params,
                                     const DriveSet& drives,
                                     const MeanFieldControls& controls = {});

struct LinearityLadderRow {
    double eps_ratio = 0.0; // |eps_p/eps_c|
    double margin = 0.0;    // sqrt(T_max)*|eps_p/eps_c|
    double rel_deviation = 0.0;
    LinearityFlag flag = LinearityFlag::Pass;
};

struct LinearityReport {
    std::vector<LinearityLadderRow> rows;
    double t_max_estimate = 0.0;
};

/// Tabulates nonlinear-vs-analytic deviation against the linear-regime margin
/// over a ladder of probe strengths at fixed y and Phi.
LinearityReport validate_linearity(const SystemParams& base, Complex coupling,
                                   double phi_total, double drive_ratio,
                                   double delta_prime,
                                   const std::vector<double>& eps_ratios,
                                   const MeanFieldControls& controls = {});

} // namespace omprobe
