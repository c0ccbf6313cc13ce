// nonlinear.cpp

#include "omprobe/nonlinear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "omprobe/errors.hpp"
#include "omprobe/linear_response.hpp"
#include "omprobe/ode.hpp"

namespace omprobe {

namespace {

const Complex kI{0.0, 1.0};
using State = Eigen::Vector2cd;

struct MeanFieldRhs {
    const SystemParams& p;
    const DriveSet& d;
    double delta0;
    double omega_a;

    void operator()(double t, const State& y, State& dy) const {
        const Complex c = y[0], b = y[1];
        const Complex drive_phase = std::exp(-kI * (omega_a * t));
        dy[0] = -(kI * delta0 + 0.5 * p.kappa) * c + kI * p.g0 * c * (b + std::conj(b)) +
                d.control + d.probe * drive_phase;
        dy[1] = -(kI * p.omega_m + 0.5 * p.gamma_m) * b + kI * p.g0 * std::norm(c) +
                d.mech_drive * drive_phase;
    }
};

} // namespace

TimeSeries integrate_mean_field(const SystemParams& p, const DriveSet& d,
                                double t_final, const MeanFieldControls& ctl) {
    if (!p.delta0)
        throw std::invalid_argument("integrate_mean_field: delta0 is required");
    const double omega_a = p.omega_m + d.delta_prime;
    if (!(omega_a > 0.0))
        throw std::invalid_argument("integrate_mean_field: omega_a must be > 0");

    const double period = kTwoPi / omega_a;
    const double settle = (ctl.settle_time >= 0.0) ? ctl.settle_time : 20.0 / p.gamma_m;
    const double window = ctl.fit_periods * period;
    if (t_final < 0.0) t_final = settle + window;
    if (!(t_final > 0.0)) throw std::invalid_argument("integrate_mean_field: empty time span");

    const WorkingPoint wp = solve_steady_state(p, d);
    State y;
    y << wp.cavity_amp, wp.mech_amp;

    OdeControls ode;
    ode.rtol = ctl.rtol;
    ode.atol = ctl.atol;

    MeanFieldRhs rhs{p, d, *p.delta0, omega_a};

    TimeSeries out;
    if (ctl.full_series_dt > 0.0) {
        const auto n = static_cast<std::size_t>(std::ceil(t_final / ctl.full_series_dt));
        out.t.reserve(n + 1);
        out.cavity.reserve(n + 1);
        out.mech.reserve(n + 1);
        double t = 0.0;
        out.t.push_back(t);
        out.cavity.push_back(y[0]);
        out.mech.push_back(y[1]);
        for (std::size_t i = 1; i <= n; ++i) {
            const double target = std::min(t_final, static_cast<double>(i) * ctl.full_series_dt);
            integrate_dopri5(rhs, y, t, target, ode);
            t = target;
            out.t.push_back(t);
            out.cavity.push_back(y[0]);
            out.mech.push_back(y[1]);
        }
        return out;
    }

    const double window_begin = std::max(0.0, t_final - window);
    integrate_dopri5(rhs, y, 0.0, window_begin, ode);

    const int samples = static_cast<int>(std::lround(ctl.fit_periods * ctl.samples_per_period));
    out.t.reserve(static_cast<std::size_t>(samples) + 1);
    out.cavity.reserve(static_cast<std::size_t>(samples) + 1);
    out.mech.reserve(static_cast<std::size_t>(samples) + 1);
    double t = window_begin;
    out.t.push_back(t);
    out.cavity.push_back(y[0]);
    out.mech.push_back(y[1]);
    const double dt_sample = (t_final - window_begin) / samples;
    for (int i = 1; i <= samples; ++i) {
        const double target = window_begin + dt_sample * i;
        integrate_dopri5(rhs, y, t, target, ode);
        t = target;
        out.t.push_back(t);
        out.cavity.push_back(y[0]);
        out.mech.push_back(y[1]);
    }
    return out;
}

SidebandFit fit_sidebands(const TimeSeries& series, double omega_a,
                          const FitWindow& window, Complex reference) {
    if (series.t.size() < 3 || series.t.size() != series.cavity.size())
        throw std::invalid_argument("fit_sidebands: series too short or inconsistent");
    if (!(omega_a > 0.0)) throw std::invalid_argument("fit_sidebands: omega_a must be > 0");

    const double period = kTwoPi / omega_a;
    const double span = window.t_end - window.t_begin;
    const int periods = static_cast<int>(std::floor(span / period + 1e-9));
    if (periods < 1)
        throw IllConditionedError("fit_sidebands: window covers less than one drive period");

    SidebandFit fit;
    fit.periods_used = periods;
    if (periods < 10)
        fit.warnings.push_back("fit window covers fewer than 10 drive periods");

    const double t_end = window.t_begin + periods * period;

    Eigen::Matrix3cd gram = Eigen::Matrix3cd::Zero();
    Eigen::Vector3cd proj = Eigen::Vector3cd::Zero();
    std::size_t used = 0;
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        const double t = series.t[i];
        if (t < window.t_begin - 1e-12 || t > t_end + 1e-12) continue;
        const Complex basis[3] = {Complex{1.0, 0.0}, std::exp(-kI * (omega_a * t)),
                                  std::exp(kI * (omega_a * t))};
        const Complex value = series.cavity[i] - reference;
        for (int r = 0; r < 3; ++r) {
            proj[r] += std::conj(basis[r]) * value;
            for (int c = 0; c < 3; ++c) gram(r, c) += std::conj(basis[r]) * basis[c];
        }
        ++used;
    }
    if (used < 6)
        throw IllConditionedError("fit_sidebands: fewer than 6 samples in the fit window");

    const Eigen::Vector3cd coeff = gram.fullPivLu().solve(proj);
    fit.dc = coeff[0];
    fit.amp_plus = coeff[1];
    fit.amp_minus = coeff[2];

    double misfit = 0.0, total = 0.0;
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        const double t = series.t[i];
        if (t < window.t_begin - 1e-12 || t > t_end + 1e-12) continue;
        const Complex model = coeff[0] + coeff[1] * std::exp(-kI * (omega_a * t)) +
                              coeff[2] * std::exp(kI * (omega_a * t));
        const Complex value = series.cavity[i] - reference;
        misfit += std::norm(value - model);
        total += std::norm(value);
    }
    fit.residual = (total > 0.0) ? std::sqrt(misfit / total) : 0.0;
    return fit;
}

NonlinearResponse nonlinear_response(const SystemParams& p, const DriveSet& d,
                                     const MeanFieldControls& ctl) {
    const double omega_a = p.omega_m + d.delta_prime;
    const TimeSeries series = integrate_mean_field(p, d, -1.0, ctl);
    const WorkingPoint wp = solve_steady_state(p, d);

    NonlinearResponse out;
    out.working_point = wp;
    out.fit = fit_sidebands(series, omega_a, FitWindow{series.t.front(), series.t.back()},
                            wp.cavity_amp);
    if (d.probe == Complex{})
        throw std::invalid_argument("nonlinear_response: eps_p must be nonzero");
    out.point = make_response_point(d.delta_prime,
                                    p.eta * p.kappa * out.fit.amp_plus / d.probe);
    return out;
}

LinearityReport validate_linearity(const SystemParams& base, Complex coupling,
                                   double phi_total, double y, double delta_prime,
                                   const std::vector<double>& eps_ratios,
                                   const MeanFieldControls& ctl) {
    if (eps_ratios.empty())
        throw std::invalid_argument("validate_linearity: empty probe ladder");

    // Reference working point fixes |eps_c|; the ladder scales only the weak
    // drives. T_max estimated from the closed-form spectrum on the wide grid.
    const PreparedSystem ref =
        working_point_from_G(base, coupling, base.omega_m, y, phi_total, 1e-6);
    const double eps_c_mag = std::abs(ref.drives.control);
    if (!(eps_c_mag > 0.0))
        throw std::invalid_argument("validate_linearity: coupling gives zero control drive");

    const Spectrum sweep = compute_spectrum(ref.working_point, ref.params, ref.drives,
                                            wide_grid(ref.params), ResponseMethod::ClosedForm);
    double t_max = 0.0;
    for (const auto& pt : sweep.points) t_max = std::max(t_max, pt.power_transmission);

    LinearityReport report;
    report.t_max_estimate = t_max;
    for (double ratio : eps_ratios) {
        LinearityLadderRow row;
        row.eps_ratio = ratio;
        if (ratio == 0.0) {
            row.margin = 0.0;
            row.rel_deviation = 0.0;
            row.flag = LinearityFlag::Pass;
            report.rows.push_back(row);
            continue;
        }
        if (ratio < 0.0)
            throw std::invalid_argument("validate_linearity: negative probe ratio");

        const PreparedSystem sys = working_point_from_G(base, coupling, base.omega_m, y,
                                                        phi_total, ratio * eps_c_mag,
                                                        delta_prime);
        const LinearityCheck check =
            linearity_bound(t_max, std::abs(sys.drives.probe), eps_c_mag);
        row.margin = check.margin;
        row.flag = check.flag;

        const NonlinearResponse nl = nonlinear_response(sys.params, sys.drives, ctl);
        const Complex analytic =
            response_closed_form(sys.working_point, sys.params, std::abs(sys.drives.probe),
                                 std::abs(sys.drives.mech_drive), sys.working_point.total_phase,
                                 delta_prime)
                .point.eps_t;
        row.rel_deviation = std::abs(nl.point.eps_t - analytic) /
                            std::max(std::abs(analytic), 1e-300);
        report.rows.push_back(row);
    }
    return report;
}

} // namespace omprobe
