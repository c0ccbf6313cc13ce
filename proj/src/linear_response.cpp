// linear_response.cpp

#include "omprobe/linear_response.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "omprobe/errors.hpp"
#include "omprobe/parallel.hpp"

namespace omprobe {

namespace {

const Complex kI{0.0, 1.0};

// 2x2 complex solve with partial pivoting; kept free of the closed-form
// algebra so the two routes stay independent checks of each other.
std::array<Complex, 2> solve_2x2(std::array<std::array<Complex, 2>, 2> a,
                                 std::array<Complex, 2> rhs) {
    if (std::abs(a[0][0]) < std::abs(a[1][0])) {
        std::swap(a[0], a[1]);
        std::swap(rhs[0], rhs[1]);
    }
    const Complex m = a[1][0] / a[0][0];
    a[1][1] -= m * a[0][1];
    rhs[1] -= m * rhs[0];
    const Complex x1 = rhs[1] / a[1][1];
    const Complex x0 = (rhs[0] - a[0][1] * x1) / a[0][0];
    return {x0, x1};
}

} // namespace

ResponsePoint response_exact(const WorkingPoint& wp, const SystemParams& p,
                             Complex eps_p, Complex eps_a, double delta_prime) {
    if (eps_p == Complex{})
        throw std::invalid_argument("response_exact: eps_p must be nonzero");

    const Complex a00{0.5 * p.kappa, -delta_prime};
    const Complex a11{0.5 * p.gamma_m, -delta_prime};
    const Complex a01 = -kI * wp.coupling;
    const Complex a10 = -kI * std::conj(wp.coupling);

    const Complex det = a00 * a11 - a01 * a10;
    if (std::abs(det) < 1e-300)
        throw SingularSystemError("response_exact: singular response system");

    const auto [dc, db] = solve_2x2({{{a00, a01}, {a10, a11}}}, {eps_p, eps_a});
    (void)db;
    return make_response_point(delta_prime, p.eta * p.kappa * dc / eps_p);
}

ClosedFormResponse response_closed_form(const WorkingPoint& wp,
                                        const SystemParams& p, double eps_p_mag,
                                        double eps_a_mag, double phi_total,
                                        double delta_prime) {
    if (!(eps_p_mag > 0.0))
        throw std::invalid_argument("response_closed_form: eps_p magnitude must be > 0");

    const Complex chi_c{0.5 * p.kappa, -delta_prime};   // kappa/2 - i*delta'
    const Complex chi_m{0.5 * p.gamma_m, -delta_prime}; // gamma_m/2 - i*delta'
    const double g_mag = std::abs(wp.coupling);
    const Complex denom = chi_c * chi_m + g_mag * g_mag;
    if (std::abs(denom) < 1e-300)
        throw SingularSystemError("response_closed_form: singular denominator");

    ClosedFormResponse out;
    const double scale = p.eta * p.kappa / eps_p_mag;
    out.omit_term = scale * eps_p_mag * chi_m / denom;
    out.parametric_term = scale * eps_a_mag * g_mag * std::exp(kI * phi_total) / denom;
    out.point = make_response_point(delta_prime, out.omit_term + out.parametric_term);
    return out;
}

WeakControlResponse response_weak_control(const SystemParams& p,
                                          double eps_p_mag, double eps_a_mag,
                                          double g_mag, double phi_total,
                                          double delta_prime) {
    if (!(eps_p_mag > 0.0))
        throw std::invalid_argument("response_weak_control: eps_p magnitude must be > 0");

    WeakControlResponse out;
    out.cooperativity = 4.0 * g_mag * g_mag / (p.kappa * p.gamma_m);
    if (out.cooperativity > 0.01) {
        std::ostringstream os;
        os << "weak-control approximation outside its regime: C = " << out.cooperativity
           << " > 0.01";
        out.regime_warning = os.str();
    }

    const Complex chi_c{0.5 * p.kappa, -delta_prime};
    const Complex chi_m{0.5 * p.gamma_m, -delta_prime};
    const Complex dc = eps_p_mag / chi_c +
                       2.0 * eps_a_mag * g_mag * std::exp(kI * phi_total) / (p.kappa * chi_m);
    out.point = make_response_point(delta_prime, p.eta * p.kappa * dc / eps_p_mag);
    return out;
}

Spectrum compute_spectrum(const WorkingPoint& wp, const SystemParams& p,
                          const DriveSet& drives, const std::vector<double>& grid,
                          ResponseMethod method) {
    if (grid.empty()) throw std::invalid_argument("compute_spectrum: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("compute_spectrum: grid must be strictly increasing");

    Spectrum s;
    s.working_point = wp;
    s.method = method;
    s.points.resize(grid.size());

    const double eps_p_mag = std::abs(drives.probe);
    const double eps_a_mag = std::abs(drives.mech_drive);
    const double g_mag = std::abs(wp.coupling);

    std::exception_ptr first_error;
    std::mutex error_mutex;
    parallel_for(grid.size(), [&](std::size_t i) {
        try {
            switch (method) {
            case ResponseMethod::Exact:
                s.points[i] = response_exact(wp, p, drives.probe, drives.mech_drive, grid[i]);
                break;
            case ResponseMethod::ClosedForm:
                s.points[i] = response_closed_form(wp, p, eps_p_mag, eps_a_mag,
                                                   wp.total_phase, grid[i]).point;
                break;
            case ResponseMethod::WeakControl:
                s.points[i] = response_weak_control(p, eps_p_mag, eps_a_mag, g_mag,
                                                    wp.total_phase, grid[i]).point;
                break;
            }
        } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex);
            if (!first_error) {
                std::ostringstream os;
                os << "compute_spectrum: grid index " << i << " (delta' = " << grid[i]
                   << "): " << e.what();
                first_error = std::make_exception_ptr(std::runtime_error(os.str()));
            }
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    return s;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
    if (points < 1) throw std::invalid_argument("linear_grid: points must be >= 1");
    if (points == 1) return {lo};
    if (!(hi > lo)) throw std::invalid_argument("linear_grid: hi must exceed lo");
    std::vector<double> g(static_cast<std::size_t>(points));
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + step * i;
    return g;
}

std::vector<double> wide_grid(const SystemParams& p, int points) {
    return linear_grid(-p.kappa, p.kappa, points);
}

std::vector<double> narrow_grid(const SystemParams& p, int points) {
    return linear_grid(-5.0 * p.gamma_m, 5.0 * p.gamma_m, points);
}

RegimeReport classify_regime(const WorkingPoint& wp, const SystemParams& p,
                             double y) {
    RegimeReport r;
    r.cooperativity = wp.cooperativity;
    if (wp.cooperativity > 1.0)
        r.label = RegimeLabel::GwiLike;
    else if (wp.cooperativity < 0.01)
        r.label = RegimeLabel::WeakControl;
    else
        r.label = RegimeLabel::Transitional;

    if (y > 0.0) {
        r.amp_window_phi0 = RegimeReport::Window{0.0, 0.5 * y * p.kappa};
        r.amp_window_phipi = RegimeReport::Window{p.gamma_m / (2.0 * y),
                                                  std::numeric_limits<double>::infinity()};
        r.g_max_gain = 0.5 * std::sqrt(p.kappa * p.gamma_m);
        r.g_absorb_phi0 = y * p.kappa;
        r.g_absorb_phipi = p.gamma_m / (4.0 * y);
        r.t_max_estimate = y * y * p.kappa / p.gamma_m;
    } else {
        r.t_max_estimate = 0.0; // standard OMIT, no phase-dependent windows
    }
    return r;
}

LinearityCheck linearity_bound(double t_max_estimate, double eps_p_mag,
                               double eps_c_mag) {
    if (!(eps_c_mag > 0.0))
        throw std::invalid_argument("linearity_bound: eps_c magnitude must be > 0");
    if (t_max_estimate < 0.0)
        throw std::invalid_argument("linearity_bound: negative T_max estimate");

    LinearityCheck c;
    c.margin = std::sqrt(t_max_estimate) * eps_p_mag / eps_c_mag;
    if (c.margin <= 0.1)
        c.flag = LinearityFlag::Pass;
    else if (c.margin <= 0.3)
        c.flag = LinearityFlag::Warn;
    else
        c.flag = LinearityFlag::Fail;
    return c;
}

} // namespace omprobe
