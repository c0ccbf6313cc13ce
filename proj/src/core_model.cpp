// core_model.cpp — steady state, stability census, working-point inversion

#include "omprobe/core_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "omprobe/errors.hpp"

namespace omprobe {

namespace {

const Complex kI{0.0, 1.0};

double beta_coefficient(const SystemParams& p, const DriveSet& d) {
    // Delta = delta0 - beta/(Delta^2 + kappa^2/4) with
    // beta = 2*g0^2*omega_m*|eps_c|^2/(omega_m^2 + gamma_m^2/4).
    const double om2 = p.omega_m * p.omega_m + 0.25 * p.gamma_m * p.gamma_m;
    return 2.0 * p.g0 * p.g0 * p.omega_m * std::norm(d.control) / om2;
}

Complex cavity_amp_at(const SystemParams& p, const DriveSet& d, double delta) {
    return d.control / (kI * delta + 0.5 * p.kappa);
}

Complex mech_amp_at(const SystemParams& p, Complex c_s) {
    return kI * p.g0 * std::norm(c_s) / (kI * p.omega_m + 0.5 * p.gamma_m);
}

WorkingPoint assemble(const SystemParams& p, const DriveSet& d, double delta) {
    WorkingPoint wp;
    wp.detuning_eff = delta;
    wp.cavity_amp = cavity_amp_at(p, d, delta);
    wp.mech_amp = mech_amp_at(p, wp.cavity_amp);
    wp.coupling = p.g0 * wp.cavity_amp;
    const double phi_c = std::arg(d.control == Complex{} ? Complex{1.0, 0.0} : d.control);
    const double phi_p = std::arg(d.probe == Complex{} ? Complex{1.0, 0.0} : d.probe);
    const double phi_a = std::arg(d.mech_drive == Complex{} ? Complex{1.0, 0.0} : d.mech_drive);
    wp.total_phase = total_phase(p, phi_c, phi_a, phi_p);
    wp.cooperativity = 4.0 * std::norm(wp.coupling) / (p.kappa * p.gamma_m);
    wp.drive_ratio = d.drive_ratio();
    return wp;
}

} // namespace

double wrap_phase(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

SystemParams SystemParams::make(double kappa, double gamma_m, double omega_m,
                                double g0, double eta,
                                std::optional<double> delta0, RateUnits units,
                                double sideband_threshold) {
    if (!(kappa > 0.0)) throw std::invalid_argument("SystemParams: kappa must be > 0");
    if (!(gamma_m > 0.0)) throw std::invalid_argument("SystemParams: gamma_m must be > 0");
    if (!(omega_m > 0.0)) throw std::invalid_argument("SystemParams: omega_m must be > 0");
    if (g0 < 0.0) throw std::invalid_argument("SystemParams: g0 must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("SystemParams: eta must be in (0, 1]");

    SystemParams p;
    const double scale = (units == RateUnits::Absolute) ? kappa : 1.0;
    if (units == RateUnits::Kappa && kappa != 1.0)
        throw std::invalid_argument("SystemParams: kappa-normalized input requires kappa == 1");
    p.kappa = 1.0;
    p.gamma_m = gamma_m / scale;
    p.omega_m = omega_m / scale;
    p.g0 = g0 / scale;
    p.eta = eta;
    if (delta0) p.delta0 = *delta0 / scale;
    p.rate_scale = scale;

    if (p.omega_m / p.kappa <= sideband_threshold) {
        std::ostringstream os;
        os << "omega_m/kappa = " << p.omega_m
           << " does not exceed the resolved-sideband threshold " << sideband_threshold
           << "; RWA-based operations may be inaccurate";
        p.warnings.push_back(os.str());
    }
    return p;
}

DriveSet DriveSet::make(Complex control, Complex probe, Complex mech_drive,
                        double delta_prime, RateUnits units,
                        double kappa_absolute, double weak_ratio) {
    const double scale = (units == RateUnits::Absolute) ? kappa_absolute : 1.0;
    if (!(scale > 0.0)) throw std::invalid_argument("DriveSet: kappa_absolute must be > 0");
    DriveSet d;
    d.control = control / scale;
    d.probe = probe / scale;
    d.mech_drive = mech_drive / scale;
    d.delta_prime = delta_prime / scale;

    const double c = std::abs(d.control);
    if (c > 0.0) {
        if (std::abs(d.probe) > weak_ratio * c)
            d.warnings.push_back("|eps_p|/|eps_c| exceeds the linear-response ratio check");
        if (std::abs(d.mech_drive) > weak_ratio * c)
            d.warnings.push_back("|eps_a|/|eps_c| exceeds the linear-response ratio check");
    }
    return d;
}

double DriveSet::drive_ratio() const {
    const double p = std::abs(probe);
    const double a = std::abs(mech_drive);
    if (p == 0.0) return a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return a / p;
}

double total_phase(const SystemParams& params, double phi_c, double phi_a,
                   double phi_p) {
    return wrap_phase(std::atan(params.kappa / (2.0 * params.omega_m)) + phi_c + phi_a - phi_p);
}

namespace detail {

std::vector<double> cubic_real_roots(double a, double b, double c) {
    // x^3 + a x^2 + b x + c, depressed via x = t - a/3.
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = q * q / 4.0 + p * p * p / 27.0;

    std::vector<double> roots;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-q / 2.0 + s);
        const double v = std::cbrt(-q / 2.0 - s);
        roots.push_back(u + v - a / 3.0);
    } else if (disc == 0.0) {
        const double u = std::cbrt(-q / 2.0);
        roots.push_back(2.0 * u - a / 3.0);
        roots.push_back(-u - a / 3.0);
    } else {
        const double r = std::sqrt(-p * p * p / 27.0);
        const double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
        const double m = 2.0 * std::sqrt(-p / 3.0);
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos((phi + kTwoPi * k) / 3.0) - a / 3.0);
    }

    // Newton polish; cubic coefficients can span many decades.
    for (double& x : roots) {
        for (int it = 0; it < 60; ++it) {
            const double f = ((x + a) * x + b) * x + c;
            const double df = (3.0 * x + 2.0 * a) * x + b;
            if (df == 0.0) break;
            const double step = f / df;
            x -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
        }
    }
    std::sort(roots.begin(), roots.end());
    // Merge spurious near-duplicates from the polish.
    std::vector<double> unique;
    for (double x : roots) {
        if (unique.empty() || std::abs(x - unique.back()) > 1e-9 * std::max(1.0, std::abs(x)))
            unique.push_back(x);
    }
    return unique;
}

bool working_point_stable(const SystemParams& p, double delta, Complex G) {
    // Linearized flow on (Re dc, Im dc, Re db, Im db).
    const double gr = G.real(), gi = G.imag();
    const double k2 = 0.5 * p.kappa, gm2 = 0.5 * p.gamma_m;
    const double M[4][4] = {
        {-k2, delta, -2.0 * gi, 0.0},
        {-delta, -k2, 2.0 * gr, 0.0},
        {0.0, 0.0, -gm2, p.omega_m},
        {2.0 * gr, 2.0 * gi, -p.omega_m, -gm2},
    };

    // Characteristic polynomial lambda^4 + c1 l^3 + c2 l^2 + c3 l + c4
    // via Faddeev-LeVerrier.
    auto matmul = [](const double A[4][4], const double B[4][4], double C[4][4]) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += A[i][k] * B[k][j];
                C[i][j] = s;
            }
    };
    auto trace = [](const double A[4][4]) {
        return A[0][0] + A[1][1] + A[2][2] + A[3][3];
    };

    double Mk[4][4], tmp[4][4];
    std::copy(&M[0][0], &M[0][0] + 16, &Mk[0][0]);
    double coeff[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
    for (int k = 1; k <= 4; ++k) {
        coeff[k] = -trace(Mk) / k;
        if (k == 4) break;
        for (int i = 0; i < 4; ++i) Mk[i][i] += coeff[k];
        matmul(M, Mk, tmp);
        std::copy(&tmp[0][0], &tmp[0][0] + 16, &Mk[0][0]);
    }
    const double a1 = coeff[1], a2 = coeff[2], a3 = coeff[3], a4 = coeff[4];

    // Routh-Hurwitz for a quartic.
    if (!(a1 > 0.0 && a3 > 0.0 && a4 > 0.0)) return false;
    return a1 * a2 * a3 > a3 * a3 + a1 * a1 * a4;
}

} // namespace detail

SteadyStateRoots steady_state_roots(const SystemParams& p, const DriveSet& d) {
    if (!p.delta0) throw std::invalid_argument("steady_state_roots: delta0 is required");
    const double d0 = *p.delta0;
    const double beta = beta_coefficient(p, d);
    const double k24 = 0.25 * p.kappa * p.kappa;
    // (d0 - Delta)(Delta^2 + kappa^2/4) = beta
    // -> Delta^3 - d0 Delta^2 + k24 Delta + (beta - d0*k24) = 0
    auto roots = detail::cubic_real_roots(-d0, k24, beta - d0 * k24);

    SteadyStateRoots out;
    for (double delta : roots) {
        const Complex c_s = cavity_amp_at(p, d, delta);
        out.detunings.push_back(delta);
        out.stable.push_back(detail::working_point_stable(p, delta, p.g0 * c_s));
    }
    return out;
}

WorkingPoint solve_steady_state(const SystemParams& p, const DriveSet& d,
                                const SteadyStateOptions& opt) {
    if (!p.delta0)
        throw std::invalid_argument("solve_steady_state: delta0 is required "
                                    "(use working_point_from_G for preset-style input)");
    const double d0 = *p.delta0;
    const double beta = beta_coefficient(p, d);
    const double k24 = 0.25 * p.kappa * p.kappa;

    const SteadyStateRoots census = steady_state_roots(p, d);
    const int n_stable = static_cast<int>(std::count(census.stable.begin(), census.stable.end(), true));
    if (n_stable > 1) {
        std::ostringstream os;
        os << "solve_steady_state: " << n_stable << " stable roots detected; caller must select";
        throw MultistableError(os.str(), census.detunings, census.stable);
    }

    // Damped fixed-point iteration on Delta.
    double delta = d0;
    bool converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double next = (1.0 - opt.relaxation) * delta +
                            opt.relaxation * (d0 - beta / (delta * delta + k24));
        const double change = std::abs(next - delta);
        delta = next;
        if (change <= opt.tolerance * std::max(1.0, std::abs(delta))) {
            converged = true;
            break;
        }
    }

    if (!converged) {
        // Fall back to the cubic census.
        int idx = -1;
        for (std::size_t i = 0; i < census.stable.size(); ++i)
            if (census.stable[i]) idx = static_cast<int>(i);
        if (idx < 0)
            throw NonConvergenceError("solve_steady_state: fixed point did not converge "
                                      "and no stable cubic root exists");
        delta = census.detunings[static_cast<std::size_t>(idx)];
    }

    // Newton polish on f(Delta) = Delta - d0 + beta/(Delta^2 + k24).
    for (int it = 0; it < 50; ++it) {
        const double den = delta * delta + k24;
        const double f = delta - d0 + beta / den;
        const double df = 1.0 - beta * 2.0 * delta / (den * den);
        if (df == 0.0) break;
        const double step = f / df;
        delta -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(delta))) break;
    }

    if (!detail::working_point_stable(p, delta, p.g0 * cavity_amp_at(p, d, delta))) {
        if (n_stable == 0)
            throw NonConvergenceError("solve_steady_state: no stable steady state "
                                      "(parametric instability region)");
        // Fixed point settled on an unstable branch; use the stable root.
        for (std::size_t i = 0; i < census.stable.size(); ++i)
            if (census.stable[i]) delta = census.detunings[i];
    }

    return assemble(p, d, delta);
}

PreparedSystem working_point_from_G(const SystemParams& base, Complex G_target,
                                    double detuning_eff, double y,
                                    double phi_total_target, double probe_mag,
                                    double delta_prime, PhaseConvention convention) {
    if (!(probe_mag > 0.0))
        throw std::invalid_argument("working_point_from_G: probe magnitude must be > 0");
    if (y < 0.0) throw std::invalid_argument("working_point_from_G: drive ratio must be >= 0");
    const double g_mag = std::abs(G_target);
    if (g_mag > 0.0 && base.g0 <= 0.0)
        throw std::invalid_argument("working_point_from_G: nonzero coupling requires g0 > 0");

    SystemParams p = base;
    const Complex resp{0.5 * p.kappa, detuning_eff}; // i*Delta + kappa/2

    double phi_c = 0.0;
    double control_mag = 0.0;
    Complex b_s{0.0, 0.0};
    if (g_mag > 0.0) {
        const double c_mag = g_mag / p.g0;
        control_mag = c_mag * std::abs(resp);
        // arg(c_s) = phi_c - arg(i*Delta + kappa/2); make arg(G) come out right.
        phi_c = std::arg(G_target) + std::arg(resp);
        b_s = kI * p.g0 * c_mag * c_mag / (kI * p.omega_m + 0.5 * p.gamma_m);
    }
    p.delta0 = detuning_eff + p.g0 * 2.0 * b_s.real();

    const double arctan_term = std::atan(p.kappa / (2.0 * p.omega_m));
    const double phi_p = 0.0;
    double phi_a = phi_total_target - arctan_term - phi_c + phi_p;
    if (convention == PhaseConvention::ResolvedSidebandApprox)
        phi_a += arctan_term; // realize Phi ~ phi_c + phi_a - phi_p instead

    DriveSet d = DriveSet::make(std::polar(control_mag, phi_c),
                                std::polar(probe_mag, phi_p),
                                std::polar(y * probe_mag, phi_a), delta_prime);

    // The target root solves the self-consistency exactly by construction;
    // build the working point there instead of re-running root selection
    // (other stable roots may exist under strong driving, but the prepared
    // system pins this one).
    if (!detail::working_point_stable(p, detuning_eff,
                                      p.g0 * cavity_amp_at(p, d, detuning_eff)))
        throw NonConvergenceError("working_point_from_G: requested working point is "
                                  "dynamically unstable");
    WorkingPoint wp = assemble(p, d, detuning_eff);
    return PreparedSystem{std::move(p), std::move(d), std::move(wp)};
}

ResponsePoint make_response_point(double delta_prime, Complex eps_t) {
    ResponsePoint r;
    r.delta_prime = delta_prime;
    r.eps_t = eps_t;
    r.transmission = Complex{-1.0, 0.0} + eps_t;
    r.power_transmission = std::norm(r.transmission);
    return r;
}

} // namespace omprobe
