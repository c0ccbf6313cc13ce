// types.hpp — core value types shared by all modules

#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace omprobe {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Reduce an angle to [0, 2*pi).
double wrap_phase(double phi);

enum class RateUnits { Kappa, Absolute };

/// Physical rates and couplings of the optomechanical device. All rates are
/// stored in units of the cavity decay rate (kappa == 1 after construction);
/// rate_scale records the original kappa so absolute quantities can be
/// reconstructed.
struct SystemParams {
    double kappa = 1.0;   // cavity decay rate (== 1 internally)
    double gamma_m = 0.0; // mechanical decay rate
    double omega_m = 0.0; // mechanical frequency
    double g0 = 0.0;      // single-photon optomechanical coupling
    double eta = 0.0;     // cavity-waveguide coupling, kappa_ex = eta*kappa
    std::optional<double> delta0; // bare control-cavity detuning
    double rate_scale = 1.0;      // original kappa in the caller's units

    std::vector<std::string> warnings; // soft-check messages (non-fatal)

    /// Validates invariants (kappa, gamma_m, omega_m > 0; g0 >= 0;
    /// 0 < eta <= 1) and normalizes so kappa == 1. A warning is recorded when
    /// omega_m/kappa does not exceed sideband_threshold.
    static SystemParams make(double kappa, double gamma_m, double omega_m,
                             double g0, double eta,
                             std::optional<double> delta0 = std::nullopt,
                             RateUnits units = RateUnits::Kappa,
                             double sideband_threshold = 5.0);

    SystemParams with_delta0(double value) const {
        SystemParams p = *this;
        p.delta0 = value;
        return p;
    }
};

/// The three coherent drive amplitudes and the two-photon detuning
/// delta' = omega_a - omega_m, all in units of kappa.
struct DriveSet {
    Complex control{0.0, 0.0};    // eps_c
    Complex probe{0.0, 0.0};      // eps_p
    Complex mech_drive{0.0, 0.0}; // eps_a
    double delta_prime = 0.0;

    std::vector<std::string> warnings;

    /// Records a warning when |probe| or |mech_drive| exceeds
    /// weak_ratio*|control| (linear-response validity soft check).
    static DriveSet make(Complex control, Complex probe, Complex mech_drive,
                         double delta_prime, RateUnits units = RateUnits::Kappa,
                         double kappa_absolute = 1.0, double weak_ratio = 0.1);

    double drive_ratio() const; // y = |mech_drive/probe|
};

/// Self-consistent strong-field working point and all derived quantities.
struct WorkingPoint {
    Complex cavity_amp{0.0, 0.0}; // c_s
    Complex mech_amp{0.0, 0.0};   // b_s
    double detuning_eff = 0.0;    // Delta = delta0 - g0*(b_s + conj(b_s))
    Complex coupling{0.0, 0.0};   // G = g0 * c_s
    double total_phase = 0.0;     // Phi, reduced to [0, 2*pi)
    double cooperativity = 0.0;   // C = 4|G|^2/(kappa*gamma_m)
    double drive_ratio = 0.0;     // y = |eps_a/eps_p|
};

/// One row of a probe-response spectrum.
struct ResponsePoint {
    double delta_prime = 0.0;
    Complex eps_t{0.0, 0.0};        // eps_T = eta*kappa*<dc>/eps_p
    Complex transmission{0.0, 0.0}; // script T = -1 + eps_T
    double power_transmission = 0.0; // T = |script T|^2
};

/// Builds the dependent fields from eps_T.
ResponsePoint make_response_point(double delta_prime, Complex eps_t);

enum class ResponseMethod { Exact, ClosedForm, WeakControl };

struct Spectrum {
    WorkingPoint working_point;
    ResponseMethod method = ResponseMethod::Exact;
    std::vector<ResponsePoint> points;
};

enum class RegimeLabel { GwiLike, WeakControl, Transitional };

struct RegimeReport {
    double cooperativity = 0.0;
    RegimeLabel label = RegimeLabel::Transitional;
    // Amplification windows in |G| (T > 1 at resonance); absent when y == 0.
    struct Window {
        double lo = 0.0;
        double hi = 0.0; // +inf allowed
    };
    std::optional<Window> amp_window_phi0;  // (0, y*kappa/2)
    std::optional<Window> amp_window_phipi; // (gamma_m/(2y), inf)
    std::optional<double> g_max_gain;       // sqrt(kappa*gamma_m)/2
    std::optional<double> g_absorb_phi0;    // ~ y*kappa
    std::optional<double> g_absorb_phipi;   // ~ gamma_m/(4y)
    double t_max_estimate = 0.0; // y^2*kappa/gamma_m
};

enum class LinearityFlag { Pass, Warn, Fail };

struct LinearityCheck {
    double margin = 0.0; // sqrt(T_max)*|eps_p/eps_c|
    LinearityFlag flag = LinearityFlag::Pass;
};

} // namespace omprobe
