// ode.hpp — adaptive Dormand–Prince 5(4) integrator over Eigen-style vectors

#pragma once

#include <cmath>
#include <limits>

#include "omprobe/errors.hpp"

namespace omprobe {

struct OdeControls {
    double rtol = 1e-10;
    double atol = 1e-12;
    double dt_initial = 0.0; // 0 -> chosen from the first derivative
    double dt_min = 1e-14;
    double dt_max = std::numeric_limits<double>::infinity();
    long long max_steps = 2'000'000'000;
    int max_rejects = 80;
};

/// Integrates y' = rhs(t, y) from t0 to t1 in place. rhs has signature
/// void(double t, const Vec&, Vec& dydt). Vec is an Eigen vector (dynamic or
/// fixed) with complex or real scalars.
template <typename Vec, typename Rhs>
void integrate_dopri5(Rhs&& rhs, Vec& y, double t0, double t1,
                      const OdeControls& ctl = {}) {
    if (!(t1 > t0)) return;

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                            a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;

    Vec k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y;
    double t = t0;
    rhs(t, y, k1);

    auto err_norm = [&](const Vec& e, const Vec& y0, const Vec& y1) {
        double acc = 0.0;
        const auto n = e.size();
        for (decltype(e.size()) i = 0; i < n; ++i) {
            const double sc = ctl.atol + ctl.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double q = std::abs(e[i]) / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(n > 0 ? n : 1));
    };

    double dt = ctl.dt_initial;
    if (dt <= 0.0) {
        const double d0 = std::sqrt(y.squaredNorm() / std::max<double>(1, y.size()));
        const double d1 = std::sqrt(k1.squaredNorm() / std::max<double>(1, y.size()));
        dt = (d1 > 0.0) ? 0.01 * (d0 + ctl.atol) / (d1 + ctl.atol) : 1e-6;
        dt = std::min(dt, (t1 - t0) / 10.0);
        if (!(dt > 0.0)) dt = 1e-6;
    }
    dt = std::min(dt, ctl.dt_max);

    int rejects_in_a_row = 0;
    for (long long step = 0; step < ctl.max_steps; ++step) {
        if (t >= t1) return;
        bool last = false;
        if (t + dt >= t1) {
            dt = t1 - t;
            last = true;
        }

        ytmp = y + dt * (a21 * k1);
        rhs(t + c2 * dt, ytmp, k2);
        ytmp = y + dt * (a31 * k1 + a32 * k2);
        rhs(t + c3 * dt, ytmp, k3);
        ytmp = y + dt * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * dt, ytmp, k4);
        ytmp = y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * dt, ytmp, k5);
        ytmp = y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + dt, ytmp, k6);
        ynew = y + dt * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(t + dt, ynew, k7);

        ytmp = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err = err_norm(ytmp, y, ynew);
        if (!std::isfinite(err))
            throw DivergenceError("integrate_dopri5: non-finite state (divergent trajectory)");

        if (err <= 1.0) {
            t = last ? t1 : t + dt;
            y.swap(ynew);
            k1.swap(k7);
            rejects_in_a_row = 0;
            const double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
            dt = std::min(ctl.dt_max, dt * std::min(5.0, std::max(0.2, grow)));
        } else {
            ++rejects_in_a_row;
            if (rejects_in_a_row > ctl.max_rejects)
                throw StepFailureError("integrate_dopri5: step rejection cascade");
            dt *= std::max(0.1, 0.9 * std::pow(err, -0.2));
            if (dt < ctl.dt_min)
                throw StepFailureError("integrate_dopri5: step size underflow");
        }
    }
    throw StepFailureError("integrate_dopri5: max step count exceeded");
}

} // namespace omprobe
