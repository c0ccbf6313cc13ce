// lindblad.cpp — Liouvillian assembly, steady-state solvers, time evolution

#include "omprobe/lindblad.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "omprobe/errors.hpp"
#include "omprobe/linear_response.hpp"
#include "omprobe/ode.hpp"
#include "omprobe/parallel.hpp"

namespace omprobe {

namespace {

const Complex kI{0.0, 1.0};

double frobenius_norm(const SparseCd& m) {
    double acc = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseCd::InnerIterator it(m, k); it; ++it) acc += std::norm(it.value());
    return std::sqrt(acc);
}

/// D[A] as a superoperator in column-major vec convention.
SparseCd dissipator(const SparseCd& a, const SparseCd& id) {
    const SparseCd adag = SparseCd(a.adjoint());
    const SparseCd adag_a = SparseCd(adag * a);
    SparseCd out = kron_sparse(SparseCd(a.conjugate()), a);
    out -= 0.5 * kron_sparse(id, adag_a);
    out -= 0.5 * kron_sparse(SparseCd(adag_a.transpose()), id);
    return out;
}

MatrixCd effective_hamiltonian(const LindbladModel& m, const TruncationSpec& t) {
    const SparseCd a = cavity_destroy(t);
    const SparseCd b = mech_destroy(t);
    const SparseCd adag = SparseCd(a.adjoint());
    const SparseCd bdag = SparseCd(b.adjoint());
    MatrixCd h = MatrixCd::Zero(t.dim(), t.dim());
    h -= m.delta_prime * (MatrixCd(SparseCd(adag * a)) + MatrixCd(SparseCd(bdag * b)));
    h -= m.coupling * MatrixCd(SparseCd(adag * b)) +
         std::conj(m.coupling) * MatrixCd(SparseCd(a * bdag));
    h += kI * m.probe * MatrixCd(adag) - kI * std::conj(m.probe) * MatrixCd(a);
    h += kI * m.mech_drive * MatrixCd(bdag) - kI * std::conj(m.mech_drive) * MatrixCd(b);
    return h;
}

DensityMatrix finalize_state(MatrixCd rho, const TruncationSpec& trunc,
                             bool normalize, double positivity_slack,
                             bool enforce) {
    DensityMatrix s;
    s.trunc = trunc;
    s.trace_error = std::abs(rho.trace() - Complex{1.0, 0.0});
    s.hermiticity_error = (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
    if (normalize) {
        rho = 0.5 * (rho + rho.adjoint().eval());
        const Complex tr = rho.trace();
        if (std::abs(tr) < 1e-300)
            throw SolverFailureError("steady_state: vanishing trace in solved state");
        rho /= tr;
    }
    Eigen::SelfAdjointEigenSolver<MatrixCd> es(0.5 * (rho + rho.adjoint().eval()),
                                               Eigen::EigenvaluesOnly);
    s.min_eigenvalue = es.eigenvalues().minCoeff();
    if (enforce && s.min_eigenvalue < -positivity_slack) {
        std::ostringstream os;
        os << "steady_state: minimum eigenvalue " << s.min_eigenvalue
           << " below positivity slack; truncation too small or parameters unstable";
        throw SolverFailureError(os.str());
    }
    s.rho = std::move(rho);
    return s;
}

/// Null-vector problem with the trace constraint substituted in: unknowns are
/// every vec component except (0,0); rho_00 = 1 - sum of the other diagonal
/// entries; the redundant (0,0) equation is dropped. Keeps the system square
/// and free of dense border rows (which ruin sparse factorizations).
struct ReducedSystem {
    SparseCd matrix; // (n-1) x (n-1)
    VectorCd rhs;
};

ReducedSystem reduce_trace_constraint(const SparseCd& L, int dim) {
    const Eigen::Index n = L.rows();
    ReducedSystem out;
    out.rhs = VectorCd::Zero(n - 1);
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(L.nonZeros()) +
                  static_cast<std::size_t>(16) * static_cast<std::size_t>(dim));
    for (int k = 0; k < L.outerSize(); ++k)
        for (SparseCd::InnerIterator it(L, k); it; ++it) {
            const Eigen::Index r = it.row(), c = it.col();
            if (r == 0) continue;
            if (c == 0) {
                out.rhs[r - 1] -= it.value();
                for (Eigen::Index m = 1; m < dim; ++m)
                    trips.emplace_back(r - 1, m * (dim + 1) - 1, -it.value());
                continue;
            }
            trips.emplace_back(r - 1, c - 1, it.value());
        }
    out.matrix.resize(n - 1, n - 1);
    out.matrix.setFromTriplets(trips.begin(), trips.end());
    out.matrix.makeCompressed();
    return out;
}

VectorCd expand_reduced(const VectorCd& x, int dim) {
    const Eigen::Index n = x.size() + 1;
    VectorCd full(n);
    full.tail(n - 1) = x;
    Complex partial_trace{0.0, 0.0};
    for (Eigen::Index m = 1; m < dim; ++m) partial_trace += full[m * (dim + 1)];
    full[0] = Complex{1.0, 0.0} - partial_trace;
    return full;
}

/// Inverse of the shifted no-jump part M(rho) = -i(Ht rho - rho Ht^H) - sigma
/// rho via the eigendecomposition of the effective non-Hermitian Hamiltonian.
/// Captures the stiff coherent+decay structure; the jump (refilling) terms are
/// what GMRES has to work off.
class SylvesterPreconditioner {
  public:
    SylvesterPreconditioner(const LindbladModel& m, const TruncationSpec& t,
                            double sigma)
        : dim_(t.dim()) {
        MatrixCd ht = effective_hamiltonian(m, t);
        const SparseCd a = cavity_destroy(t);
        const SparseCd b = mech_destroy(t);
        const SparseCd adag = SparseCd(a.adjoint());
        const SparseCd bdag = SparseCd(b.adjoint());
        ht -= 0.5 * kI *
              (m.kappa * MatrixCd(SparseCd(adag * a)) +
               m.gamma_m * (m.n_thermal + 1.0) * MatrixCd(SparseCd(bdag * b)) +
               m.gamma_m * m.n_thermal * MatrixCd(SparseCd(b * bdag)));
        Eigen::ComplexEigenSolver<MatrixCd> es(ht);
        if (es.info() != Eigen::Success)
            throw SolverFailureError("steady_state: effective-Hamiltonian eigensolve failed");
        v_ = es.eigenvectors();
        v_inv_ = v_.inverse();
        const auto& lam = es.eigenvalues();
        denom_.resize(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
                denom_(i, j) = -kI * (lam[i] - std::conj(lam[j])) - sigma;
    }

    // Solve M(rho) = R on the reduced coordinates (component (0,0) padded
    // with zero and dropped again; the preconditioner need not be exact).
    VectorCd apply_reduced(const VectorCd& r) const {
        VectorCd full = VectorCd::Zero(static_cast<Eigen::Index>(dim_) * dim_);
        full.tail(full.size() - 1) = r;
        Eigen::Map<const MatrixCd> rmat(full.data(), dim_, dim_);
        MatrixCd c = v_inv_ * rmat * v_inv_.adjoint();
        c = c.cwiseQuotient(denom_);
        MatrixCd rho = v_ * c * v_.adjoint();
        Eigen::Map<VectorCd> out(rho.data(), rho.size());
        return VectorCd(out.tail(out.size() - 1));
    }

  private:
    int dim_;
    MatrixCd v_, v_inv_, denom_;
};

/// Right-preconditioned restarted GMRES on the reduced system. Returns true
/// on convergence (relative residual below tol).
bool gmres_reduced(const SparseCd& a, const VectorCd& b,
                   const SylvesterPreconditioner& precond, VectorCd& x,
                   double tol, int max_inner, int max_restarts) {
    const Eigen::Index n = b.size();
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x = VectorCd::Zero(n);
        return true;
    }
    x = VectorCd::Zero(n);
    for (int cycle = 0; cycle < max_restarts; ++cycle) {
        VectorCd r = b - a * x;
        const double rnorm = r.norm();
        if (rnorm <= tol * bnorm) return true;

        MatrixCd q(n, max_inner + 1);
        MatrixCd h = MatrixCd::Zero(max_inner + 1, max_inner);
        std::vector<Complex> cs(static_cast<std::size_t>(max_inner)),
            sn(static_cast<std::size_t>(max_inner));
        VectorCd g = VectorCd::Zero(max_inner + 1);
        q.col(0) = r / rnorm;
        g[0] = rnorm;

        int it = 0;
        bool done = false;
        for (; it < max_inner; ++it) {
            VectorCd w = a * precond.apply_reduced(q.col(it));
            for (int j = 0; j <= it; ++j) {
                h(j, it) = q.col(j).dot(w);
                w -= h(j, it) * q.col(j);
            }
            h(it + 1, it) = w.norm();
            if (std::abs(h(it + 1, it)) > 1e-300) q.col(it + 1) = w / h(it + 1, it);
            for (int j = 0; j < it; ++j) {
                const Complex tmp = std::conj(cs[j]) * h(j, it) + std::conj(sn[j]) * h(j + 1, it);
                h(j + 1, it) = -sn[j] * h(j, it) + cs[j] * h(j + 1, it);
                h(j, it) = tmp;
            }
            const double scale = std::sqrt(std::norm(h(it, it)) + std::norm(h(it + 1, it)));
            if (scale < 1e-300) {
                ++it;
                done = true;
                break;
            }
            cs[it] = h(it, it) / scale;
            sn[it] = h(it + 1, it) / scale;
            h(it, it) = std::conj(cs[it]) * h(it, it) + std::conj(sn[it]) * h(it + 1, it);
            h(it + 1, it) = 0.0;
            g[it + 1] = -sn[it] * g[it];
            g[it] = std::conj(cs[it]) * g[it];
            if (std::abs(g[it + 1]) <= tol * bnorm) {
                ++it;
                done = true;
                break;
            }
        }
        VectorCd y = VectorCd::Zero(it);
        for (int i = it - 1; i >= 0; --i) {
            Complex s = g[i];
            for (int j = i + 1; j < it; ++j) s -= h(i, j) * y[j];
            y[i] = s / h(i, i);
        }
        x += precond.apply_reduced(q.leftCols(it) * y);
        if (done && (b - a * x).norm() <= tol * bnorm) return true;
    }
    return (b - a * x).norm() <= tol * bnorm;
}

double relative_residual(const SparseCd& L, double l_norm, const VectorCd& x) {
    const double xn = x.norm();
    if (xn == 0.0) return std::numeric_limits<double>::infinity();
    return (L * x).norm() / (l_norm * xn);
}

SteadyStateResult steady_state_impl(const SparseCd& L, const TruncationSpec& trunc,
                                    const SteadyStateOptionsL& opt,
                                    const LindbladModel* model) {
    trunc.validate();
    const int dim = trunc.dim();
    const Eigen::Index n = L.rows();
    if (n != static_cast<Eigen::Index>(dim) * dim)
        throw std::invalid_argument("steady_state: Liouvillian does not match truncation");

    const double l_norm = frobenius_norm(L);
    if (l_norm == 0.0)
        throw SolverFailureError("steady_state: zero Liouvillian");

    SteadyStateResult result;
    bool solved = false;
    VectorCd x;

    const ReducedSystem sys = reduce_trace_constraint(L, dim);

    if (model) {
        // Preconditioned GMRES: the shifted no-jump part captures the stiff
        // dynamics, leaving a well-clustered spectrum (~20 iterations).
        const double sigma =
            0.3 * std::max({model->kappa, model->gamma_m, 1e-6});
        try {
            const SylvesterPreconditioner precond(*model, trunc, sigma);
            VectorCd xr;
            if (gmres_reduced(sys.matrix, sys.rhs, precond, xr, 1e-13, 120, 4)) {
                x = expand_reduced(xr, dim);
                const double res = relative_residual(L, l_norm, x);
                if (res <= opt.residual_tol) {
                    solved = true;
                    result.backend = SteadySolver::PrecondGmres;
                    result.residual = res;
                }
            }
        } catch (const SolverFailureError&) {
            // fall through to the factorization path
        }
    }

    if (!solved && n <= opt.direct_max_dim) {
        Eigen::SparseLU<SparseCd> lu;
        lu.compute(sys.matrix);
        if (lu.info() == Eigen::Success) {
            const VectorCd xr = lu.solve(sys.rhs);
            if (lu.info() == Eigen::Success) {
                x = expand_reduced(xr, dim);
                const double res = relative_residual(L, l_norm, x);
                if (res <= opt.residual_tol) {
                    solved = true;
                    result.backend = SteadySolver::SparseLU;
                    result.residual = res;
                }
            }
        }
    }

    if (!solved && opt.allow_evolve_fallback) {
        // March the master equation until the residual settles.
        VectorCd y = VectorCd::Zero(n);
        y[0] = 1.0; // vacuum
        OdeControls ctl;
        ctl.rtol = 1e-9;
        ctl.atol = 1e-12;
        auto rhs_f = [&](double, const VectorCd& v, VectorCd& dv) { dv = L * v; };
        double t = 0.0;
        const double chunk = 20.0;
        while (t < opt.evolve_t_max) {
            integrate_dopri5(rhs_f, y, t, t + chunk, ctl);
            t += chunk;
            const double res = relative_residual(L, l_norm, y);
            if (res <= opt.residual_tol) {
                solved = true;
                result.backend = SteadySolver::TimeEvolution;
                result.residual = res;
                x = y;
                break;
            }
        }
    }

    if (!solved)
        throw SolverFailureError("steady_state: no solver reached the residual tolerance "
                                 "(singular beyond the trace direction, truncation too "
                                 "small, or parameters outside the damped regime)");

    MatrixCd rho = Eigen::Map<const MatrixCd>(x.data(), dim, dim);
    result.state = finalize_state(std::move(rho), trunc, true, opt.positivity_slack, true);
    return result;
}

} // namespace

LindbladModel LindbladModel::make(double delta_prime, Complex coupling,
                                  Complex probe, Complex mech_drive, double kappa,
                                  double gamma_m, double n_thermal) {
    if (!(kappa >= 0.0) || !(gamma_m >= 0.0))
        throw std::invalid_argument("LindbladModel: decay rates must be >= 0");
    if (!(n_thermal >= 0.0))
        throw std::invalid_argument("LindbladModel: n_thermal must be >= 0");
    return LindbladModel{delta_prime, coupling, probe, mech_drive, kappa, gamma_m, n_thermal};
}

LindbladModel lindblad_model(const SystemParams& p, const WorkingPoint& wp,
                             const DriveSet& d, double n_thermal,
                             double delta_prime) {
    return LindbladModel::make(delta_prime, wp.coupling, d.probe, d.mech_drive,
                               p.kappa, p.gamma_m, n_thermal);
}

DensityMatrix vacuum_state(const TruncationSpec& trunc) {
    trunc.validate();
    DensityMatrix s;
    s.trunc = trunc;
    s.rho = MatrixCd::Zero(trunc.dim(), trunc.dim());
    s.rho(0, 0) = 1.0;
    s.min_eigenvalue = 0.0;
    return s;
}

Complex mean_cavity_amp(const DensityMatrix& s) {
    const int nm = s.trunc.n_mech + 1;
    Complex acc{0.0, 0.0};
    // tr(rho a): a lowers the cavity index, <i_c-1,i_m| a |i_c,i_m> = sqrt(i_c)
    for (int ic = 1; ic <= s.trunc.n_cav; ++ic)
        for (int im = 0; im < nm; ++im)
            acc += std::sqrt(static_cast<double>(ic)) * s.rho(ic * nm + im, (ic - 1) * nm + im);
    return acc;
}

Complex mean_mech_amp(const DensityMatrix& s) {
    const int nm = s.trunc.n_mech + 1;
    Complex acc{0.0, 0.0};
    for (int ic = 0; ic <= s.trunc.n_cav; ++ic)
        for (int im = 1; im <= s.trunc.n_mech; ++im)
            acc += std::sqrt(static_cast<double>(im)) * s.rho(ic * nm + im, ic * nm + im - 1);
    return acc;
}

double mean_mech_number(const DensityMatrix& s) {
    const int nm = s.trunc.n_mech + 1;
    double acc = 0.0;
    for (int ic = 0; ic <= s.trunc.n_cav; ++ic)
        for (int im = 1; im <= s.trunc.n_mech; ++im)
            acc += im * s.rho(ic * nm + im, ic * nm + im).real();
    return acc;
}

SparseCd build_liouvillian(const LindbladModel& m, const TruncationSpec& trunc) {
    trunc.validate();
    const int dim = trunc.dim();
    const SparseCd a = cavity_destroy(trunc);
    const SparseCd b = mech_destroy(trunc);
    const SparseCd id = identity_op(dim);

    const SparseCd h = effective_hamiltonian(m, trunc).sparseView();

    SparseCd L = SparseCd(-kI * (kron_sparse(id, h) - kron_sparse(SparseCd(h.transpose()), id)));
    if (m.kappa > 0.0) L += SparseCd(m.kappa * dissipator(a, id));
    if (m.gamma_m > 0.0) {
        L += SparseCd(m.gamma_m * (m.n_thermal + 1.0) * dissipator(b, id));
        if (m.n_thermal > 0.0)
            L += SparseCd(m.gamma_m * m.n_thermal * dissipator(SparseCd(b.adjoint()), id));
    }
    L.makeCompressed();
    return L;
}

SteadyStateResult steady_state(const LindbladModel& model, const TruncationSpec& trunc,
                               const SteadyStateOptionsL& opt) {
    const SparseCd L = build_liouvillian(model, trunc);
    return steady_state_impl(L, trunc, opt, &model);
}

SteadyStateResult steady_state(const SparseCd& liouvillian, const TruncationSpec& trunc,
                               const SteadyStateOptionsL& opt) {
    return steady_state_impl(liouvillian, trunc, opt, nullptr);
}

std::vector<TrajectoryPoint> evolve(const SparseCd& L, const DensityMatrix& rho0,
                                    double t_final, const EvolveControls& ctl,
                                    int n_snapshots) {
    rho0.trunc.validate();
    const int dim = rho0.trunc.dim();
    if (L.rows() != static_cast<Eigen::Index>(dim) * dim)
        throw std::invalid_argument("evolve: Liouvillian does not match state truncation");
    if (!(t_final > 0.0)) throw std::invalid_argument("evolve: t_final must be > 0");
    if (n_snapshots < 1) throw std::invalid_argument("evolve: need at least one snapshot");

    VectorCd y = Eigen::Map<const VectorCd>(rho0.rho.data(), rho0.rho.size());
    auto rhs_f = [&](double, const VectorCd& v, VectorCd& dv) { dv = L * v; };

    std::vector<TrajectoryPoint> out;
    out.reserve(static_cast<std::size_t>(n_snapshots));
    OdeControls ode;
    ode.rtol = ctl.rtol;
    ode.atol = ctl.atol;
    double t = 0.0;
    for (int i = 1; i <= n_snapshots; ++i) {
        const double target = t_final * i / n_snapshots;
        integrate_dopri5(rhs_f, y, t, target, ode);
        t = target;
        TrajectoryPoint pt;
        pt.t = t;
        MatrixCd rho = Eigen::Map<const MatrixCd>(y.data(), dim, dim);
        pt.state = finalize_state(std::move(rho), rho0.trunc, false, 0.0, false);
        out.push_back(std::move(pt));
    }
    return out;
}

ResponsePoint extract_response(const DensityMatrix& s, double eta, double kappa,
                               Complex eps_p, double delta_prime) {
    if (eps_p == Complex{})
        throw std::invalid_argument("extract_response: eps_p must be nonzero");
    const Complex dc = mean_cavity_amp(s);
    return make_response_point(delta_prime, eta * kappa * dc / eps_p);
}

ConvergenceTable convergence_sweep(const LindbladModel& model,
                                   const std::vector<TruncationSpec>& ladder,
                                   const SteadyStateOptionsL& opt) {
    if (ladder.size() < 3)
        throw std::invalid_argument("convergence_sweep: need a ladder of at least 3 truncations");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (ladder[i].n_cav < ladder[i - 1].n_cav || ladder[i].n_mech < ladder[i - 1].n_mech)
            throw std::invalid_argument("convergence_sweep: ladder must be non-decreasing");

    ConvergenceTable table;
    table.rows.resize(ladder.size());
    std::exception_ptr first_error;
    std::mutex error_mutex;
    parallel_for(ladder.size(), [&](std::size_t i) {
        try {
            const SteadyStateResult r = steady_state(model, ladder[i], opt);
            table.rows[i].trunc = ladder[i];
            table.rows[i].mean_cavity = mean_cavity_amp(r.state);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        const Complex prev = table.rows[i - 1].mean_cavity;
        const Complex cur = table.rows[i].mean_cavity;
        table.rows[i].diff = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    }
    table.converged = table.rows.back().diff <= 1e-4;
    return table;
}

std::vector<LindbladComparisonRow> lindblad_vs_analytic(
    const SystemParams& p, const WorkingPoint& wp, const DriveSet& d,
    double n_thermal, const TruncationSpec& trunc, const std::vector<double>& grid,
    const SteadyStateOptionsL& opt) {
    trunc.validate();
    std::vector<LindbladComparisonRow> rows(grid.size());
    std::exception_ptr first_error;
    std::mutex error_mutex;
    parallel_for(grid.size(), [&](std::size_t i) {
        try {
            const LindbladModel model = lindblad_model(p, wp, d, n_thermal, grid[i]);
            const SteadyStateResult r = steady_state(model, trunc, opt);
            rows[i].delta_prime = grid[i];
            rows[i].eps_t_numeric =
                extract_response(r.state, p.eta, p.kappa, d.probe, grid[i]).eps_t;
            rows[i].eps_t_analytic =
                response_exact(wp, p, d.probe, d.mech_drive, grid[i]).eps_t;
            rows[i].abs_err = std::abs(rows[i].eps_t_numeric - rows[i].eps_t_analytic);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    return rows;
}

TruncationSpec default_truncation(double n_thermal) {
    TruncationSpec t;
    t.n_cav = 5;
    if (n_thermal < 0.5)
        t.n_mech = 8;
    else if (n_thermal <= 5.0)
        t.n_mech = 20;
    else
        t.n_mech = 50;
    return t;
}

} // namespace omprobe
