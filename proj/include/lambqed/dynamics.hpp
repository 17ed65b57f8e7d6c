// dynamics.hpp: Lindblad time evolution and steady states

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "lambqed/hilbert.hpp"
#include "lambqed/metrics.hpp"
#include "lambqed/model.hpp"
#include "lambqed/ode.hpp"

namespace lambqed {

/// dρ/dt = -i[H, ρ] + Σ_k rate_k (L_k ρ L_k† - ½{L_k†L_k, ρ}) for an arbitrary square ρ.
inline DenseMatrix lindblad_rhs(const DenseMatrix& rho, const Operator& h, std::span<const CollapseChannel> collapse) {
    const Eigen::Index d = h.matrix.rows();
    if (rho.rows() != d || rho.cols() != d) {
        throw std::invalid_argument("lindblad_rhs: rho is " + std::to_string(rho.rows()) + "x" +
                                    std::to_string(rho.cols()) + ", H is " + std::to_string(d) + "x" +
                                    std::to_string(d));
    }
    const cplx i{0.0, 1.0};
    DenseMatrix out = -i * (h.matrix * rho) + i * (rho * h.matrix);
    for (const auto& c : collapse) {
        if (c.rate == 0.0) continue;
        if (c.op.matrix.rows() != d) throw std::invalid_argument("lindblad_rhs: collapse operator dimension mismatch");
        const SparseMatrix cdag = c.op.matrix.adjoint();
        const SparseMatrix cdc = cdag * c.op.matrix;
        const DenseMatrix c_rho = c.op.matrix * rho;
        out += c.rate * (c_rho * cdag);
        out -= (0.5 * c.rate) * (cdc * rho);
        out -= (0.5 * c.rate) * (rho * cdc);
    }
    return out;
}

inline DenseMatrix lindblad_rhs(const DensityMatrix& rho, const Operator& h, std::span<const CollapseChannel> collapse) {
    return lindblad_rhs(rho.matrix(), h, collapse);
}

enum class Frame { effective, lab };

inline std::string to_string(Frame f) { return f == Frame::effective ? "effective" : "lab"; }

/// Precomputed generator for repeated right-hand-side evaluations on Hermitian ρ.
///
/// With K(t) = -i H(t) - ½ Σ r L†L the generator reads Kρ + (Kρ)† + Σ r LρL†,
/// which needs a single sparse product for the Hamiltonian part.
class LindbladGenerator {
public:
    LindbladGenerator(const SystemParams& params, const HilbertSpec& space, Frame frame) : params_(params), frame_(frame) {
        const cplx i{0.0, 1.0};
        SparseMatrix damping(space.dim(), space.dim());
        for (const auto& c : collapse_operators(params, space)) {
            if (c.rate == 0.0) continue;
            const SparseMatrix cdag = c.op.matrix.adjoint();
            jumps_.push_back({c.rate, c.op.matrix, cdag});
            damping += (0.5 * c.rate) * SparseMatrix(cdag * c.op.matrix);
        }
        if (frame == Frame::effective) {
            k_static_ = SparseMatrix(-i * effective_hamiltonian(params, space).matrix - damping);
        } else {
            const LabHamiltonian lab = lab_hamiltonian_parts(params, space);
            k_static_ = SparseMatrix(-i * lab.free.matrix - damping);
            k_drive_ = SparseMatrix(-i * lab.coupling.matrix);
        }
        k_static_.makeCompressed();
    }

    void operator()(double t, const DenseMatrix& rho, DenseMatrix& out) const {
        out.noalias() = k_static_ * rho;
        if (frame_ == Frame::lab) out.noalias() += drive_amplitude(params_, t) * (k_drive_ * rho);
        out += out.adjoint().eval();
        for (const auto& j : jumps_) {
            tmp_.noalias() = j.op * rho;
            out.noalias() += j.rate * (tmp_ * j.op_dag);
        }
    }

private:
    struct Jump {
        double rate;
        SparseMatrix op;
        SparseMatrix op_dag;
    };
    SystemParams params_;
    Frame frame_;
    SparseMatrix k_static_;
    SparseMatrix k_drive_;
    std::vector<Jump> jumps_;
    mutable DenseMatrix tmp_;
};

/// Column-major vectorization: vec(A X B) = (Bᵀ ⊗ A) vec(X).
namespace detail {

inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    std::vector<Eigen::Triplet<cplx>> entries;
    entries.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka) {
        for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia) {
            for (int kb = 0; kb < b.outerSize(); ++kb) {
                for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
                    entries.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                         ia.value() * ib.value());
                }
            }
        }
    }
    SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

inline SparseMatrix identity(int d) {
    SparseMatrix id(d, d);
    id.setIdentity();
    return id;
}

}  // namespace detail

struct LiouvillianOptions {
    long max_super_dim{250'000};  // refuse dim² above this
};

/// Superoperator L with vec(dρ/dt) = L vec(ρ) for the effective-frame generator.
inline SparseMatrix liouvillian_matrix(const SystemParams& params, const HilbertSpec& space,
                                       const LiouvillianOptions& opts = {}) {
    const long d = space.dim();
    if (d * d > opts.max_super_dim) {
        throw std::invalid_argument("liouvillian_matrix: superoperator dimension " + std::to_string(d * d) +
                                    " (n_max = " + std::to_string(space.n_max) + ") exceeds the cap of " +
                                    std::to_string(opts.max_super_dim));
    }
    const cplx i{0.0, 1.0};
    const SparseMatrix id = detail::identity(static_cast<int>(d));
    const SparseMatrix h = effective_hamiltonian(params, space).matrix;
    SparseMatrix l = -i * (detail::kron(id, h) - detail::kron(SparseMatrix(h.transpose()), id));
    for (const auto& c : collapse_operators(params, space)) {
        if (c.rate == 0.0) continue;
        const SparseMatrix cdc = c.op.matrix.adjoint() * c.op.matrix;
        l += c.rate * (detail::kron(SparseMatrix(c.op.matrix.conjugate()), c.op.matrix) -
                       0.5 * detail::kron(id, cdc) - 0.5 * detail::kron(SparseMatrix(cdc.transpose()), id));
    }
    l.makeCompressed();
    return l;
}

struct TrajectoryDiagnostics {
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};  // stored states, after re-projection
    double max_step_drift{0.0};         // largest Hermiticity drift of a raw step before re-projection
    double min_eigenvalue{0.0};         // exact only if computed, else the tolerance floor that was verified
    bool min_eigenvalue_exact{false};
    bool positivity_ok{true};
    double max_purity{0.0};
    double max_top_population{0.0};  // population of the two highest Fock levels
    OdeStats ode{};
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;  // empty when not stored
    std::map<std::string, std::vector<double>> observables;
    TrajectoryDiagnostics diagnostics;
};

struct EvolveOptions {
    OdeOptions ode{};
    bool store_states{true};
    std::vector<Metric> metrics{};
    DensityTolerance tolerance{};
    double positivity_abort{-1e-5};
    bool exact_min_eigenvalue{false};  // eigensolve every stored state instead of a Cholesky test
    std::function<void(double, const DensityMatrix&)> observer{};
};

inline void hermitize(DenseMatrix& m) {
    m = (0.5 * (m + m.adjoint())).eval();
}

/// Integrate the master equation from rho0 over t_grid (which must start at 0).
inline Trajectory evolve(const DensityMatrix& rho0, const SystemParams& params, std::span<const double> t_grid,
                         Frame frame = Frame::effective, const EvolveOptions& opts = {}) {
    params.validate();
    if (t_grid.empty() || t_grid.front() != 0.0) throw std::invalid_argument("evolve: t_grid must start at 0");
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("evolve: t_grid must be strictly increasing");
    }
    const HilbertSpec space = rho0.space();
    if (space.n_max != params.n_max) throw std::invalid_argument("evolve: rho0 space does not match params.n_max");

    LindbladGenerator generator(params, space, frame);
    auto rhs = [&generator](double t, const DenseMatrix& y, DenseMatrix& dy) { generator(t, y, dy); };
    DormandPrince<DenseMatrix, decltype(rhs)> stepper(rhs, opts.ode);

    Trajectory traj;
    traj.times.assign(t_grid.begin(), t_grid.end());
    for (const auto& m : opts.metrics) traj.observables[m.name()].reserve(t_grid.size());
    auto& diag = traj.diagnostics;
    diag.min_eigenvalue = opts.exact_min_eigenvalue ? std::numeric_limits<double>::infinity() : opts.tolerance.min_eigenvalue;
    diag.min_eigenvalue_exact = opts.exact_min_eigenvalue;

    DenseMatrix y = rho0.matrix();
    double t = 0.0;
    auto project = [&diag](DenseMatrix& m) {
        diag.max_step_drift = std::max(diag.max_step_drift, hermiticity_error(m));
        hermitize(m);
    };

    for (const double t_out : t_grid) {
        stepper.advance(t, y, t_out, project);
        DensityMatrix state(space, y, DensityMatrix::unchecked);

        diag.max_trace_error = std::max(diag.max_trace_error, std::abs(y.trace() - cplx(1.0)));
        diag.max_hermiticity_error = std::max(diag.max_hermiticity_error, hermiticity_error(y));
        if (opts.exact_min_eigenvalue || !eigenvalues_above(y, opts.tolerance.min_eigenvalue)) {
            const double lmin = min_eigenvalue(y);
            if (!diag.min_eigenvalue_exact) {
                diag.min_eigenvalue = lmin;
                diag.min_eigenvalue_exact = true;
            } else {
                diag.min_eigenvalue = std::min(diag.min_eigenvalue, lmin);
            }
            if (lmin < opts.tolerance.min_eigenvalue) diag.positivity_ok = false;
            if (lmin < opts.positivity_abort) {
                throw IntegrationFailure("evolve: eigenvalue " + std::to_string(lmin) + " at t = " + std::to_string(t) +
                                         " (n_max = " + std::to_string(space.n_max) +
                                         "); tighten ode_tol or raise n_max");
            }
        }
        diag.max_purity = std::max(diag.max_purity, state.purity());
        diag.max_top_population = std::max(diag.max_top_population, top_fock_population(y, space));

        for (const auto& m : opts.metrics) traj.observables[m.name()].push_back(m.evaluate(state));
        if (opts.observer) opts.observer(t, state);
        if (opts.store_states) traj.states.push_back(std::move(state));
    }
    diag.ode = stepper.stats();
    return traj;
}

enum class SteadyMethod { long_time, null_space };

inline std::string to_string(SteadyMethod m) { return m == SteadyMethod::long_time ? "long-time" : "null-space"; }

class NoUniqueSteadyState : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SteadyOptions {
    double steady_tol{1e-9};
    double t_max{0.0};           // long-time horizon; 0 → 50 / max(slowest of κ, γ, 1e-3)
    double check_interval{10.0};
    OdeOptions ode{1e-10, 1e-13};  // atol sets the floor of the reachable residual
    std::optional<DensityMatrix> initial{};  // default |↓↓,0⟩
    LiouvillianOptions liouvillian{};
    int null_space_max_n{60};    // null-space method refuses larger truncations
    double shift{1e-10};         // inverse-iteration shift below the zero eigenvalue
    int max_iterations{6};
};

struct SteadyStateResult {
    DensityMatrix state;
    double residual{0.0};  // ‖L[ρ]‖_F
    SteadyMethod method{SteadyMethod::null_space};
    bool converged{false};
    double time_reached{0.0};  // long-time method only
    int iterations{0};         // null-space method only
};

inline double default_steady_horizon(const SystemParams& p) {
    double slowest = std::numeric_limits<double>::infinity();
    for (double r : {p.kappa, p.gamma}) {
        if (r > 0.0) slowest = std::min(slowest, r);
    }
    return 50.0 / std::max(slowest, 1e-3);
}

inline double steady_residual(const DensityMatrix& rho, const SystemParams& params) {
    const auto h = effective_hamiltonian(params, rho.space());
    const auto c = collapse_operators(params, rho.space());
    return lindblad_rhs(rho.matrix(), h, c).norm();
}

/// Steady state of the effective-frame master equation.
///
/// long_time integrates from the initial state until ‖L[ρ]‖_F <= steady_tol.
/// null_space runs shifted inverse iteration on the sparse superoperator seeded
/// with the initial state, which selects the state reached from it when the
/// kernel is degenerate (e.g. γ = 0 leaves the singlet sector dark).
inline SteadyStateResult steady_state(const SystemParams& params, const HilbertSpec& space, SteadyMethod method,
                                      const SteadyOptions& opts = {}) {
    params.validate();
    if (params.kappa == 0.0 && params.gamma == 0.0) {
        throw NoUniqueSteadyState("steady_state: kappa = gamma = 0 has no unique steady state");
    }
    if (space.n_max != params.n_max) throw std::invalid_argument("steady_state: space does not match params.n_max");
    const DensityMatrix rho0 = opts.initial ? *opts.initial : DensityMatrix::ground_state(space);

    SteadyStateResult result;
    result.method = method;
    if (method == SteadyMethod::long_time) {
        LindbladGenerator generator(params, space, Frame::effective);
        auto rhs = [&generator](double t, const DenseMatrix& y, DenseMatrix& dy) { generator(t, y, dy); };
        DormandPrince<DenseMatrix, decltype(rhs)> stepper(rhs, opts.ode);
        const double t_max = opts.t_max > 0.0 ? opts.t_max : default_steady_horizon(params);
        DenseMatrix y = rho0.matrix();
        DenseMatrix dy(y.rows(), y.cols());
        double t = 0.0;
        while (true) {
            stepper.advance(t, y, std::min(t + opts.check_interval, t_max), hermitize);
            generator(t, y, dy);
            result.residual = dy.norm();
            if (result.residual <= opts.steady_tol) {
                result.converged = true;
                break;
            }
            if (t >= t_max) break;
        }
        y /= y.trace();
        result.state = DensityMatrix(space, std::move(y), DensityMatrix::unchecked);
        result.time_reached = t;
        return result;
    }

    if (space.n_max > opts.null_space_max_n) {
        throw std::invalid_argument("steady_state: null-space method limited to n_max <= " +
                                    std::to_string(opts.null_space_max_n) + " (got " + std::to_string(space.n_max) + ")");
    }
    const int d = space.dim();
    SparseMatrix a = liouvillian_matrix(params, space, opts.liouvillian);
    SparseMatrix shift_id(a.rows(), a.cols());
    shift_id.setIdentity();
    a -= opts.shift * shift_id;
    a.makeCompressed();
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("steady_state: sparse factorization failed: " + lu.lastErrorMessage());
    }
    Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(rho0.matrix().data(), static_cast<Eigen::Index>(d) * d);
    auto trace_of = [d](const Eigen::VectorXcd& v) {
        cplx tr{0.0, 0.0};
        for (int k = 0; k < d; ++k) tr += v(static_cast<Eigen::Index>(k) * d + k);
        return tr;
    };
    for (int it = 0; it < opts.max_iterations; ++it) {
        Eigen::VectorXcd next = lu.solve(x);
        next /= trace_of(next);
        const double change = (next - x).norm();
        x = std::move(next);
        result.iterations = it + 1;
        if (it > 0 && change <= 1e-3 * opts.steady_tol) break;
    }
    DenseMatrix rho = Eigen::Map<const DenseMatrix>(x.data(), d, d);
    hermitize(rho);
    rho /= rho.trace();
    result.state = DensityMatrix(space, std::move(rho), DensityMatrix::unchecked);
    result.residual = steady_residual(result.state, params);
    result.converged = result.residual <= opts.steady_tol;
    return result;
}

inline std::vector<double> uniform_grid(double start, double stop, int count) {
    if (count < 1) throw std::invalid_argument("uniform_grid: count must be >= 1");
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        g[static_cast<std::size_t>(k)] = count == 1 ? start : start + (stop - start) * k / (count - 1);
    }
    return g;
}

}  // namespace lambqed
