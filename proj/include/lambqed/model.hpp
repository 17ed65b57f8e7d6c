// model.hpp: Hamiltonians, drive waveform and dissipation channels

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambqed/hilbert.hpp"

namespace lambqed {

/// Physical parameters in units of the common cavity/qubit frequency ω = 1.
/// Time is measured in 1/ω. Both qubits are resonant with the cavity.
struct SystemParams {
    double g{0.05};          // coupling amplitude
    double theta{0.5};       // drive shape: TC weight θ, anti-TC weight 1 - θ
    double kappa{0.0};       // cavity decay
    double gamma{0.0};       // qubit relaxation, same for both qubits
    double gamma_phi{0.0};   // pure dephasing
    int n_max{20};           // Fock truncation

    static constexpr double omega = 1.0;

    void validate() const {
        if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("SystemParams: theta must lie in [0, 1]");
        if (!(g >= 0.0)) throw std::invalid_argument("SystemParams: g must be >= 0");
        if (!(kappa >= 0.0 && gamma >= 0.0 && gamma_phi >= 0.0)) {
            throw std::invalid_argument("SystemParams: rates must be >= 0");
        }
        if (n_max < 1) throw std::invalid_argument("SystemParams: n_max must be >= 1");
    }

    [[nodiscard]] bool closed() const noexcept { return kappa == 0.0 && gamma == 0.0 && gamma_phi == 0.0; }
};

/// The two Fourier components of the coupling that survive time averaging:
/// mean = ⟨G(t)⟩, second_harmonic = ⟨G(t) e^{-2iωt}⟩, averaged over π/ω.
struct DriveWaveform {
    double mean{0.0};
    double second_harmonic{0.0};
};

/// Minimal two-harmonic waveform with (p, q) = (gθ, g(1-θ)):
/// G(t) = gθ + 2g(1-θ) cos(2ωt). Even in t.
inline double drive_amplitude(const SystemParams& p, double t) {
    return p.g * p.theta + 2.0 * p.g * (1.0 - p.theta) * std::cos(2.0 * SystemParams::omega * t);
}

inline DriveWaveform canonical_waveform(const SystemParams& p) { return {p.g * p.theta, p.g * (1.0 - p.theta)}; }

/// Fourier components of a real waveform sampled on a uniform grid spanning one
/// period π/ω. The grid may be closed (last sample at t0 + π/ω, trapezoid rule)
/// or half-open (last sample one step short of the period, rectangle rule).
inline DriveWaveform fourier_components(std::span<const double> times, std::span<const double> samples) {
    if (times.size() != samples.size() || times.size() < 3) {
        throw std::invalid_argument("fourier_components: need >= 3 samples with matching time points");
    }
    const std::size_t n = times.size();
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) throw std::invalid_argument("fourier_components: time grid must be increasing");
    for (std::size_t k = 1; k < n; ++k) {
        if (std::abs((times[k] - times[k - 1]) - dt) > 1e-9 * dt) {
            throw std::invalid_argument("fourier_components: time grid is not uniform");
        }
    }
    const double period = std::numbers::pi / SystemParams::omega;
    const double span = times[n - 1] - times[0];
    std::vector<double> w(n, 1.0);
    if (std::abs(span - period) <= 1e-9 * period) {
        w.front() = w.back() = 0.5;
    } else if (std::abs(span + dt - period) > 1e-9 * period) {
        throw std::invalid_argument("fourier_components: samples must cover exactly one period pi/omega");
    }
    double mean = 0.0;
    cplx harmonic{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        mean += w[k] * samples[k];
        harmonic += w[k] * samples[k] * std::exp(cplx(0.0, -2.0 * SystemParams::omega * times[k]));
    }
    mean *= dt / period;
    harmonic *= dt / period;
    return {mean, harmonic.real()};
}

/// Σ_j (σ_{j,+} a + σ_{j,-} a†): the excitation-conserving (Tavis-Cummings) coupling.
inline Operator tc_coupling(const OperatorSet& ops) {
    Operator v = ops.sigma_plus_1 * ops.a + ops.sigma_minus_1 * ops.a_dag;
    return v + ops.sigma_plus_2 * ops.a + ops.sigma_minus_2 * ops.a_dag;
}

/// Σ_j (σ_{j,+} a† + σ_{j,-} a): the counterrotating (anti-Tavis-Cummings) coupling.
inline Operator atc_coupling(const OperatorSet& ops) {
    Operator v = ops.sigma_plus_1 * ops.a_dag + ops.sigma_minus_1 * ops.a;
    return v + ops.sigma_plus_2 * ops.a_dag + ops.sigma_minus_2 * ops.a;
}

/// Time-averaged interaction-picture Hamiltonian g[θ V_TC + (1-θ) V_ATC].
inline Operator effective_hamiltonian(const SystemParams& p, const HilbertSpec& space) {
    const OperatorSet ops = build_operators(space);
    return (p.g * p.theta) * tc_coupling(ops) + (p.g * (1.0 - p.theta)) * atc_coupling(ops);
}

/// Lab-frame Hamiltonian split as H(t) = free + G(t) · coupling.
struct LabHamiltonian {
    Operator free;      // ω a†a + Σ_j ω σ_{j,+}σ_{j,-}
    Operator coupling;  // Σ_j (σ_{j,+} + σ_{j,-})(a† + a)
    SystemParams params;

    [[nodiscard]] Operator at(double t) const { return free + drive_amplitude(params, t) * coupling; }
};

inline LabHamiltonian lab_hamiltonian_parts(const SystemParams& p, const HilbertSpec& space) {
    const OperatorSet ops = build_operators(space);
    const double w = SystemParams::omega;
    Operator free = w * ops.number + w * (ops.sigma_plus_1 * ops.sigma_minus_1) + w * (ops.sigma_plus_2 * ops.sigma_minus_2);
    const Operator field = ops.a + ops.a_dag;
    Operator coupling = (ops.sigma_plus_1 + ops.sigma_minus_1 + ops.sigma_plus_2 + ops.sigma_minus_2) * field;
    return {std::move(free), std::move(coupling), p};
}

inline Operator lab_hamiltonian(const SystemParams& p, const HilbertSpec& space, double t) {
    return lab_hamiltonian_parts(p, space).at(t);
}

/// One Lindblad channel rate · (L ρ L† - ½{L†L, ρ}).
struct CollapseChannel {
    double rate{0.0};
    Operator op;
    std::string label;
};

/// Channels reproducing
///   Γ[ρ] = κ D[a] + Σ_j γ D[σ_{j,-}] + Σ_j γφ (σ_{j,z} ρ σ_{j,z} - ρ).
/// Since σ_z† σ_z = 1, the dephasing term is a standard channel with L = σ_z and
/// rate γφ; the coherence ρ_{↑↓} of a single qubit then decays as e^{-2γφ t}.
inline std::vector<CollapseChannel> collapse_operators(const SystemParams& p, const HilbertSpec& space) {
    const OperatorSet ops = build_operators(space);
    return {
        {p.kappa, ops.a, "cavity_decay"},
        {p.gamma, ops.sigma_minus_1, "relaxation_q1"},
        {p.gamma, ops.sigma_minus_2, "relaxation_q2"},
        {p.gamma_phi, ops.sigma_z_1, "dephasing_q1"},
        {p.gamma_phi, ops.sigma_z_2, "dephasing_q2"},
    };
}

/// Γ[ρ] written term by term exactly as the dissipator is defined, without the
/// collapse-channel abstraction. Used to cross-check collapse_operators().
inline DenseMatrix dissipator(const DenseMatrix& rho, const SystemParams& p, const OperatorSet& ops) {
    auto anti = [&rho](const SparseMatrix& x) -> DenseMatrix { return x * rho + rho * x; };
    const SparseMatrix& a = ops.a.matrix;
    const SparseMatrix& ad = ops.a_dag.matrix;
    DenseMatrix out = p.kappa * (DenseMatrix(a * rho * ad) - 0.5 * anti(SparseMatrix(ad * a)));
    for (int j = 1; j <= 2; ++j) {
        const SparseMatrix& sp = ops.sigma_plus(j).matrix;
        const SparseMatrix& sm = ops.sigma_minus(j).matrix;
        const SparseMatrix& sz = ops.sigma_z(j).matrix;
        out += p.gamma * (DenseMatrix(sm * rho * sp) - 0.5 * anti(SparseMatrix(sp * sm)));
        out += p.gamma_phi * (DenseMatrix(sz * rho * sz) - rho);
    }
    return out;
}

}  // namespace lambqed
