// analytic.hpp: Perturbative and exact closed forms used as oracles

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambqed/hilbert.hpp"

namespace lambqed {

/// One labeled amplitude of a wavefunction expanded in |s1 s2, n⟩.
struct Amplitude {
    std::string label;
    Spin q1;
    Spin q2;
    int n;
    cplx value;
};

struct PerturbativeAmplitudes {
    double tau{0.0};
    std::vector<Amplitude> entries;

    [[nodiscard]] double norm_squared() const {
        double s = 0.0;
        for (const auto& e : entries) s += std::norm(e.value);
        return s;
    }

    [[nodiscard]] cplx get(const std::string& label) const {
        for (const auto& e : entries) {
            if (e.label == label) return e.value;
        }
        throw std::invalid_argument("PerturbativeAmplitudes: no amplitude '" + label + "'");
    }

    /// State vector on `space` (amplitudes outside the truncation are an error).
    [[nodiscard]] Eigen::VectorXcd to_state(const HilbertSpec& space) const {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(space.dim());
        for (const auto& e : entries) {
            if (e.n > space.n_max) throw std::invalid_argument("PerturbativeAmplitudes: photon number beyond n_max");
            psi(space.encode(e.q1, e.q2, e.n)) += e.value;
        }
        return psi;
    }
};

/// Leading-order concurrence near the TC point: (2/3)(1-θ)(1 - cos(√6 gθ t)).
inline double tc_concurrence(double theta, double g, double t) {
    return std::max(0.0, (2.0 / 3.0) * (1.0 - theta) * (1.0 - std::cos(std::sqrt(6.0) * g * theta * t)));
}

/// Leading-order concurrence near the anti-TC point, clamped at zero.
inline double atc_concurrence(double theta, double g, double t) {
    const double w = g * (1.0 - theta) * t;
    const double s = std::sin(std::sqrt(6.0) * w);
    const double c = -(1.0 / 3.0) * s * s +
                     (2.0 / 7.0) * theta * (1.0 - std::cos(std::sqrt(6.0) * w)) * (std::cos(std::sqrt(14.0) * w) + 4.0 / 3.0);
    return std::max(0.0, c);
}

/// Exact θ = 0 solution from |↓↓,0⟩, which also serves as the zero-order term for small θ.
/// τ = g(1-θ)t. The |↑↑,2⟩ amplitude carries (cos√6τ - 1) so that it starts at zero.
inline PerturbativeAmplitudes atc_zero_order_amplitudes(double g, double theta, double t) {
    const double tau = g * (1.0 - theta) * t;
    const double w = std::sqrt(6.0) * tau;
    const cplx beta{0.0, -std::sin(w) / std::sqrt(6.0)};
    PerturbativeAmplitudes out;
    out.tau = tau;
    out.entries = {
        {"alpha_0", Spin::down, Spin::down, 0, cplx((2.0 + std::cos(w)) / 3.0)},
        {"beta_1_1", Spin::up, Spin::down, 1, beta},
        {"beta_2_1", Spin::down, Spin::up, 1, beta},
        {"gamma_2", Spin::up, Spin::up, 2, cplx(std::sqrt(2.0) / 3.0 * (std::cos(w) - 1.0))},
    };
    const double nrm = std::sqrt(out.norm_squared());
    for (auto& e : out.entries) e.value /= nrm;
    return out;
}

/// First order in (1-θ) near the TC point, τ = gθt.
///
/// The counterrotating term lifts |↓↓,0⟩ into the symmetric one-photon state,
/// which the TC term then mixes with |↑↑,0⟩ and |↓↓,2⟩ at frequency √6.
/// The |↑↑,0⟩ amplitude gamma_0 = -(1-θ)(1 - cos√6τ)/(3θ) sets the concurrence 2|α_0 γ_0|.
inline PerturbativeAmplitudes tc_first_order_amplitudes(double g, double theta, double t) {
    if (!(theta > 0.0)) throw std::invalid_argument("tc_first_order_amplitudes: theta must be > 0");
    const double tau = g * theta * t;
    const double w = std::sqrt(6.0) * tau;
    const double eps = (1.0 - theta) / theta;
    const cplx beta{0.0, -eps * std::sin(w) / std::sqrt(6.0)};
    PerturbativeAmplitudes out;
    out.tau = tau;
    out.entries = {
        {"alpha_0", Spin::down, Spin::down, 0, cplx(1.0)},
        {"beta_1_1", Spin::up, Spin::down, 1, beta},
        {"beta_2_1", Spin::down, Spin::up, 1, beta},
        {"gamma_0", Spin::up, Spin::up, 0, cplx(-eps * (1.0 - std::cos(w)) / 3.0)},
        {"delta_2", Spin::down, Spin::down, 2, cplx(-std::sqrt(2.0) * eps * (1.0 - std::cos(w)) / 3.0)},
    };
    return out;
}

/// Exact closed-system values at θ = 1/2.
struct HalfThetaForms {
    double pop_uu{0.0};
    double pop_ud{0.0};
    double pop_du{0.0};
    double pop_dd{0.0};
    double n_ph{0.0};
    double concurrence{0.0};
};

inline HalfThetaForms half_theta_closed_forms(double g, double t) {
    const double x = g * g * t * t;
    const double fast = std::exp(-2.0 * x);
    const double slow = std::exp(-0.5 * x);
    HalfThetaForms f;
    f.pop_uu = 3.0 / 8.0 + fast / 8.0 - slow / 2.0;
    f.pop_dd = 3.0 / 8.0 + fast / 8.0 + slow / 2.0;
    f.pop_ud = 1.0 / 8.0 - fast / 8.0;
    f.pop_du = f.pop_ud;
    f.n_ph = x / 2.0;
    f.concurrence = 0.0;
    return f;
}

}  // namespace lambqed
