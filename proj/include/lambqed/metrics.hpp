// metrics.hpp: Concurrence, conditional concurrence, entropies and observables

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lambqed/hilbert.hpp"

namespace lambqed {

/// 4×4 two-qubit matrix in the basis (↑↑, ↑↓, ↓↑, ↓↓). `normalized` is false
/// for raw photon-number blocks whose trace is below one.
struct QubitPairState {
    Matrix4 matrix{Matrix4::Zero()};
    bool normalized{true};
};

struct ConcurrenceDetail {
    double value{0.0};
    std::array<double, 4> lambdas{};  // descending, clamped at 0
    double max_imag_residue{0.0};     // largest |Im λ| discarded
};

/// Wootters concurrence from the eigenvalues of ρ (σy⊗σy) ρ* (σy⊗σy).
/// Works on unnormalized blocks; the result is then homogeneous of degree 1.
inline ConcurrenceDetail concurrence_detail(const Matrix4& rho) {
    // σy⊗σy in (↑↑, ↑↓, ↓↑, ↓↓): anti-diagonal (-1, 1, 1, -1)
    Matrix4 yy = Matrix4::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix4 r = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Matrix4> es(r, /*computeEigenvectors=*/false);
    ConcurrenceDetail out;
    for (int i = 0; i < 4; ++i) {
        out.lambdas[i] = std::max(0.0, es.eigenvalues()(i).real());
        out.max_imag_residue = std::max(out.max_imag_residue, std::abs(es.eigenvalues()(i).imag()));
    }
    std::sort(out.lambdas.begin(), out.lambdas.end(), std::greater<>());
    const double c = std::sqrt(out.lambdas[0]) - std::sqrt(out.lambdas[1]) - std::sqrt(out.lambdas[2]) -
                     std::sqrt(out.lambdas[3]);
    out.value = std::max(0.0, c);
    return out;
}

inline double concurrence(const Matrix4& rho) { return concurrence_detail(rho).value; }
inline double concurrence(const QubitPairState& s) { return concurrence(s.matrix); }

/// Concurrence of the qubit pair after tracing out photons.
inline double concurrence(const DensityMatrix& rho) {
    return concurrence(Matrix4(partial_trace(rho, Subsystem::qubits)));
}

/// Concurrence formula applied to the fixed-photon-number block i.
inline double conditional_concurrence(const DensityMatrix& rho, int i, bool normalize = false) {
    Matrix4 block = photon_block(rho, i);
    if (normalize) {
        const double tr = block.trace().real();
        if (tr <= 0.0) return 0.0;
        block /= tr;
    }
    return concurrence(block);
}

/// S = -Σ λ ln λ (nats); eigenvalues below 1e-12 count as zero.
inline double von_neumann_entropy(const DenseMatrix& rho) {
    const double tr_err = std::abs(rho.trace() - cplx(1.0));
    if (tr_err > 1e-6) {
        throw std::invalid_argument("von_neumann_entropy: trace deviates from 1 by " + std::to_string(tr_err));
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double l = es.eigenvalues()(k);
        if (l > 1e-12) s -= l * std::log(l);
    }
    return s;
}

struct MutualInformation {
    double s1{0.0};
    double s2{0.0};
    double s12{0.0};
    [[nodiscard]] double value() const {
        const double i = s1 + s2 - s12;
        return (i < 0.0 && i > -1e-9) ? 0.0 : i;
    }
};

inline MutualInformation mutual_information_parts(const Matrix4& qq) {
    return {von_neumann_entropy(DenseMatrix(reduce_qubit_pair(qq, 1))),
            von_neumann_entropy(DenseMatrix(reduce_qubit_pair(qq, 2))), von_neumann_entropy(DenseMatrix(qq))};
}

/// I = S1 + S2 - S12 between the qubits, photons traced out first.
inline double mutual_information(const DensityMatrix& rho) {
    return mutual_information_parts(Matrix4(partial_trace(rho, Subsystem::qubits))).value();
}

struct Observables {
    double n_ph{0.0};
    double p_excited_q1{0.0};
    double p_excited_q2{0.0};
    double pop_uu{0.0};
    double pop_ud{0.0};
    double pop_du{0.0};
    double pop_dd{0.0};
};

inline Observables observables(const DensityMatrix& rho) {
    const auto& m = rho.matrix();
    constexpr int nq = HilbertSpec::qubit_dim;
    Observables o;
    for (int n = 0; n <= rho.space().n_max; ++n) {
        const auto block = m.block<nq, nq>(n * nq, n * nq);
        const double p_uu = block(0, 0).real(), p_ud = block(1, 1).real(), p_du = block(2, 2).real(),
                     p_dd = block(3, 3).real();
        o.n_ph += n * (p_uu + p_ud + p_du + p_dd);
        o.pop_uu += p_uu;
        o.pop_ud += p_ud;
        o.pop_du += p_du;
        o.pop_dd += p_dd;
    }
    o.p_excited_q1 = o.pop_uu + o.pop_ud;
    o.p_excited_q2 = o.pop_uu + o.pop_du;
    return o;
}

/// A named scalar channel evaluated on a density matrix.
///
/// Names: C, I, n_ph, p_exc (mean of both qubits), p_exc1, p_exc2, pop_uu, pop_ud,
/// pop_du, pop_dd, purity, S_qq, top_fock, C<i> (raw conditional concurrence at
/// photon number i) and C<i>n (the same block renormalized).
class Metric {
public:
    enum class Kind {
        concurrence,
        mutual_information,
        n_ph,
        p_exc,
        p_exc1,
        p_exc2,
        pop_uu,
        pop_ud,
        pop_du,
        pop_dd,
        purity,
        entropy_qq,
        top_fock,
        conditional,
        conditional_normalized,
    };

    Metric(Kind kind, int photon = 0) : kind_(kind), photon_(photon) {}

    static Metric parse(std::string_view name) {
        struct Entry {
            std::string_view name;
            Kind kind;
        };
        static constexpr std::array<Entry, 13> table{{
            {"C", Kind::concurrence},
            {"I", Kind::mutual_information},
            {"n_ph", Kind::n_ph},
            {"p_exc", Kind::p_exc},
            {"p_exc1", Kind::p_exc1},
            {"p_exc2", Kind::p_exc2},
            {"pop_uu", Kind::pop_uu},
            {"pop_ud", Kind::pop_ud},
            {"pop_du", Kind::pop_du},
            {"pop_dd", Kind::pop_dd},
            {"purity", Kind::purity},
            {"S_qq", Kind::entropy_qq},
            {"top_fock", Kind::top_fock},
        }};
        for (const auto& e : table) {
            if (e.name == name) return Metric(e.kind);
        }
        if (name.size() >= 2 && name.front() == 'C') {
            std::string_view digits = name.substr(1);
            bool norm = false;
            if (digits.back() == 'n') {
                norm = true;
                digits.remove_suffix(1);
            }
            int photon = -1;
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), photon);
            if (ec == std::errc{} && ptr == digits.data() + digits.size() && photon >= 0) {
                return Metric(norm ? Kind::conditional_normalized : Kind::conditional, photon);
            }
        }
        throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
    }

    static std::vector<Metric> parse_list(const std::vector<std::string>& names) {
        std::vector<Metric> out;
        out.reserve(names.size());
        for (const auto& n : names) out.push_back(parse(n));
        return out;
    }

    [[nodiscard]] std::string name() const {
        switch (kind_) {
            case Kind::concurrence: return "C";
            case Kind::mutual_information: return "I";
            case Kind::n_ph: return "n_ph";
            case Kind::p_exc: return "p_exc";
            case Kind::p_exc1: return "p_exc1";
            case Kind::p_exc2: return "p_exc2";
            case Kind::pop_uu: return "pop_uu";
            case Kind::pop_ud: return "pop_ud";
            case Kind::pop_du: return "pop_du";
            case Kind::pop_dd: return "pop_dd";
            case Kind::purity: return "purity";
            case Kind::entropy_qq: return "S_qq";
            case Kind::top_fock: return "top_fock";
            case Kind::conditional: return "C" + std::to_string(photon_);
            case Kind::conditional_normalized: return "C" + std::to_string(photon_) + "n";
        }
        return "?";
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] int photon() const noexcept { return photon_; }

    [[nodiscard]] double evaluate(const DensityMatrix& rho) const {
        switch (kind_) {
            case Kind::concurrence: return concurrence(rho);
            case Kind::mutual_information: return mutual_information(rho);
            case Kind::purity: return rho.purity();
            case Kind::entropy_qq: return von_neumann_entropy(partial_trace(rho, Subsystem::qubits));
            case Kind::top_fock: return top_fock_population(rho.matrix(), rho.space());
            case Kind::conditional: return conditional_concurrence(rho, photon_, false);
            case Kind::conditional_normalized: return conditional_concurrence(rho, photon_, true);
            default: break;
        }
        const Observables o = observables(rho);
        switch (kind_) {
            case Kind::n_ph: return o.n_ph;
            case Kind::p_exc: return 0.5 * (o.p_excited_q1 + o.p_excited_q2);
            case Kind::p_exc1: return o.p_excited_q1;
            case Kind::p_exc2: return o.p_excited_q2;
            case Kind::pop_uu: return o.pop_uu;
            case Kind::pop_ud: return o.pop_ud;
            case Kind::pop_du: return o.pop_du;
            case Kind::pop_dd: return o.pop_dd;
            default: break;
        }
        throw std::logic_error("Metric::evaluate: unhandled kind");
    }

    friend bool operator==(const Metric&, const Metric&) = default;

private:
    Kind kind_;
    int photon_{0};
};

}  // namespace lambqed
