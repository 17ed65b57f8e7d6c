// hilbert.hpp: Two-qubit ⊗ truncated-Fock space, embedded operators, partial traces

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

namespace lambqed {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Matrix4 = Eigen::Matrix4cd;

/// Single-qubit level. The numeric value is the bit used in the flat index.
enum class Spin : int { up = 0, down = 1 };

/// Dimensions and index layout of the composite space.
///
/// Flat index = n * 4 + q with q = 2 * s1 + s2 and s = 0 (up), 1 (down),
/// so the qubit ordering inside each photon block is (↑↑, ↑↓, ↓↑, ↓↓) and
/// every fixed-photon-number block is a contiguous 4×4 slice.
struct HilbertSpec {
    int n_max{1};

    static constexpr int qubit_count = 2;
    static constexpr int qubit_dim = 4;

    [[nodiscard]] constexpr int photon_dim() const noexcept { return n_max + 1; }
    [[nodiscard]] constexpr int dim() const noexcept { return qubit_dim * photon_dim(); }

    [[nodiscard]] constexpr int encode(Spin q1, Spin q2, int n) const noexcept {
        return n * qubit_dim + 2 * static_cast<int>(q1) + static_cast<int>(q2);
    }

    struct Triple {
        Spin q1;
        Spin q2;
        int n;
        friend bool operator==(const Triple&, const Triple&) = default;
    };

    [[nodiscard]] constexpr Triple decode(int index) const noexcept {
        const int q = index % qubit_dim;
        return {static_cast<Spin>(q / 2), static_cast<Spin>(q % 2), index / qubit_dim};
    }

    friend bool operator==(const HilbertSpec&, const HilbertSpec&) = default;
};

inline HilbertSpec build_space(int n_max) {
    if (n_max < 1) {
        throw std::invalid_argument("build_space: n_max must be >= 1 (got " + std::to_string(n_max) + ")");
    }
    return HilbertSpec{n_max};
}

/// An operator on the composite space, stored sparse.
struct Operator {
    SparseMatrix matrix;
    HilbertSpec space;

    [[nodiscard]] DenseMatrix dense() const { return DenseMatrix(matrix); }
    [[nodiscard]] Operator adjoint() const { return {SparseMatrix(matrix.adjoint()), space}; }
};

inline Operator operator*(const Operator& lhs, const Operator& rhs) {
    return {SparseMatrix(lhs.matrix * rhs.matrix), lhs.space};
}
inline Operator operator+(const Operator& lhs, const Operator& rhs) {
    return {SparseMatrix(lhs.matrix + rhs.matrix), lhs.space};
}
inline Operator operator-(const Operator& lhs, const Operator& rhs) {
    return {SparseMatrix(lhs.matrix - rhs.matrix), lhs.space};
}
inline Operator operator*(cplx s, const Operator& op) { return {SparseMatrix(s * op.matrix), op.space}; }
inline Operator operator*(double s, const Operator& op) { return {SparseMatrix(s * op.matrix), op.space}; }

/// Ladder, spin and number operators embedded with identities on the other factors.
struct OperatorSet {
    Operator a;
    Operator a_dag;
    Operator sigma_plus_1;
    Operator sigma_minus_1;
    Operator sigma_plus_2;
    Operator sigma_minus_2;
    Operator sigma_z_1;
    Operator sigma_z_2;
    Operator number;

    [[nodiscard]] const Operator& sigma_plus(int qubit) const { return qubit == 1 ? sigma_plus_1 : sigma_plus_2; }
    [[nodiscard]] const Operator& sigma_minus(int qubit) const { return qubit == 1 ? sigma_minus_1 : sigma_minus_2; }
    [[nodiscard]] const Operator& sigma_z(int qubit) const { return qubit == 1 ? sigma_z_1 : sigma_z_2; }
};

namespace detail {

using Triplet = Eigen::Triplet<cplx>;

inline Operator from_triplets(const HilbertSpec& space, const std::vector<Triplet>& entries) {
    SparseMatrix m(space.dim(), space.dim());
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return {std::move(m), space};
}

inline Spin flip(Spin s) { return s == Spin::up ? Spin::down : Spin::up; }

}  // namespace detail

inline OperatorSet build_operators(const HilbertSpec& space) {
    using detail::Triplet;
    std::vector<Triplet> a, sp1, sp2, sz1, sz2, num;
    const std::array<Spin, 2> spins{Spin::up, Spin::down};
    for (int n = 0; n <= space.n_max; ++n) {
        for (Spin s1 : spins) {
            for (Spin s2 : spins) {
                const int col = space.encode(s1, s2, n);
                if (n > 0) {
                    a.emplace_back(space.encode(s1, s2, n - 1), col, std::sqrt(static_cast<double>(n)));
                }
                // σ+ |↓⟩ = |↑⟩
                if (s1 == Spin::down) sp1.emplace_back(space.encode(Spin::up, s2, n), col, 1.0);
                if (s2 == Spin::down) sp2.emplace_back(space.encode(s1, Spin::up, n), col, 1.0);
                sz1.emplace_back(col, col, s1 == Spin::up ? 1.0 : -1.0);
                sz2.emplace_back(col, col, s2 == Spin::up ? 1.0 : -1.0);
                num.emplace_back(col, col, static_cast<double>(n));
            }
        }
    }
    OperatorSet ops{
        detail::from_triplets(space, a),   {},
        detail::from_triplets(space, sp1), {},
        detail::from_triplets(space, sp2), {},
        detail::from_triplets(space, sz1), detail::from_triplets(space, sz2),
        detail::from_triplets(space, num),
    };
    ops.a_dag = ops.a.adjoint();
    ops.sigma_minus_1 = ops.sigma_plus_1.adjoint();
    ops.sigma_minus_2 = ops.sigma_plus_2.adjoint();
    return ops;
}

/// Tolerances used to accept a matrix as a density matrix.
struct DensityTolerance {
    double hermiticity{1e-10};
    double trace{1e-8};
    double min_eigenvalue{-1e-7};
};

struct DensityDiagnostics {
    double hermiticity_error{0.0};  // max |ρ - ρ†|
    double trace_error{0.0};        // |Tr ρ - 1|
    double min_eigenvalue{0.0};
};

inline double hermiticity_error(const DenseMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline double min_eigenvalue(const DenseMatrix& m) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// True iff the Hermitian part of m has no eigenvalue below `floor` (floor <= 0).
/// Cholesky of m - floor·I succeeds exactly in that case, at a fraction of an eigensolve.
inline bool eigenvalues_above(const DenseMatrix& m, double floor) {
    DenseMatrix shifted = 0.5 * (m + m.adjoint());
    shifted.diagonal().array() -= floor;
    Eigen::LLT<DenseMatrix> llt(shifted);
    return llt.info() == Eigen::Success;
}

/// Hermitian, unit-trace, positive semidefinite matrix on a HilbertSpec.
class DensityMatrix {
public:
    DensityMatrix() = default;

    /// Validates against `tol`; throws std::invalid_argument on violation.
    DensityMatrix(const HilbertSpec& space, DenseMatrix matrix, const DensityTolerance& tol = {})
        : space_(space), matrix_(std::move(matrix)) {
        if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim()) {
            throw std::invalid_argument("DensityMatrix: matrix is " + std::to_string(matrix_.rows()) + "x" +
                                        std::to_string(matrix_.cols()) + ", space dim is " +
                                        std::to_string(space_.dim()));
        }
        const double herm = hermiticity_error(matrix_);
        if (herm > tol.hermiticity) {
            throw std::invalid_argument("DensityMatrix: not Hermitian (error " + std::to_string(herm) + ")");
        }
        const double tr = std::abs(matrix_.trace() - cplx(1.0));
        if (tr > tol.trace) {
            throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " + std::to_string(tr));
        }
        if (!eigenvalues_above(matrix_, tol.min_eigenvalue)) {
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lambqed::min_eigenvalue(matrix_)));
        }
    }

    /// Skips validation. For states produced by trusted numerical kernels.
    struct unchecked_t {};
    static constexpr unchecked_t unchecked{};
    DensityMatrix(const HilbertSpec& space, DenseMatrix matrix, unchecked_t) : space_(space), matrix_(std::move(matrix)) {}

    static DensityMatrix from_pure(const HilbertSpec& space, const Eigen::VectorXcd& psi) {
        const Eigen::VectorXcd v = psi / psi.norm();
        return {space, v * v.adjoint(), unchecked};
    }

    static DensityMatrix basis_state(const HilbertSpec& space, Spin q1, Spin q2, int n) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(space.dim());
        psi(space.encode(q1, q2, n)) = 1.0;
        return from_pure(space, psi);
    }

    /// |↓↓,0⟩⟨↓↓,0|
    static DensityMatrix ground_state(const HilbertSpec& space) { return basis_state(space, Spin::down, Spin::down, 0); }

    [[nodiscard]] const HilbertSpec& space() const noexcept { return space_; }
    [[nodiscard]] const DenseMatrix& matrix() const noexcept { return matrix_; }
    [[nodiscard]] int dim() const noexcept { return space_.dim(); }

    [[nodiscard]] DensityDiagnostics diagnostics() const {
        return {hermiticity_error(matrix_), std::abs(matrix_.trace() - cplx(1.0)), lambqed::min_eigenvalue(matrix_)};
    }

    [[nodiscard]] double purity() const { return (matrix_ * matrix_).trace().real(); }

private:
    HilbertSpec space_{};
    DenseMatrix matrix_;
};

enum class Subsystem { qubits, photon, qubit1, qubit2 };

/// Reduced density matrix of the selected subsystem (4×4, (n_max+1)², 2×2 or 2×2).
inline DenseMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
    const auto& space = rho.space();
    const auto& m = rho.matrix();
    const int np = space.photon_dim();
    constexpr int nq = HilbertSpec::qubit_dim;
    switch (keep) {
        case Subsystem::photon: {
            DenseMatrix out(np, np);
            for (int n = 0; n < np; ++n)
                for (int k = 0; k < np; ++k) out(n, k) = m.block(n * nq, k * nq, nq, nq).trace();
            return out;
        }
        case Subsystem::qubits: {
            DenseMatrix out = DenseMatrix::Zero(nq, nq);
            for (int n = 0; n < np; ++n) out += m.block(n * nq, n * nq, nq, nq);
            return out;
        }
        case Subsystem::qubit1:
        case Subsystem::qubit2: {
            DenseMatrix qq = DenseMatrix::Zero(nq, nq);
            for (int n = 0; n < np; ++n) qq += m.block(n * nq, n * nq, nq, nq);
            DenseMatrix out = DenseMatrix::Zero(2, 2);
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int s = 0; s < 2; ++s)
                        out(a, b) += keep == Subsystem::qubit1 ? qq(2 * a + s, 2 * b + s) : qq(2 * s + a, 2 * s + b);
            return out;
        }
    }
    throw std::logic_error("partial_trace: unknown subsystem");
}

/// Single-qubit reductions of a 4×4 two-qubit matrix (basis ↑↑, ↑↓, ↓↑, ↓↓).
inline Eigen::Matrix2cd reduce_qubit_pair(const Matrix4& qq, int keep_qubit) {
    Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int s = 0; s < 2; ++s) out(a, b) += keep_qubit == 1 ? qq(2 * a + s, 2 * b + s) : qq(2 * s + a, 2 * s + b);
    return out;
}

/// 4×4 qubit block at fixed photon number i, not renormalized.
inline Matrix4 photon_block(const DensityMatrix& rho, int i) {
    if (i < 0 || i > rho.space().n_max) {
        throw std::invalid_argument("photon_block: photon number " + std::to_string(i) + " outside [0, " +
                                    std::to_string(rho.space().n_max) + "]");
    }
    constexpr int nq = HilbertSpec::qubit_dim;
    return rho.matrix().block<nq, nq>(i * nq, i * nq);
}

/// Population in the highest `levels` Fock states; the truncation diagnostic.
inline double top_fock_population(const DenseMatrix& m, const HilbertSpec& space, int levels = 2) {
    constexpr int nq = HilbertSpec::qubit_dim;
    double p = 0.0;
    for (int n = std::max(0, space.n_max - levels + 1); n <= space.n_max; ++n) {
        p += m.block(n * nq, n * nq, nq, nq).trace().real();
    }
    return p;
}

}  // namespace lambqed
