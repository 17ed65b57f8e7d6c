#include <random>

#include <gtest/gtest.h>

#include "lambqed/hilbert.hpp"

using namespace lambqed;

namespace {

DenseMatrix random_density(int dim, std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    DenseMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cplx(n(rng), n(rng));
    DenseMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

}  // namespace

TEST(HilbertSpec, DimensionsAndLayout) {
    const auto s = build_space(3);
    EXPECT_EQ(s.photon_dim(), 4);
    EXPECT_EQ(s.dim(), 16);
    EXPECT_EQ(s.encode(Spin::up, Spin::up, 0), 0);
    EXPECT_EQ(s.encode(Spin::down, Spin::down, 0), 3);
    EXPECT_EQ(s.encode(Spin::up, Spin::down, 2), 9);
    for (int i = 0; i < s.dim(); ++i) {
        const auto t = s.decode(i);
        EXPECT_EQ(s.encode(t.q1, t.q2, t.n), i);
    }
    EXPECT_EQ(build_space(20).dim(), 84);
}

TEST(HilbertSpec, RejectsEmptyPhotonSpace) {
    EXPECT_THROW(build_space(0), std::invalid_argument);
    EXPECT_THROW(build_space(-2), std::invalid_argument);
}

TEST(Operators, LadderAlgebra) {
    const auto s = build_space(6);
    const auto ops = build_operators(s);
    const DenseMatrix comm = (ops.a * ops.a_dag - ops.a_dag * ops.a).dense();
    // [a, a†] = 1 except on the top Fock level, where truncation leaves -n_max
    for (int i = 0; i < s.dim(); ++i) {
        const int n = s.decode(i).n;
        EXPECT_NEAR(comm(i, i).real(), n == s.n_max ? -s.n_max : 1.0, 1e-14);
    }
    EXPECT_LT((ops.number.dense() - (ops.a_dag * ops.a).dense()).norm(), 1e-13);
    EXPECT_LT((ops.a.dense().adjoint() - ops.a_dag.dense()).norm(), 1e-15);
}

TEST(Operators, SpinAlgebra) {
    const auto s = build_space(2);
    const auto ops = build_operators(s);
    for (int j = 1; j <= 2; ++j) {
        const DenseMatrix sp = ops.sigma_plus(j).dense(), sm = ops.sigma_minus(j).dense(), sz = ops.sigma_z(j).dense();
        const DenseMatrix id = DenseMatrix::Identity(s.dim(), s.dim());
        EXPECT_LT((sp * sm - sm * sp - sz).norm(), 1e-14);
        EXPECT_LT((sp * sm + sm * sp - id).norm(), 1e-14);
        EXPECT_LT((sz * sz - id).norm(), 1e-14);
    }
    // σ+ raises ↓ to ↑ on the addressed qubit only
    Eigen::VectorXcd dd = Eigen::VectorXcd::Zero(s.dim());
    dd(s.encode(Spin::down, Spin::down, 1)) = 1.0;
    const Eigen::VectorXcd ud = ops.sigma_plus_1.matrix * dd;
    EXPECT_NEAR(std::abs(ud(s.encode(Spin::up, Spin::down, 1))), 1.0, 1e-15);
    EXPECT_NEAR(ud.norm(), 1.0, 1e-15);
    // qubits commute with each other and with the field
    EXPECT_LT((ops.sigma_plus_1 * ops.sigma_minus_2 - ops.sigma_minus_2 * ops.sigma_plus_1).dense().norm(), 1e-15);
    EXPECT_LT((ops.sigma_plus_1 * ops.a - ops.a * ops.sigma_plus_1).dense().norm(), 1e-15);
}

TEST(DensityMatrix, ValidationRejectsBadMatrices) {
    const auto s = build_space(1);
    DenseMatrix m = DenseMatrix::Identity(s.dim(), s.dim()) / s.dim();
    EXPECT_NO_THROW(DensityMatrix(s, m));

    DenseMatrix not_herm = m;
    not_herm(0, 1) = cplx(0.0, 0.1);
    EXPECT_THROW(DensityMatrix(s, not_herm), std::invalid_argument);

    EXPECT_THROW(DensityMatrix(s, 2.0 * m), std::invalid_argument);

    DenseMatrix negative = DenseMatrix::Zero(s.dim(), s.dim());
    negative(0, 0) = 1.1;
    negative(1, 1) = -0.1;
    EXPECT_THROW(DensityMatrix(s, negative), std::invalid_argument);

    EXPECT_THROW(DensityMatrix(s, DenseMatrix::Identity(3, 3) / 3.0), std::invalid_argument);
}

TEST(DensityMatrix, GroundStateAndPurity) {
    const auto s = build_space(4);
    const auto rho = DensityMatrix::ground_state(s);
    EXPECT_DOUBLE_EQ(rho.matrix()(s.encode(Spin::down, Spin::down, 0), s.encode(Spin::down, Spin::down, 0)).real(), 1.0);
    EXPECT_NEAR(rho.purity(), 1.0, 1e-15);
    const auto d = rho.diagnostics();
    EXPECT_EQ(d.hermiticity_error, 0.0);
    EXPECT_NEAR(d.trace_error, 0.0, 1e-15);
    EXPECT_NEAR(d.min_eigenvalue, 0.0, 1e-14);
}

TEST(DensityMatrix, CholeskyTestMatchesEigenvalues) {
    std::mt19937 rng(3);
    for (int k = 0; k < 10; ++k) {
        DenseMatrix m = random_density(8, rng);
        m.diagonal().array() -= 0.02 * k;
        const double lmin = min_eigenvalue(m);
        EXPECT_EQ(eigenvalues_above(m, -1e-7), lmin >= -1e-7) << "lmin=" << lmin;
    }
}

// Independent oracle: explicit index sums over the decoded basis labels.
TEST(PartialTrace, MatchesBruteForce) {
    std::mt19937 rng(11);
    const auto s = build_space(3);
    const DensityMatrix rho(s, random_density(s.dim(), rng));
    const DenseMatrix& m = rho.matrix();

    DenseMatrix qq = DenseMatrix::Zero(4, 4), ph = DenseMatrix::Zero(4, 4), q1 = DenseMatrix::Zero(2, 2),
                q2 = DenseMatrix::Zero(2, 2);
    for (int i = 0; i < s.dim(); ++i) {
        for (int j = 0; j < s.dim(); ++j) {
            const auto a = s.decode(i), b = s.decode(j);
            const int qa = 2 * static_cast<int>(a.q1) + static_cast<int>(a.q2);
            const int qb = 2 * static_cast<int>(b.q1) + static_cast<int>(b.q2);
            if (a.n == b.n) qq(qa, qb) += m(i, j);
            if (qa == qb) ph(a.n, b.n) += m(i, j);
            if (a.n == b.n && a.q2 == b.q2) q1(static_cast<int>(a.q1), static_cast<int>(b.q1)) += m(i, j);
            if (a.n == b.n && a.q1 == b.q1) q2(static_cast<int>(a.q2), static_cast<int>(b.q2)) += m(i, j);
        }
    }
    EXPECT_LT((partial_trace(rho, Subsystem::qubits) - qq).norm(), 1e-14);
    EXPECT_LT((partial_trace(rho, Subsystem::photon) - ph).norm(), 1e-14);
    EXPECT_LT((partial_trace(rho, Subsystem::qubit1) - q1).norm(), 1e-14);
    EXPECT_LT((partial_trace(rho, Subsystem::qubit2) - q2).norm(), 1e-14);
    EXPECT_LT((DenseMatrix(reduce_qubit_pair(Matrix4(qq), 1)) - q1).norm(), 1e-14);
    EXPECT_LT((DenseMatrix(reduce_qubit_pair(Matrix4(qq), 2)) - q2).norm(), 1e-14);
}

TEST(PhotonBlock, ExtractsUnnormalizedBlockAndChecksRange) {
    std::mt19937 rng(5);
    const auto s = build_space(2);
    const DensityMatrix rho(s, random_density(s.dim(), rng));
    Matrix4 sum = Matrix4::Zero();
    for (int n = 0; n <= s.n_max; ++n) sum += photon_block(rho, n);
    EXPECT_LT((DenseMatrix(sum) - partial_trace(rho, Subsystem::qubits)).norm(), 1e-14);
    EXPECT_THROW(photon_block(rho, 3), std::invalid_argument);
    EXPECT_THROW(photon_block(rho, -1), std::invalid_argument);
}

TEST(TopFock, CountsHighestLevels) {
    const auto s = build_space(5);
    const auto top = DensityMatrix::basis_state(s, Spin::up, Spin::down, 4);
    EXPECT_DOUBLE_EQ(top_fock_population(top.matrix(), s), 1.0);
    EXPECT_DOUBLE_EQ(top_fock_population(top.matrix(), s, 1), 0.0);
    EXPECT_DOUBLE_EQ(top_fock_population(DensityMatrix::ground_state(s).matrix(), s), 0.0);
}
