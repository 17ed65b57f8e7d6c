#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lambqed/metrics.hpp"

using namespace lambqed;

namespace {

Matrix4 bell_phi() {
    Eigen::Vector4cd v(1.0, 0.0, 0.0, 1.0);
    v /= std::sqrt(2.0);
    return v * v.adjoint();
}

Matrix4 werner(double p) { return p * bell_phi() + (1.0 - p) * Matrix4::Identity() / 4.0; }

Eigen::Matrix2cd random_unitary(std::mt19937& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix2cd a;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = cplx(n(rng), n(rng));
    return Eigen::HouseholderQR<Eigen::Matrix2cd>(a).householderQ();
}

Matrix4 kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Matrix4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

}  // namespace

TEST(Concurrence, BellStateIsMaximal) {
    EXPECT_NEAR(concurrence(bell_phi()), 1.0, 1e-12);
    Eigen::Vector4cd psi(0.0, 1.0, -1.0, 0.0);
    psi /= std::sqrt(2.0);
    EXPECT_NEAR(concurrence(Matrix4(psi * psi.adjoint())), 1.0, 1e-12);
}

TEST(Concurrence, WernerFamily) {
    for (double p : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0}) {
        EXPECT_NEAR(concurrence(werner(p)), std::max(0.0, (3.0 * p - 1.0) / 2.0), 1e-9) << "p=" << p;
    }
    EXPECT_NEAR(concurrence(werner(0.8)), 0.7, 1e-10);
}

TEST(Concurrence, ProductAndMaximallyMixedAreZero) {
    Eigen::Vector2cd a(0.6, cplx(0.0, 0.8)), b(1.0, 0.0);
    Eigen::Vector4cd psi;
    psi << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    EXPECT_NEAR(concurrence(Matrix4(psi * psi.adjoint())), 0.0, 1e-6);
    EXPECT_EQ(concurrence(Matrix4(Matrix4::Identity() / 4.0)), 0.0);
}

// Pure states: C = 2|ad - bc| for |ψ⟩ = a|↑↑⟩ + b|↑↓⟩ + c|↓↑⟩ + d|↓↓⟩.
TEST(Concurrence, PureStateClosedForm) {
    std::mt19937 rng(23);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 25; ++k) {
        Eigen::Vector4cd psi;
        for (int i = 0; i < 4; ++i) psi(i) = cplx(n(rng), n(rng));
        psi.normalize();
        const double expected = 2.0 * std::abs(psi(0) * psi(3) - psi(1) * psi(2));
        EXPECT_NEAR(concurrence(Matrix4(psi * psi.adjoint())), expected, 1e-6);
    }
}

TEST(Concurrence, LocalUnitaryInvariance) {
    std::mt19937 rng(29);
    for (double p : {0.45, 0.9}) {
        const Matrix4 rho = werner(p);
        const Matrix4 u = kron2(random_unitary(rng), random_unitary(rng));
        EXPECT_NEAR(concurrence(Matrix4(u * rho * u.adjoint())), concurrence(rho), 1e-9);
    }
}

TEST(Concurrence, HomogeneousOnUnnormalizedBlocks) {
    EXPECT_NEAR(concurrence(Matrix4(0.25 * bell_phi())), 0.25, 1e-12);
    QubitPairState s{0.5 * werner(0.8), false};
    EXPECT_NEAR(concurrence(s), 0.35, 1e-10);
}

TEST(Entropy, KnownValuesInNats) {
    EXPECT_NEAR(von_neumann_entropy(DenseMatrix(Matrix4::Identity() / 4.0)), std::log(4.0), 1e-12);
    EXPECT_NEAR(von_neumann_entropy(DenseMatrix(bell_phi())), 0.0, 1e-12);
    const auto mi = mutual_information_parts(bell_phi());
    EXPECT_NEAR(mi.value(), 2.0 * std::log(2.0), 1e-12);
    EXPECT_NEAR(mi.s1, std::log(2.0), 1e-12);
    EXPECT_NEAR(mutual_information_parts(Matrix4(Matrix4::Identity() / 4.0)).value(), 0.0, 1e-12);
}

TEST(Entropy, RejectsUnnormalizedInput) {
    EXPECT_THROW(von_neumann_entropy(DenseMatrix(0.5 * bell_phi())), std::invalid_argument);
}

TEST(MetricNames, ParseRoundTrip) {
    for (const char* name : {"C", "I", "n_ph", "p_exc", "p_exc1", "p_exc2", "pop_uu", "pop_ud", "pop_du", "pop_dd",
                             "purity", "S_qq", "top_fock", "C0", "C12", "C3n"}) {
        EXPECT_EQ(Metric::parse(name).name(), name);
    }
    EXPECT_EQ(Metric::parse("C7").photon(), 7);
    EXPECT_EQ(Metric::parse("C7n").kind(), Metric::Kind::conditional_normalized);
    for (const char* bad : {"", "X", "C-1", "Cx", "Cn", "c", "C1.5", "n_photon"}) {
        EXPECT_THROW(Metric::parse(bad), std::invalid_argument) << bad;
    }
}

TEST(MetricEvaluation, ObservablesAndConditionalBlocks) {
    const auto s = build_space(3);
    // (|↑↓,1⟩ - |↓↑,1⟩)/√2 ⊗ mixed with |↓↓,0⟩: weights 0.4 and 0.6
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(s.dim());
    psi(s.encode(Spin::up, Spin::down, 1)) = 1.0 / std::sqrt(2.0);
    psi(s.encode(Spin::down, Spin::up, 1)) = -1.0 / std::sqrt(2.0);
    DenseMatrix m = 0.4 * psi * psi.adjoint();
    m(s.encode(Spin::down, Spin::down, 0), s.encode(Spin::down, Spin::down, 0)) = 0.6;
    const DensityMatrix rho(s, m);
    EXPECT_NEAR(Metric::parse("n_ph").evaluate(rho), 0.4, 1e-15);
    EXPECT_NEAR(Metric::parse("p_exc").evaluate(rho), 0.2, 1e-15);
    EXPECT_NEAR(Metric::parse("p_exc1").evaluate(rho), 0.2, 1e-15);
    EXPECT_NEAR(Metric::parse("pop_dd").evaluate(rho), 0.6, 1e-15);
    EXPECT_NEAR(Metric::parse("C1").evaluate(rho), 0.4, 1e-6);
    EXPECT_NEAR(Metric::parse("C1n").evaluate(rho), 1.0, 1e-6);
    EXPECT_NEAR(Metric::parse("C0").evaluate(rho), 0.0, 1e-6);
    EXPECT_NEAR(Metric::parse("C2n").evaluate(rho), 0.0, 1e-15);
    // photon trace: 0.4 singlet + 0.6 |↓↓⟩, concurrence 0.4
    EXPECT_NEAR(Metric::parse("C").evaluate(rho), 0.4, 1e-6);
    EXPECT_NEAR(Metric::parse("purity").evaluate(rho), 0.16 + 0.36, 1e-15);
    EXPECT_THROW((void)Metric::parse("C4").evaluate(rho), std::invalid_argument);
}
