#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bloch/matcore.hpp"

using namespace bloch;

namespace {

std::mt19937_64 rng(12345);

CMatrix random_complex(int rows, int cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = cdouble(g(rng), g(rng));
    return m;
}

CMatrix random_hermitian(int n) {
    CMatrix a = random_complex(n, n);
    return 0.5 * (a + a.adjoint()).eval();
}

CMatrix random_antihermitian(int n, double phase_cap) {
    // spectrum drawn inside (-phase_cap, phase_cap) so logs stay principal
    HermEig e = herm_eig(random_hermitian(n));
    std::uniform_real_distribution<double> u(-phase_cap, phase_cap);
    CMatrix l = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        l += cdouble(0.0, u(rng)) * (e.eigenvectors.col(j) * e.eigenvectors.col(j).adjoint());
    return (0.5 * (l - l.adjoint())).eval();
}

// independent orthonormalization oracle: A (A*A)^{-1/2} via Hermitian
// eigendecomposition of the Gram matrix
CMatrix polar_oracle(const CMatrix& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.adjoint() * a);
    CMatrix inv_sqrt = CMatrix::Zero(a.cols(), a.cols());
    for (int j = 0; j < a.cols(); ++j)
        inv_sqrt += 1.0 / std::sqrt(es.eigenvalues()(j)) *
                    (es.eigenvectors().col(j) * es.eigenvectors().col(j).adjoint());
    return a * inv_sqrt;
}

} // namespace

TEST_CASE("herm_eig identity") {
    HermEig e = herm_eig(CMatrix::Identity(2, 2));
    CHECK(e.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(e.eigenvalues(1) == doctest::Approx(1.0));
    CHECK(max_abs(e.eigenvectors - CMatrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("herm_eig diagonal ordering") {
    CMatrix a(2, 2);
    a << 3, 0, 0, -1;
    HermEig e = herm_eig(a);
    CHECK(e.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(e.eigenvalues(1) == doctest::Approx(3.0));
    CHECK(std::abs(e.eigenvectors(1, 0)) == doctest::Approx(1.0)); // e2 first
    CHECK(std::abs(e.eigenvectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("herm_eig random round trip") {
    CMatrix a = random_hermitian(6);
    HermEig e = herm_eig(a);
    double scale = a.norm();
    for (int j = 0; j < 6; ++j) {
        double res = (a * e.eigenvectors.col(j) - e.eigenvalues(j) * e.eigenvectors.col(j)).norm();
        CHECK(res <= 1e-10 * scale);
    }
    CMatrix recon = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.adjoint();
    CHECK(max_abs(recon - a) < 1e-12 * std::max(1.0, scale));
    CHECK(unitarity_residual(e.eigenvectors) < 1e-13);
}

TEST_CASE("herm_eig rejects non-hermitian") {
    CMatrix a(2, 2);
    a << 0, 1, 0, 0;
    CHECK_THROWS_AS(herm_eig(a), NonHermitian);
}

TEST_CASE("herm_eig phase fix is deterministic") {
    CMatrix a = random_hermitian(5);
    HermEig e1 = herm_eig(a);
    HermEig e2 = herm_eig(a);
    CHECK(std::memcmp(e1.eigenvectors.data(), e2.eigenvectors.data(),
                      sizeof(cdouble) * 25) == 0);
    CHECK(std::memcmp(e1.eigenvalues.data(), e2.eigenvalues.data(), sizeof(double) * 5) == 0);
    // largest-modulus component real positive
    for (int j = 0; j < 5; ++j) {
        int imax = 0;
        double best = 0;
        for (int i = 0; i < 5; ++i)
            if (std::abs(e1.eigenvectors(i, j)) > best) best = std::abs(e1.eigenvectors(i, j)), imax = i;
        CHECK(e1.eigenvectors(imax, j).imag() == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(e1.eigenvectors(imax, j).real() > 0.0);
    }
}

TEST_CASE("loewdin leaves orthonormal input unchanged") {
    HermEig e = herm_eig(random_hermitian(4));
    CMatrix q = e.eigenvectors.leftCols(2);
    CHECK(max_abs(loewdin(q) - q) < 1e-12);
}

TEST_CASE("loewdin normalizes a single column") {
    CMatrix a(2, 1);
    a << 2, 0;
    CMatrix q = loewdin(a);
    CHECK(q(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(q(1, 0)) < 1e-15);
}

TEST_CASE("loewdin matches the polar-factor oracle") {
    CMatrix a = random_complex(4, 2);
    CMatrix q = loewdin(a);
    CHECK(max_abs(q - polar_oracle(a)) < 1e-10);
    CHECK(unitarity_residual(q) < 1e-13);
}

TEST_CASE("loewdin is idempotent") {
    CMatrix a = random_complex(5, 3);
    CMatrix q = loewdin(a);
    CHECK(max_abs(loewdin(q) - q) < 1e-12);
}

TEST_CASE("loewdin flags rank deficiency") {
    CMatrix a(3, 2);
    a << 1, 1, 1, 1, 0, 1e-12;
    CHECK_THROWS_AS(loewdin(a), RankDeficient);
}

TEST_CASE("log_unitary of identity is zero") {
    AntiHermLog lg = log_unitary(CMatrix::Identity(3, 3));
    CHECK(max_abs(lg.l) < 1e-12);
}

TEST_CASE("log_unitary analytic phases") {
    CMatrix u(2, 2);
    u << cdouble(0, 1), 0, 0, cdouble(0, -1);
    AntiHermLog lg = log_unitary(u);
    CMatrix expect(2, 2);
    expect << cdouble(0, M_PI / 2), 0, 0, cdouble(0, -M_PI / 2);
    CHECK(max_abs(lg.l - expect) < 1e-12);
    CHECK(lg.eigenphases(0) == doctest::Approx(-M_PI / 2));
    CHECK(lg.eigenphases(1) == doctest::Approx(M_PI / 2));
}

TEST_CASE("log_unitary round trip on random unitaries") {
    for (int trial = 0; trial < 8; ++trial) {
        CMatrix l = random_antihermitian(4, M_PI - 0.1);
        CMatrix u = exp_antiherm(l, 1.0);
        AntiHermLog lg = log_unitary(u);
        CHECK(max_abs(exp_antiherm(lg.l, 1.0) - u) <= 1e-10);
        CHECK(max_abs(lg.l + lg.l.adjoint()) < 1e-14);
        for (int j = 0; j < lg.eigenphases.size(); ++j) {
            CHECK(lg.eigenphases(j) <= M_PI);
            CHECK(lg.eigenphases(j) > -M_PI);
        }
    }
}

TEST_CASE("log_unitary conjugate-pair spectrum") {
    // eigenphases +-phi share the cosine; the joint diagonalization must
    // still separate them
    HermEig basis = herm_eig(random_hermitian(4));
    CMatrix q = basis.eigenvectors;
    RVector phases(4);
    phases << -2.2, -0.4, 0.4, 2.2;
    CMatrix u = CMatrix::Zero(4, 4);
    for (int j = 0; j < 4; ++j)
        u += std::polar(1.0, phases(j)) * (q.col(j) * q.col(j).adjoint());
    AntiHermLog lg = log_unitary(u);
    for (int j = 0; j < 4; ++j) CHECK(lg.eigenphases(j) == doctest::Approx(phases(j)));
    CHECK(max_abs(exp_antiherm(lg.l, 1.0) - u) < 1e-10);
}

TEST_CASE("log_unitary branch cut error") {
    CMatrix u(2, 2);
    u << -1, 0, 0, 1;
    CHECK_THROWS_AS(log_unitary(u), BranchCut);
}

TEST_CASE("exp_antiherm at s=0") {
    CMatrix l = random_antihermitian(3, 2.0);
    CHECK(max_abs(exp_antiherm(l, 0.0) - CMatrix::Identity(3, 3)) < 1e-13);
}

TEST_CASE("exp_antiherm scalar phase") {
    CMatrix l(1, 1);
    l << cdouble(0, M_PI);
    CMatrix u = exp_antiherm(l, 1.0);
    CHECK(u(0, 0).real() == doctest::Approx(-1.0));
    CHECK(std::abs(u(0, 0).imag()) < 1e-14);
}

TEST_CASE("exp_antiherm semigroup in s") {
    CMatrix l = random_antihermitian(3, 2.5);
    CMatrix lhs = exp_antiherm(l, 0.3) * exp_antiherm(l, 0.7);
    CHECK(max_abs(lhs - exp_antiherm(l, 1.0)) < 1e-12);
}

TEST_CASE("exp_antiherm unitary for all s") {
    CMatrix l = random_antihermitian(4, 3.0);
    for (double s : {0.0, 0.25, 0.5, 0.75, 1.0})
        CHECK(unitarity_residual(exp_antiherm(l, s)) < 1e-12);
}

TEST_CASE("exp_antiherm rejects non-antihermitian input") {
    CMatrix h = random_hermitian(3);
    CHECK_THROWS_AS(exp_antiherm(h, 1.0), InvalidParams);
}
