#ifndef BLOCH_MATCORE_HPP
#define BLOCH_MATCORE_HPP

#include <Eigen/Dense>
#include <complex>

#include "bloch/errors.hpp"

namespace bloch {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using cdouble = std::complex<double>;

// Every numeric threshold used by the pipeline lives here so a run can be
// audited and reproduced from its serialized configuration.
struct Tolerances {
    double hermitian_rel = 1e-12;   // relative symmetry check before herm_eig
    double unitarity = 1e-10;       // unitarity checks on inputs and fields
    double rank_sigma = 1e-8;       // loewdin smallest singular value -> error
    double rank_warn_sigma = 0.1;   // transport conditioning -> warning
    double branch_cut = 1e-6;       // distance of an eigenphase from pi
    double gap_closed = 1e-8;       // spectral gap floor
    double collision = 1e-6;        // eigenvalue tracking ambiguity
    double aliased_margin = 0.1;    // phase steps must stay below pi - this
    double winding_residual = 0.1;  // |W - round(W)| ceiling
    double margin_floor = 0.05;     // reference-vector antipode clearance
    int candidate_budget = 64;      // reference-vector candidates
    int t_grid_default = 33;        // homotopy time resolution
};

struct HermEig {
    RVector eigenvalues; // ascending
    CMatrix eigenvectors; // orthonormal columns, phase-fixed
};

struct AntiHermLog {
    CMatrix l;          // anti-Hermitian, exp(l) reproduces the input
    RVector eigenphases; // principal, in (-pi, pi], ascending
};

struct UnitaryEig {
    RVector phases;  // in (-pi, pi], ascending
    CMatrix vectors; // orthonormal columns (joint eigenbasis)
};

// Hermitian eigendecomposition with a deterministic eigenvector gauge: the
// largest-modulus component of each column is made real and positive.
HermEig herm_eig(const CMatrix& a, const Tolerances& tol = {});

// A(A*A)^{-1/2}: the closest matrix with orthonormal columns in Frobenius
// norm, computed from the SVD. sigma_min, when given, receives the smallest
// singular value of A.
CMatrix loewdin(const CMatrix& a, const Tolerances& tol = {}, double* sigma_min = nullptr);

// Orthonormal eigenbasis of a unitary matrix via joint diagonalization of the
// commuting Hermitian pair (U+U*)/2 and (U-U*)/2i.
UnitaryEig eig_unitary(const CMatrix& u, const Tolerances& tol = {});

AntiHermLog log_unitary(const CMatrix& u, const Tolerances& tol = {});

// exp(s L) for anti-Hermitian L.
CMatrix exp_antiherm(const CMatrix& l, double s, const Tolerances& tol = {});

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double unitarity_residual(const CMatrix& u) {
    return max_abs(u.adjoint() * u - CMatrix::Identity(u.cols(), u.cols()));
}

} // namespace bloch

#endif
