#include "bloch/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace bloch {

namespace {

// Rotate each column so its largest-modulus entry is real positive. Ties go
// to the lowest index, which keeps the output deterministic.
void fix_column_phases(CMatrix& q) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        Eigen::Index imax = 0;
        double best = 0.0;
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            double m = std::abs(q(i, j));
            if (m > best) {
                best = m;
                imax = i;
            }
        }
        cdouble z = q(imax, j);
        if (best > 0.0) q.col(j) *= std::conj(z) / best;
    }
}

void check_finite(const CMatrix& m, const char* who) {
    if (!m.allFinite()) throw InvalidParams(std::string(who) + ": non-finite entries");
}

} // namespace

HermEig herm_eig(const CMatrix& a, const Tolerances& tol) {
    check_finite(a, "herm_eig");
    if (a.rows() != a.cols()) throw NonHermitian("herm_eig: matrix not square");
    double scale = a.norm();
    if ((a - a.adjoint()).norm() > tol.hermitian_rel * std::max(scale, 1e-300))
        throw NonHermitian("herm_eig: symmetry check failed");

    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (a + a.adjoint()));
    if (solver.info() != Eigen::Success)
        throw NoConvergence("herm_eig: eigensolver did not converge");

    HermEig out{solver.eigenvalues(), solver.eigenvectors()};
    fix_column_phases(out.eigenvectors);
    return out;
}

CMatrix loewdin(const CMatrix& a, const Tolerances& tol, double* sigma_min) {
    check_finite(a, "loewdin");
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smin = svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0;
    if (sigma_min) *sigma_min = smin;
    if (smin < tol.rank_sigma)
        throw RankDeficient(smin, "loewdin: rank-deficient input (sigma_min = " +
                                      std::to_string(smin) + "); step too coarse");
    return svd.matrixU() * svd.matrixV().adjoint();
}

UnitaryEig eig_unitary(const CMatrix& u, const Tolerances& tol) {
    check_finite(u, "eig_unitary");
    if (u.rows() != u.cols()) throw InvalidParams("eig_unitary: matrix not square");
    if (unitarity_residual(u) > tol.unitarity)
        throw InvalidParams("eig_unitary: input not unitary");

    const Eigen::Index n = u.rows();
    CMatrix a = 0.5 * (u + u.adjoint());
    CMatrix b = cdouble(0.0, -0.5) * (u - u.adjoint());

    HermEig ea = herm_eig(a, tol);
    CMatrix q = ea.eigenvectors;

    // A = cos part; conjugate eigenphase pairs are degenerate in A. Refine
    // each near-degenerate cluster with the sin part B, which separates them.
    const double cluster_tol = 1e-4;
    Eigen::Index lo = 0;
    while (lo < n) {
        Eigen::Index hi = lo + 1;
        while (hi < n && ea.eigenvalues(hi) - ea.eigenvalues(hi - 1) < cluster_tol) ++hi;
        if (hi - lo > 1) {
            CMatrix qc = q.middleCols(lo, hi - lo);
            HermEig eb = herm_eig((qc.adjoint() * b * qc).eval(), tol);
            CMatrix rotated = qc * eb.eigenvectors;
            fix_column_phases(rotated);
            q.middleCols(lo, hi - lo) = rotated;
        }
        lo = hi;
    }

    UnitaryEig out;
    out.vectors = q;
    out.phases.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        cdouble lambda = q.col(j).dot(u * q.col(j)); // Rayleigh quotient
        out.phases(j) = std::arg(lambda);
    }

    // Sort by phase (stable, so degenerate pairs keep their cluster order).
    std::vector<Eigen::Index> perm(n);
    for (Eigen::Index j = 0; j < n; ++j) perm[j] = j;
    std::stable_sort(perm.begin(), perm.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return out.phases(i) < out.phases(j); });
    UnitaryEig sorted;
    sorted.phases.resize(n);
    sorted.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        sorted.phases(j) = out.phases(perm[j]);
        sorted.vectors.col(j) = out.vectors.col(perm[j]);
    }

    CMatrix recon = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        recon += std::polar(1.0, sorted.phases(j)) * (sorted.vectors.col(j) * sorted.vectors.col(j).adjoint());
    if (max_abs(recon - u) > 1e-10)
        throw NoConvergence("eig_unitary: joint diagonalization residual too large");
    return sorted;
}

AntiHermLog log_unitary(const CMatrix& u, const Tolerances& tol) {
    UnitaryEig eig = eig_unitary(u, tol);
    const Eigen::Index n = u.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        double dist = M_PI - std::abs(eig.phases(j));
        if (dist < tol.branch_cut)
            throw BranchCut(eig.phases(j),
                            "log_unitary: eigenphase within tolerance of the branch point pi");
    }
    CMatrix l = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        l += cdouble(0.0, eig.phases(j)) * (eig.vectors.col(j) * eig.vectors.col(j).adjoint());
    l = 0.5 * (l - l.adjoint().eval()); // exact anti-Hermiticity
    return AntiHermLog{l, eig.phases};
}

CMatrix exp_antiherm(const CMatrix& l, double s, const Tolerances& tol) {
    check_finite(l, "exp_antiherm");
    double scale = l.norm();
    if ((l + l.adjoint()).norm() > tol.unitarity * std::max(scale, 1.0))
        throw InvalidParams("exp_antiherm: input not anti-Hermitian");
    // L = iH with H Hermitian
    HermEig eh = herm_eig((cdouble(0.0, -1.0) * l).eval(), tol);
    const Eigen::Index n = l.rows();
    CMatrix out = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        out += std::polar(1.0, s * eh.eigenvalues(j)) * (eh.eigenvectors.col(j) * eh.eigenvectors.col(j).adjoint());
    return out;
}

} // namespace bloch
