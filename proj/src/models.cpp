#include "bloch/models.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace bloch {

namespace {

const double kPi = 3.14159265358979323846;

CMatrix pauli(int i) {
    CMatrix s(2, 2);
    switch (i) {
        case 0: s << 1, 0, 0, 1; break;
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, cdouble(0, -1), cdouble(0, 1), 0; break;
        default: s << 1, 0, 0, -1; break;
    }
    return s;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

} // namespace

BlochModel kane_mele(const KaneMeleParams& p) {
    if (!(p.lambda_r < 2.0 * std::sqrt(3.0)))
        throw InvalidParams("kane_mele: lambda_R must be below 2*sqrt(3)");
    if (!(p.t > 0.0) || !(p.lambda_so > 0.0))
        throw InvalidParams("kane_mele: t and lambda_SO must be positive");

    // Dirac matrices in sublattice (sigma) x spin (s) order.
    CMatrix s0 = pauli(0), sx = pauli(1), sy = pauli(2), sz = pauli(3);
    CMatrix g1 = kron(sx, s0); // even under time reversal
    CMatrix g2 = kron(sz, s0);
    CMatrix g3 = kron(sy, sx);
    CMatrix g4 = kron(sy, sy);
    CMatrix g5 = kron(sy, sz);
    auto comm = [](const CMatrix& a, const CMatrix& b) {
        return (cdouble(0, -0.5) * (a * b - b * a)).eval(); // [a,b]/2i, odd under TR
    };
    CMatrix g12 = comm(g1, g2), g15 = comm(g1, g5), g23 = comm(g2, g3), g24 = comm(g2, g4);

    const double sqrt3 = std::sqrt(3.0);
    const double t = p.t, lso = p.lambda_so, lnu = p.lambda_nu, lr = p.lambda_r;

    BlochModel m;
    m.dim = 2;
    m.n_bands = 4;
    m.n_occ = 2;
    m.name = "kane-mele";
    // Hexagonal convention mapped to the unit square: x = kx a/2 and
    // y = sqrt(3) ky a/2 become x = pi (k1 + k2), y = pi (k1 - k2), which is
    // exactly periodic under k_i -> k_i + 1.
    m.hamiltonian = [=](const std::array<double, 3>& k) -> CMatrix {
        double x = kPi * (k[0] + k[1]);
        double y = kPi * (k[0] - k[1]);
        double d1 = t * (1.0 + 2.0 * std::cos(x) * std::cos(y));
        double d2 = lnu;
        double d3 = lr * (1.0 - std::cos(x) * std::cos(y));
        double d4 = -sqrt3 * lr * std::sin(x) * std::sin(y);
        double d12 = -2.0 * t * std::cos(x) * std::sin(y);
        double d15 = lso * (2.0 * std::sin(2.0 * x) - 4.0 * std::sin(x) * std::cos(y));
        double d23 = -lr * std::cos(x) * std::sin(y);
        double d24 = sqrt3 * lr * std::sin(x) * std::cos(y);
        return d1 * g1 + d2 * g2 + d3 * g3 + d4 * g4 + d12 * g12 + d15 * g15 + d23 * g23 +
               d24 * g24;
    };
    return m;
}

BlochModel haldane_chern() {
    const double t1 = 1.0, t2 = 0.2, phi = -kPi / 2.0, mass = 0.2;

    BlochModel m;
    m.dim = 2;
    m.n_bands = 2;
    m.n_occ = 1;
    m.name = "haldane";
    // Second-neighbor phases along a1, a2-a1, -a2; the flux pattern opens a
    // topological gap since |mass| < 3 sqrt(3) t2 sin(phi).
    m.hamiltonian = [=](const std::array<double, 3>& k) -> CMatrix {
        double t1a = 2.0 * kPi * k[0];
        double t2a = 2.0 * kPi * (k[1] - k[0]);
        double t3a = -2.0 * kPi * k[1];
        cdouble off = t1 * (1.0 + std::polar(1.0, -2.0 * kPi * k[0]) +
                            std::polar(1.0, -2.0 * kPi * k[1]));
        double haa = mass + 2.0 * t2 * (std::cos(t1a + phi) + std::cos(t2a + phi) +
                                        std::cos(t3a + phi));
        double hbb = -mass + 2.0 * t2 * (std::cos(t1a - phi) + std::cos(t2a - phi) +
                                         std::cos(t3a - phi));
        CMatrix h(2, 2);
        h << haa, off, std::conj(off), hbb;
        return h;
    };
    return m;
}

BlochModel berry_cone(double polar) {
    BlochModel m;
    m.dim = 1;
    m.n_bands = 2;
    m.n_occ = 1;
    m.name = "berry-cone";
    m.hamiltonian = [=](const std::array<double, 3>& k) -> CMatrix {
        double phi = 2.0 * kPi * k[0];
        double nx = std::sin(polar) * std::cos(phi);
        double ny = std::sin(polar) * std::sin(phi);
        double nz = std::cos(polar);
        CMatrix h(2, 2);
        h << -nz, cdouble(-nx, ny), cdouble(-nx, -ny), nz;
        return h;
    };
    return m;
}

BlochModel cubic_insulator(double mass) {
    if (std::abs(mass) <= 3.0)
        throw InvalidParams("cubic_insulator: |mass| must exceed 3 for an open gap");
    BlochModel m;
    m.dim = 3;
    m.n_bands = 2;
    m.n_occ = 1;
    m.name = "cubic";
    m.hamiltonian = [=](const std::array<double, 3>& k) -> CMatrix {
        double dx = std::sin(2.0 * kPi * k[0]);
        double dy = std::sin(2.0 * kPi * k[1]);
        double dz = mass + std::cos(2.0 * kPi * k[0]) + std::cos(2.0 * kPi * k[1]) +
                    std::cos(2.0 * kPi * k[2]);
        CMatrix h(2, 2);
        h << dz, cdouble(dx, -dy), cdouble(dx, dy), -dz;
        return h;
    };
    return m;
}

BlochModel broadcast_model(const BlochModel& base, int dim) {
    if (dim < base.dim) throw InvalidParams("broadcast_model: target dim too small");
    BlochModel m = base;
    m.dim = dim;
    m.name = base.name + "-broadcast";
    auto h = base.hamiltonian;
    int d0 = base.dim;
    m.hamiltonian = [h, d0](const std::array<double, 3>& k) {
        std::array<double, 3> kk{0.0, 0.0, 0.0};
        for (int a = 0; a < d0; ++a) kk[a] = k[a];
        return h(kk);
    };
    return m;
}

UnitaryField toy_diag_loop(const std::vector<int>& winding, int n_points) {
    int n = int(winding.size());
    UnitaryField f(KGrid::line(n_points), n);
    for (int i = 0; i < n_points; ++i) {
        double k = double(i) / n_points;
        CMatrix v = CMatrix::Zero(n, n);
        for (int j = 0; j < n; ++j) v(j, j) = std::polar(1.0, 2.0 * kPi * winding[j] * k);
        f.values[i] = v;
    }
    return f;
}

SpectralSnapshot spectral_snapshot(const BlochModel& model, const std::array<double, 3>& k,
                                   const Tolerances& tol) {
    HermEig eig = herm_eig(model.hamiltonian(k), tol);
    int n = model.n_occ;
    SpectralSnapshot s;
    s.k = k;
    s.eigenvalues = eig.eigenvalues;
    s.occ_vectors = eig.eigenvectors.leftCols(n);
    s.gap = eig.eigenvalues(n) - eig.eigenvalues(n - 1);
    if (s.gap < tol.gap_closed)
        throw GapClosed(s.gap, "spectral_snapshot: gap closed at sampled k");
    return s;
}

double check_trs(const BlochModel& model, TrsKind kind, int samples) {
    CMatrix theta;
    if (kind == TrsKind::fermionic) {
        if (model.n_bands % 2 != 0)
            throw InvalidParams("check_trs: fermionic theta needs an even band count");
        theta = kron(CMatrix::Identity(model.n_bands / 2, model.n_bands / 2),
                     (cdouble(0, 1) * pauli(2)).eval());
    } else {
        theta = CMatrix::Identity(model.n_bands, model.n_bands);
    }

    int g = std::max(2, int(std::round(std::pow(double(samples), 1.0 / model.dim))));
    double residual = 0.0;
    auto probe = [&](const std::array<double, 3>& k) {
        std::array<double, 3> mk{-k[0], -k[1], -k[2]};
        CMatrix lhs = model.hamiltonian(mk);
        CMatrix rhs = theta * model.hamiltonian(k).conjugate() * theta.adjoint();
        residual = std::max(residual, max_abs(lhs - rhs));
    };
    std::array<int, 3> reps{1, 1, 1};
    for (int a = 0; a < model.dim; ++a) reps[a] = g;
    for (int i = 0; i < reps[0]; ++i)
        for (int j = 0; j < reps[1]; ++j)
            for (int l = 0; l < reps[2]; ++l) {
                std::array<double, 3> k{double(i) / g, double(j) / g, double(l) / g};
                probe(k);
                // off-grid sample to avoid special points only
                std::array<double, 3> ks{(i + 0.2937) / g, (j + 0.2937) / g, (l + 0.2937) / g};
                for (int a = model.dim; a < 3; ++a) ks[a] = 0.0;
                probe(ks);
            }
    return residual;
}

} // namespace bloch
