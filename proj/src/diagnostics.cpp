#include "bloch/diagnostics.hpp"

#include <cmath>
#include <sstream>

namespace bloch {

namespace {

const double kPi = 3.14159265358979323846;

} // namespace

RegularityField regularity(const GaugeFrame& frame, const OverlapProvider& provider) {
    if (!(frame.grid == provider.grid()))
        throw InvalidParams("regularity: frame and provider grids differ");
    const KGrid& grid = frame.grid;
    RegularityField out;
    out.grid = grid;
    out.values.assign(grid.npoints(), 0.0);
    double sum = 0.0;
    for (long idx = 0; idx < grid.npoints(); ++idx) {
        Coords c = grid.coords(idx);
        double v = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            Coords cn = KGrid::step(c, a, 1);
            CMatrix diff = provider.overlap(c, cn) * frame.at(cn) - frame.coeffs[idx];
            v += diff.norm() / grid.spacing(a);
        }
        out.values[idx] = v;
        out.max = std::max(out.max, v);
        sum += v;
    }
    out.mean = sum / double(grid.npoints());
    return out;
}

int chern_plaquette(const OverlapProvider& provider, const Tolerances& tol) {
    const KGrid& grid = provider.grid();
    if (grid.dim != 2) throw InvalidParams("chern_plaquette expects a 2d provider");
    // Orientation matches the winding of the transported-frame obstruction:
    // the bra-ket order of overlap() makes the p1->p4->p3->p2 traversal the
    // counterclockwise Wilson loop.
    double total = 0.0;
    for (int i = 0; i < grid.sizes[0]; ++i)
        for (int j = 0; j < grid.sizes[1]; ++j) {
            Coords p1{i, j, 0}, p2{i + 1, j, 0}, p3{i + 1, j + 1, 0}, p4{i, j + 1, 0};
            CMatrix w = provider.overlap(p1, p4) * provider.overlap(p4, p3) *
                        provider.overlap(p3, p2) * provider.overlap(p2, p1);
            total += std::arg(w.determinant());
        }
    double c_real = total / (2.0 * kPi);
    int c = int(std::lround(c_real));
    if (std::abs(c_real - c) > tol.winding_residual)
        throw NonIntegerResidual(c_real - c, "chern_plaquette: non-integer Chern sum; grid too "
                                             "coarse or gap nearly closed");
    return c;
}

MVGeometry MVGeometry::cubic(int dim) {
    MVGeometry g;
    g.lattice = Eigen::MatrixXd::Identity(dim, dim);
    for (int a = 0; a < dim; ++a) {
        Coords plus{0, 0, 0}, minus{0, 0, 0};
        plus[a] = 1;
        minus[a] = -1;
        g.shell_offsets.push_back(plus);
        g.shell_offsets.push_back(minus);
    }
    return g;
}

MVGeometry MVGeometry::hexagonal() {
    MVGeometry g;
    g.lattice.resize(2, 2);
    double s3 = std::sqrt(3.0);
    g.lattice << 0.5, 0.5, s3 / 2.0, -s3 / 2.0;
    g.shell_offsets = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {1, -1, 0}, {-1, 1, 0}};
    return g;
}

SpreadReport spread(const GaugeFrame& frame, const OverlapProvider& provider,
                    const MVGeometry& geometry, const Tolerances&) {
    if (!(frame.grid == provider.grid()))
        throw InvalidParams("spread: frame and provider grids differ");
    const KGrid& grid = frame.grid;
    const int d = grid.dim;
    const int n = frame.n;
    if (geometry.lattice.rows() != d)
        throw InvalidParams("spread: geometry dimension does not match the grid");

    // Cartesian b-vectors of the grid shells: b = B * (offset_a / size_a)
    // with B = 2 pi A^{-T}.
    Eigen::MatrixXd recip = 2.0 * kPi * geometry.lattice.inverse().transpose();
    const int nb = int(geometry.shell_offsets.size());
    std::vector<Eigen::VectorXd> bvecs(nb);
    for (int ib = 0; ib < nb; ++ib) {
        Eigen::VectorXd frac(d);
        for (int a = 0; a < d; ++a)
            frac(a) = double(geometry.shell_offsets[ib][a]) / grid.sizes[a];
        bvecs[ib] = recip * frac;
    }

    // Group by |b| and solve the shell weights from completeness.
    std::vector<double> lengths;
    std::vector<int> shell_of(nb);
    for (int ib = 0; ib < nb; ++ib) {
        double len = bvecs[ib].norm();
        int s = -1;
        for (size_t j = 0; j < lengths.size(); ++j)
            if (std::abs(lengths[j] - len) < 1e-8 * std::max(1.0, len)) s = int(j);
        if (s < 0) {
            lengths.push_back(len);
            s = int(lengths.size()) - 1;
        }
        shell_of[ib] = s;
    }
    const int ns = int(lengths.size());
    const int neq = d * (d + 1) / 2;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(neq, ns);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(neq);
    {
        int row = 0;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j, ++row) {
                for (int ib = 0; ib < nb; ++ib)
                    a(row, shell_of[ib]) += bvecs[ib](i) * bvecs[ib](j);
                rhs(row) = (i == j) ? 1.0 : 0.0;
            }
    }
    Eigen::VectorXd w = a.colPivHouseholderQr().solve(rhs);
    if ((a * w - rhs).norm() > 1e-8)
        throw IncompleteShells("spread: shell weights cannot satisfy the completeness condition");

    // Marzari-Vanderbilt discretized centers and spreads from gauge-rotated
    // overlaps Mtilde = U(k)^* M(k,k+b) U(k+b).
    const long nk = grid.npoints();
    SpreadReport rep;
    rep.per_band_centers.assign(n, Eigen::VectorXd::Zero(d));
    rep.per_band_spreads.assign(n, 0.0);
    std::vector<double> quad(n, 0.0); // (1/Nk) sum w_b [(1-|M|^2) + (Im ln M)^2]
    for (long idx = 0; idx < nk; ++idx) {
        Coords c = grid.coords(idx);
        for (int ib = 0; ib < nb; ++ib) {
            Coords cn = c;
            for (int axis = 0; axis < d; ++axis) cn[axis] += geometry.shell_offsets[ib][axis];
            CMatrix mt = frame.coeffs[idx].adjoint() * provider.overlap(c, cn) * frame.at(cn);
            double wb = w(shell_of[ib]);
            for (int band = 0; band < n; ++band) {
                cdouble mm = mt(band, band);
                if (std::abs(mm) < 0.1) rep.ill_conditioned_logs++;
                double im_ln = std::arg(mm);
                rep.per_band_centers[band] -= (wb / double(nk)) * im_ln * bvecs[ib];
                quad[band] +=
                    (wb / double(nk)) * ((1.0 - std::norm(mm)) + im_ln * im_ln);
            }
        }
    }
    for (int band = 0; band < n; ++band) {
        rep.per_band_spreads[band] = quad[band] - rep.per_band_centers[band].squaredNorm();
        rep.omega_total += rep.per_band_spreads[band];
    }
    return rep;
}

std::vector<ConvergenceRow> convergence_study(const BlochModel& model, FrameMethod method,
                                              const std::vector<int>& sizes, std::uint64_t seed,
                                              const MVGeometry& geometry, const Tolerances& tol) {
    if (model.dim != 2) throw InvalidParams("convergence_study expects a 2d model");
    std::vector<ConvergenceRow> rows;
    for (int size : sizes) {
        ConvergenceRow row;
        row.size = size;
        try {
            ModelOverlapProvider provider(model, KGrid::square(size, size), tol);
            FrameResult fr = frame_2d(provider, method, seed, tol);
            RegularityField reg = regularity(fr.frame, provider);
            SpreadReport sp = spread(fr.frame, provider, geometry, tol);
            row.max_regularity = reg.max;
            row.mean_regularity = reg.mean;
            row.omega = sp.omega_total;
            row.status = "ok";
        } catch (const Error& e) {
            row.status = e.code();
        }
        rows.push_back(row);
    }
    return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream os;
    os << "size,max_regularity,mean_regularity,omega,status\n";
    for (const auto& r : rows)
        os << r.size << "," << r.max_regularity << "," << r.mean_regularity << "," << r.omega
           << "," << r.status << "\n";
    return os.str();
}

} // namespace bloch
