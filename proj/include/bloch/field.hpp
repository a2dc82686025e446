#ifndef BLOCH_FIELD_HPP
#define BLOCH_FIELD_HPP

#include <vector>

#include "bloch/grid.hpp"
#include "bloch/matcore.hpp"

namespace bloch {

// N x N unitaries over a KGrid: loops (d=1), surfaces (d=2), obstructions.
// Storage is half-open per axis; the wrap neighbor of the last index is
// index 0.
struct UnitaryField {
    KGrid grid;
    int n = 0;
    std::vector<CMatrix> values;

    UnitaryField() = default;
    UnitaryField(const KGrid& g, int n_) : grid(g), n(n_), values(g.npoints()) {}

    const CMatrix& at(const Coords& c) const { return values[grid.index(c)]; }
    CMatrix& at(const Coords& c) { return values[grid.index(c)]; }

    double max_unitarity_residual() const {
        double r = 0.0;
        for (const auto& v : values) r = std::max(r, unitarity_residual(v));
        return r;
    }

    // Largest Frobenius step between axis neighbors, wrap included.
    double max_grid_step() const {
        double r = 0.0;
        for (long idx = 0; idx < grid.npoints(); ++idx) {
            Coords c = grid.coords(idx);
            for (int a = 0; a < grid.dim; ++a)
                r = std::max(r, (at(KGrid::step(c, a, 1)) - values[idx]).norm());
        }
        return r;
    }
};

// Frame coefficients: at each grid point an N x N unitary expressing the
// frame vectors as columns in the local occupied eigenbasis.
struct GaugeFrame {
    KGrid grid;
    int n = 0;
    std::vector<CMatrix> coeffs;

    GaugeFrame() = default;
    GaugeFrame(const KGrid& g, int n_) : grid(g), n(n_), coeffs(g.npoints()) {}

    const CMatrix& at(const Coords& c) const { return coeffs[grid.index(c)]; }
    CMatrix& at(const Coords& c) { return coeffs[grid.index(c)]; }

    double max_unitarity_residual() const {
        double r = 0.0;
        for (const auto& v : coeffs) r = std::max(r, unitarity_residual(v));
        return r;
    }
};

// A field over k-grid x t-grid with t_0 = 0 and t_{T-1} = 1: slice t=0 is
// the input loop/surface, slice t=1 the identity.
struct Homotopy {
    KGrid kgrid;
    int n = 0;
    int t_size = 0;
    std::vector<CMatrix> values; // k-major, t fastest
    double max_step = 0.0;       // largest Frobenius step between grid neighbors

    Homotopy() = default;
    Homotopy(const KGrid& g, int n_, int t_size_)
        : kgrid(g), n(n_), t_size(t_size_), values(g.npoints() * t_size_) {}

    double t_value(int s) const { return double(s) / (t_size - 1); }

    const CMatrix& at(long k_linear, int s) const { return values[k_linear * t_size + s]; }
    CMatrix& at(long k_linear, int s) { return values[k_linear * t_size + s]; }

    UnitaryField slice(int s) const {
        UnitaryField f(kgrid, n);
        for (long k = 0; k < kgrid.npoints(); ++k) f.values[k] = at(k, s);
        return f;
    }

    void compute_max_step() {
        double r = 0.0;
        for (long k = 0; k < kgrid.npoints(); ++k) {
            Coords c = kgrid.coords(k);
            for (int s = 0; s < t_size; ++s) {
                if (s + 1 < t_size) r = std::max(r, (at(k, s + 1) - at(k, s)).norm());
                for (int a = 0; a < kgrid.dim; ++a) {
                    long kn = kgrid.index(KGrid::step(c, a, 1));
                    r = std::max(r, (at(kn, s) - at(k, s)).norm());
                }
            }
        }
        max_step = r;
    }
};

struct RegularityField {
    KGrid grid;
    std::vector<double> values;
    double max = 0.0;
    double mean = 0.0;
};

} // namespace bloch

#endif
