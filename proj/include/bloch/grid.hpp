#ifndef BLOCH_GRID_HPP
#define BLOCH_GRID_HPP

#include <array>
#include <cassert>
#include <cstdlib>

namespace bloch {

// Integer grid coordinates. Entries may leave [0, size) to express points
// reached through the boundary identification k + e_j ~ k (the closure
// convention); index() wraps them back.
using Coords = std::array<int, 3>;

// Uniform discretization of the torus T^d, half-open per axis: k_i = i/size.
struct KGrid {
    int dim = 1;
    std::array<int, 3> sizes{1, 1, 1};

    static KGrid line(int n) { return KGrid{1, {n, 1, 1}}; }
    static KGrid square(int n1, int n2) { return KGrid{2, {n1, n2, 1}}; }
    static KGrid cube(int n1, int n2, int n3) { return KGrid{3, {n1, n2, n3}}; }

    long npoints() const { return (long)sizes[0] * sizes[1] * sizes[2]; }

    double spacing(int axis) const { return 1.0 / sizes[axis]; }

    static int wrap(int c, int size) {
        int r = c % size;
        return r < 0 ? r + size : r;
    }

    // Row-major linear index, last axis fastest; coordinates wrap.
    long index(const Coords& c) const {
        long idx = wrap(c[0], sizes[0]);
        idx = idx * sizes[1] + wrap(c[1], sizes[1]);
        idx = idx * sizes[2] + wrap(c[2], sizes[2]);
        return idx;
    }

    Coords coords(long idx) const {
        Coords c;
        c[2] = int(idx % sizes[2]);
        idx /= sizes[2];
        c[1] = int(idx % sizes[1]);
        c[0] = int(idx / sizes[1]);
        return c;
    }

    // k in [0,1)^d for in-range coordinates; unwrapped coordinates map past 1
    // (useful when evaluating a periodic Hamiltonian at a closure point).
    std::array<double, 3> point(const Coords& c) const {
        return {double(c[0]) / sizes[0], double(c[1]) / sizes[1], double(c[2]) / sizes[2]};
    }

    static Coords step(const Coords& c, int axis, int delta) {
        Coords r = c;
        r[axis] += delta;
        return r;
    }

    bool operator==(const KGrid& o) const { return dim == o.dim && sizes == o.sizes; }
};

} // namespace bloch

#endif
