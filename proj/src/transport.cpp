#include "bloch/transport.hpp"

#include <cmath>
#include <limits>

namespace bloch {

ModelOverlapProvider::ModelOverlapProvider(const BlochModel& model, const KGrid& grid,
                                           const Tolerances& tol)
    : grid_(grid), n_occ_(model.n_occ), min_gap_(std::numeric_limits<double>::infinity()) {
    if (grid.dim != model.dim)
        throw InvalidParams("ModelOverlapProvider: grid and model dimensions differ");
    occ_.resize(grid.npoints());
    for (long idx = 0; idx < grid.npoints(); ++idx) {
        SpectralSnapshot s = spectral_snapshot(model, grid.point(grid.coords(idx)), tol);
        occ_[idx] = s.occ_vectors;
        min_gap_ = std::min(min_gap_, s.gap);
    }
}

CMatrix ModelOverlapProvider::overlap(const Coords& from, const Coords& to) const {
    return occ_[grid_.index(from)].adjoint() * occ_[grid_.index(to)];
}

RestrictedProvider::RestrictedProvider(const OverlapProvider& base, int free_axes)
    : base_(base), free_axes_(free_axes) {
    grid_ = base.grid();
    grid_.dim = free_axes;
    for (int a = free_axes; a < 3; ++a) grid_.sizes[a] = 1;
}

CMatrix RestrictedProvider::overlap(const Coords& from, const Coords& to) const {
    Coords f = from, t = to;
    for (int a = free_axes_; a < 3; ++a) f[a] = t[a] = 0;
    return base_.overlap(f, t);
}

CMatrix transport_step(const OverlapProvider& provider, const CMatrix& u_from, const Coords& from,
                       const Coords& to, const Tolerances& tol, TransportStats* stats) {
    CMatrix m = provider.overlap(to, from);
    double sigma = 0.0;
    CMatrix out = loewdin(m * u_from, tol, &sigma);
    if (stats) {
        stats->min_sigma = std::min(stats->min_sigma, sigma);
        if (sigma < tol.rank_warn_sigma) stats->coarse_warning = true;
    }
    return out;
}

std::vector<CMatrix> transport_line(const OverlapProvider& provider, const CMatrix& u_start,
                                    const std::vector<Coords>& line, const Tolerances& tol,
                                    TransportStats* stats) {
    std::vector<CMatrix> out;
    out.reserve(line.size());
    out.push_back(u_start);
    for (size_t i = 1; i < line.size(); ++i)
        out.push_back(transport_step(provider, out.back(), line[i - 1], line[i], tol, stats));
    return out;
}

CMatrix closure_obstruction(const std::vector<CMatrix>& u_seq, const Tolerances& tol) {
    if (u_seq.size() < 2) throw InvalidParams("closure_obstruction: need a transported line");
    return loewdin(u_seq.front().adjoint() * u_seq.back(), tol);
}

std::vector<Coords> axis_cycle(const KGrid& grid, const Coords& base, int axis) {
    std::vector<Coords> line;
    line.reserve(grid.sizes[axis] + 1);
    for (int i = 0; i <= grid.sizes[axis]; ++i) line.push_back(KGrid::step(base, axis, i));
    return line;
}

} // namespace bloch
