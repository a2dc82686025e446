#ifndef BLOCH_TRANSPORT_HPP
#define BLOCH_TRANSPORT_HPP

#include <memory>
#include <vector>

#include "bloch/field.hpp"
#include "bloch/models.hpp"

namespace bloch {

// Source of overlap matrices M(k,k')_{mn} = <occ vector m at k | occ vector
// n at k'> restricted to the occupied window. Everything downstream is
// driven through this interface, so tight-binding models and ingested
// overlap files share one transport engine.
class OverlapProvider {
public:
    virtual ~OverlapProvider() = default;
    virtual int n_occ() const = 0;
    virtual const KGrid& grid() const = 0;
    // to - from must be a supported offset; coordinates wrap.
    virtual CMatrix overlap(const Coords& from, const Coords& to) const = 0;
};

// Overlaps computed from the phase-fixed eigenbases of an analytic model.
// Snapshots are precomputed once per grid point, so overlaps at wrapped
// coordinates are exactly periodic. Any offset is supported.
class ModelOverlapProvider : public OverlapProvider {
public:
    ModelOverlapProvider(const BlochModel& model, const KGrid& grid, const Tolerances& tol = {});

    int n_occ() const override { return n_occ_; }
    const KGrid& grid() const override { return grid_; }
    CMatrix overlap(const Coords& from, const Coords& to) const override;

    const CMatrix& occ_basis(long linear_index) const { return occ_[linear_index]; }
    double min_gap() const { return min_gap_; }

private:
    KGrid grid_;
    int n_occ_;
    std::vector<CMatrix> occ_;
    double min_gap_;
};

// Constant projector: every overlap is the identity.
class ConstantOverlapProvider : public OverlapProvider {
public:
    ConstantOverlapProvider(const KGrid& grid, int n) : grid_(grid), n_(n) {}
    int n_occ() const override { return n_; }
    const KGrid& grid() const override { return grid_; }
    CMatrix overlap(const Coords&, const Coords&) const override {
        return CMatrix::Identity(n_, n_);
    }

private:
    KGrid grid_;
    int n_;
};

// Restriction of a higher-dimensional provider to one line (frame_2d edge)
// or one face (frame_3d base); the free axes come first.
class RestrictedProvider : public OverlapProvider {
public:
    RestrictedProvider(const OverlapProvider& base, int free_axes);
    int n_occ() const override { return base_.n_occ(); }
    const KGrid& grid() const override { return grid_; }
    CMatrix overlap(const Coords& from, const Coords& to) const override;

private:
    const OverlapProvider& base_;
    KGrid grid_;
    int free_axes_;
};

struct TransportStats {
    double min_sigma = 1.0;   // smallest singular value seen in any step
    bool coarse_warning = false;
};

// One step of discrete parallel transport in gauge space: project onto the
// target fiber (left-multiply by the overlap) and restore exact
// orthonormality with a Loewdin factor.
CMatrix transport_step(const OverlapProvider& provider, const CMatrix& u_from, const Coords& from,
                       const Coords& to, const Tolerances& tol = {}, TransportStats* stats = nullptr);

// Transport along an ordered sequence of adjacent grid points. Element 0 of
// the result is u_start.
std::vector<CMatrix> transport_line(const OverlapProvider& provider, const CMatrix& u_start,
                                    const std::vector<Coords>& line, const Tolerances& tol = {},
                                    TransportStats* stats = nullptr);

// Obstruction matrix of a transported line spanning a full period:
// V_obs = U_start^* U_end, Loewdin-projected to exact unitarity.
CMatrix closure_obstruction(const std::vector<CMatrix>& u_seq, const Tolerances& tol = {});

// Convenience: the coords of a full cycle along one axis starting at base,
// closing through the boundary identification (length size+1).
std::vector<Coords> axis_cycle(const KGrid& grid, const Coords& base, int axis);

} // namespace bloch

#endif
