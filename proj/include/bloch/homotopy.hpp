#ifndef BLOCH_HOMOTOPY_HPP
#define BLOCH_HOMOTOPY_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "bloch/field.hpp"

namespace bloch {

struct WindingReport {
    int total = 0;
    std::optional<std::vector<int>> per_eigenvalue;
    double max_phase_step = 0.0;
    double residual = 0.0; // |W_real - total| before rounding
};

// Winding number of det V along a 1d loop from wrapped phase increments,
// rounded to the nearest integer.
int winding_det(const UnitaryField& loop, const Tolerances& tol = {});

// Per-eigenvalue windings by tracking the eigenbasis between adjacent k.
WindingReport winding_eigenvalues(const UnitaryField& loop, const Tolerances& tol = {});

// Homotopy exp((1-t) L(k)) from a continuous family of logarithms. Fails
// with EigenvalueWinding whenever any tracked eigenphase winds.
Homotopy contract_log(const UnitaryField& loop, int t_size, const Tolerances& tol = {});

// Pointwise principal logarithms, no tracking and no failure: exists to
// reproduce the discontinuous frames that the plain logarithm gauge
// produces on topologically twisted loops.
Homotopy contract_log_forced(const UnitaryField& loop, int t_size, const Tolerances& tol = {});

// log_unitary with one retry on BranchCut: the branch is rotated by a small
// fixed scalar phase and the result shifted back, so exp of the returned
// logarithm still reproduces the input.
AntiHermLog log_unitary_branch_retry(const CMatrix& u, const Tolerances& tol = {},
                                     bool* retried = nullptr);

struct ReferencePick {
    CVector v;           // unit vector inside the sampled subspace
    double margin = 0.0; // achieved min_k ||sample_k + v||
    int candidate = -1;  // index of the winning candidate
};

// Choose a fixed unit vector whose antipode stays clear of every sample:
// argmax over candidates of min_k ||sample_k + p||. Candidates are the
// subspace basis columns plus seeded random combinations.
ReferencePick pick_reference_vector(const std::vector<CVector>& samples,
                                    const CMatrix& subspace_basis, int candidates, std::uint64_t seed,
                                    const Tolerances& tol = {});

struct ContractionStats {
    std::vector<double> reference_margins;
    double last_phase_total = 0.0; // unwrapped phase range of the last column
    bool branch_retry = false;     // final logarithm needed the shifted branch
};

// Column-interpolation contraction of a loop T^1 -> U(N) to the identity.
// Columns are contracted one by one: parallel transport of the remaining
// columns in homotopy time, coefficient interpolation toward a safe
// reference vector, an explicit phase unwinding for the last column, and a
// final logarithm of the residual constant unitary.
Homotopy contract_columns_1d(const UnitaryField& loop, int t_size, std::uint64_t seed,
                             const Tolerances& tol = {}, ContractionStats* stats = nullptr);

// Same scheme over T^2; both boundary windings of det V must vanish and the
// last-column phase is unwrapped over the surface with a plaquette
// consistency check.
Homotopy contract_columns_2d(const UnitaryField& surface, int t_size, std::uint64_t seed,
                             const Tolerances& tol = {}, ContractionStats* stats = nullptr);

} // namespace bloch

#endif
