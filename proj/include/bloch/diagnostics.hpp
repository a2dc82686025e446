#ifndef BLOCH_DIAGNOSTICS_HPP
#define BLOCH_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "bloch/frames.hpp"

namespace bloch {

// Forward finite-difference estimate of ||grad_k u|| of the physical frame,
// summed over axes: per point, sum_a ||M(k,k+d_a) U(k+d_a) - U(k)||_F / d_a.
RegularityField regularity(const GaugeFrame& frame, const OverlapProvider& provider);

// Chern number from plaquette field strengths of the occupied window:
// c = (1/2pi) sum over plaquettes of arg det(M12 M23 M34 M41).
int chern_plaquette(const OverlapProvider& provider, const Tolerances& tol = {});

// Lattice geometry and the finite-difference shells used by the spread
// functional. Offsets are in grid steps; the weights are solved from the
// completeness condition sum_b w_b b b^T = I.
struct MVGeometry {
    Eigen::MatrixXd lattice;          // d x d, columns are lattice vectors
    std::vector<Coords> shell_offsets; // signed grid offsets (both directions)

    static MVGeometry cubic(int dim);
    // Hexagonal cell of the honeycomb models: includes the third equal-length
    // neighbor +-(e1 - e2) so the completeness condition is solvable.
    static MVGeometry hexagonal();
};

struct SpreadReport {
    double omega_total = 0.0;
    std::vector<Eigen::VectorXd> per_band_centers;
    std::vector<double> per_band_spreads;
    int ill_conditioned_logs = 0; // diagonal overlaps below 0.1 in modulus
};

SpreadReport spread(const GaugeFrame& frame, const OverlapProvider& provider,
                    const MVGeometry& geometry, const Tolerances& tol = {});

struct ConvergenceRow {
    int size = 0;
    double max_regularity = 0.0;
    double mean_regularity = 0.0;
    double omega = 0.0;
    std::string status; // "ok" or the error code of a failed run
};

// Runs frame_2d per grid size and tabulates regularity and spread; failures
// become rows, not aborts.
std::vector<ConvergenceRow> convergence_study(const BlochModel& model, FrameMethod method,
                                              const std::vector<int>& sizes, std::uint64_t seed,
                                              const MVGeometry& geometry,
                                              const Tolerances& tol = {});

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

} // namespace bloch

#endif
