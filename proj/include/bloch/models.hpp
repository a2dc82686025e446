#ifndef BLOCH_MODELS_HPP
#define BLOCH_MODELS_HPP

#include <functional>
#include <string>

#include "bloch/field.hpp"

namespace bloch {

// Analytic tight-binding Bloch Hamiltonian, exactly periodic on [0,1)^d
// (periodic Bloch convention: coefficient vectors repeat across the zone
// boundary, so the boundary identification acts trivially on them).
struct BlochModel {
    int dim = 2;
    int n_bands = 2;
    int n_occ = 1;
    std::string name;
    std::function<CMatrix(const std::array<double, 3>&)> hamiltonian;
};

struct KaneMeleParams {
    double t = 1.0;
    double lambda_so = 1.0;
    double lambda_nu = 0.0;
    double lambda_r = 0.0;
};

struct SpectralSnapshot {
    std::array<double, 3> k{};
    RVector eigenvalues;  // ascending
    CMatrix occ_vectors;  // n_bands x n_occ, orthonormal, phase-fixed
    double gap = 0.0;     // eps_{N+1} - eps_N
};

enum class TrsKind { bosonic, fermionic };

// Four-band Kane-Mele model on T^2 with two occupied bands.
BlochModel kane_mele(const KaneMeleParams& params);

// Two-band Chern insulator on T^2, N=1, Chern number 1 at these defaults.
BlochModel haldane_chern();

// Two-level model on T^1 whose occupied band traces a cone of the given
// polar angle; its Berry phase is -pi*(1 - cos(polar)).
BlochModel berry_cone(double polar);

// Gapped two-band model on T^3 with trivial topology (large sigma_z mass).
BlochModel cubic_insulator(double mass = 4.0);

// Evaluate a lower-dimensional model on the first axes of a larger torus.
BlochModel broadcast_model(const BlochModel& base, int dim);

// V(k) = diag(exp(2 pi i w_j k)) on a 1d grid.
UnitaryField toy_diag_loop(const std::vector<int>& winding, int n_points);

SpectralSnapshot spectral_snapshot(const BlochModel& model, const std::array<double, 3>& k,
                                   const Tolerances& tol = {});

// Max over sampled k of ||H(-k) - theta H(k) theta^{-1}||. theta is plain
// conjugation (bosonic) or kron(I, i s^y) followed by conjugation
// (fermionic, theta^2 = -1; requires an even number of bands with spin as
// the fastest index).
double check_trs(const BlochModel& model, TrsKind kind, int samples = 64);

} // namespace bloch

#endif
