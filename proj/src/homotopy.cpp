#include "bloch/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace bloch {

namespace {

const double kPi = 3.14159265358979323846;
const double kTwoPi = 2.0 * kPi;

double wrap_pm_pi(double x) {
    x = std::fmod(x + kPi, kTwoPi);
    if (x < 0) x += kTwoPi;
    return x - kPi;
}

int round_int(double x) { return int(std::lround(x)); }

// Continuous eigenphase data along a closed loop, slot order fixed by the
// ascending phases at k=0.
struct EigTrack {
    std::vector<RVector> phases;  // continued phase per slot, per k
    std::vector<CMatrix> vectors; // slot columns per k
    std::vector<int> windings;
    double max_phase_step = 0.0;
};

// Match eigenvalue slots between adjacent points by eigenvector overlap.
// Exact degeneracies are harmless (any choice within a degenerate cluster
// tracks the same phases); a weak best match between phase-distinct
// eigenvalues means the continuation is genuinely ambiguous.
std::vector<int> assign_slots(const CMatrix& prev_vectors, const UnitaryEig& e,
                              const Tolerances& tol) {
    const int n = int(e.phases.size());
    Eigen::MatrixXd w = (prev_vectors.adjoint() * e.vectors).cwiseAbs();
    std::vector<int> sigma(n, -1);
    std::vector<bool> row_done(n, false), col_done(n, false);
    for (int pass = 0; pass < n; ++pass) {
        int bi = -1, bj = -1;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            if (row_done[i]) continue;
            for (int j = 0; j < n; ++j) {
                if (col_done[j]) continue;
                if (w(i, j) > best) {
                    best = w(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best * best < 0.45) {
            for (int j = 0; j < n; ++j) {
                if (j == bj || col_done[j]) continue;
                if (w(bi, j) >= best - 0.2 &&
                    std::abs(wrap_pm_pi(e.phases(j) - e.phases(bj))) > tol.collision)
                    throw EigenvalueCollision(
                        "eigenvalue tracking ambiguous between phase-distinct branches");
            }
        }
        sigma[bi] = bj;
        row_done[bi] = col_done[bj] = true;
    }
    return sigma;
}

EigTrack track_eigenvalues(const UnitaryField& loop, const Tolerances& tol) {
    if (loop.grid.dim != 1) throw InvalidParams("eigenvalue tracking expects a 1d loop");
    const long K = loop.grid.npoints();
    const int n = loop.n;

    EigTrack tr;
    tr.phases.resize(K);
    tr.vectors.resize(K);

    UnitaryEig e0 = eig_unitary(loop.values[0], tol);
    tr.phases[0] = e0.phases;
    tr.vectors[0] = e0.vectors;

    RVector prev_raw = e0.phases;
    RVector prev_cont = e0.phases;
    CMatrix prev_vec = e0.vectors;

    tr.windings.assign(n, 0);
    for (long i = 1; i <= K; ++i) {
        UnitaryEig e = (i == K) ? e0 : eig_unitary(loop.values[i], tol);
        std::vector<int> sigma = assign_slots(prev_vec, e, tol);
        RVector raw(n), cont(n);
        CMatrix vecs(prev_vec.rows(), n);
        for (int s = 0; s < n; ++s) {
            int j = sigma[s];
            double delta = wrap_pm_pi(e.phases(j) - prev_raw(s));
            if (std::abs(delta) >= kPi - tol.aliased_margin)
                throw AliasedPhase(delta, "eigenphase step too large; loop under-resolved");
            tr.max_phase_step = std::max(tr.max_phase_step, std::abs(delta));
            raw(s) = e.phases(j);
            cont(s) = prev_cont(s) + delta;
            vecs.col(s) = e.vectors.col(j);
        }
        if (i < K) {
            tr.phases[i] = cont;
            tr.vectors[i] = vecs;
        } else {
            for (int s = 0; s < n; ++s) {
                int j = sigma[s];
                if (j != s && std::abs(wrap_pm_pi(e0.phases(j) - e0.phases(s))) > tol.collision)
                    throw EigenvalueCollision(
                        "loop permutes phase-distinct eigenvalues (monodromy); "
                        "per-eigenvalue windings undefined");
                double w_real = (cont(s) - e0.phases(j)) / kTwoPi;
                int w = round_int(w_real);
                if (std::abs(w_real - w) > tol.winding_residual)
                    throw NonIntegerResidual(w_real - w,
                                             "eigenphase increment around the loop not a "
                                             "multiple of 2 pi");
                tr.windings[s] = w;
            }
        }
        prev_raw = raw;
        prev_cont = cont;
        prev_vec = vecs;
    }
    return tr;
}

// Homotopy slices from phase families: value(k, s) = Q diag(e^{i f(t) phi}) Q*.
Homotopy slices_from_phases(const UnitaryField& loop, int t_size,
                            const std::vector<RVector>& phases,
                            const std::vector<CMatrix>& vectors) {
    const long K = loop.grid.npoints();
    const int n = loop.n;
    Homotopy h(loop.grid, n, t_size);
    for (long k = 0; k < K; ++k) {
        for (int s = 0; s < t_size; ++s) {
            double f = 1.0 - h.t_value(s);
            CMatrix v = CMatrix::Zero(n, n);
            for (int j = 0; j < n; ++j)
                v += std::polar(1.0, f * phases[k](j)) *
                     (vectors[k].col(j) * vectors[k].col(j).adjoint());
            h.at(k, s) = v;
        }
    }
    h.compute_max_step();
    return h;
}

std::vector<cdouble> det_sequence(const UnitaryField& loop) {
    std::vector<cdouble> d(loop.values.size());
    for (size_t i = 0; i < loop.values.size(); ++i) d[i] = loop.values[i].determinant();
    return d;
}

// Unwrap unit-modulus samples along a closed 1d cycle. Returns the phases on
// the half-open grid and the integer number of turns.
std::pair<std::vector<double>, int> unwrap_loop(const std::vector<cdouble>& z,
                                                const Tolerances& tol) {
    const long K = long(z.size());
    std::vector<double> phi(K);
    phi[0] = std::arg(z[0]);
    double total = 0.0;
    for (long i = 0; i < K; ++i) {
        double delta = std::arg(z[(i + 1) % K] * std::conj(z[i]));
        if (std::abs(delta) >= kPi - tol.aliased_margin)
            throw AliasedPhase(delta, "phase step too large; cycle under-resolved");
        if (i + 1 < K) phi[i + 1] = phi[i] + delta;
        total += delta;
    }
    double m_real = total / kTwoPi;
    int m = round_int(m_real);
    if (std::abs(m_real - m) > tol.winding_residual)
        throw NonIntegerResidual(m_real - m, "phase increment around cycle not a multiple of 2 pi");
    return {phi, m};
}

// Unwrap over a 2d torus: anchor row, then columns, then verify every
// plaquette (wrap included) is curl-free.
struct SurfaceUnwrap {
    std::vector<double> phi;
    int m1 = 0, m2 = 0;
};

SurfaceUnwrap unwrap_surface(const KGrid& grid, const std::vector<cdouble>& z,
                             const Tolerances& tol) {
    const int n1 = grid.sizes[0], n2 = grid.sizes[1];
    auto zat = [&](int i, int j) { return z[grid.index({i, j, 0})]; };
    auto delta = [&](int i, int j, int axis) {
        cdouble za = zat(i, j);
        cdouble zb = axis == 0 ? zat(i + 1 == n1 ? 0 : i + 1, j) : zat(i, j + 1 == n2 ? 0 : j + 1);
        double d = std::arg(zb * std::conj(za));
        if (std::abs(d) >= kPi - tol.aliased_margin)
            throw AliasedPhase(d, "phase step too large; surface under-resolved");
        return d;
    };

    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            double curl = delta(i, j, 0) + delta((i + 1) % n1, j, 1) - delta(i, (j + 1) % n2, 0) -
                          delta(i, j, 1);
            if (std::abs(curl) > kPi)
                throw PhaseUnwrapInconsistent(
                    "plaquette-wise phase unwrapping disagrees by a full turn");
        }

    SurfaceUnwrap out;
    out.phi.assign(grid.npoints(), 0.0);
    out.phi[grid.index({0, 0, 0})] = std::arg(zat(0, 0));
    for (int i = 0; i + 1 < n1; ++i)
        out.phi[grid.index({i + 1, 0, 0})] = out.phi[grid.index({i, 0, 0})] + delta(i, 0, 0);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j + 1 < n2; ++j)
            out.phi[grid.index({i, j + 1, 0})] = out.phi[grid.index({i, j, 0})] + delta(i, j, 1);

    double total1 = 0.0, total2 = 0.0;
    for (int i = 0; i < n1; ++i) total1 += delta(i, 0, 0);
    for (int j = 0; j < n2; ++j) total2 += delta(0, j, 1);
    out.m1 = round_int(total1 / kTwoPi);
    out.m2 = round_int(total2 / kTwoPi);
    if (std::abs(total1 / kTwoPi - out.m1) > tol.winding_residual ||
        std::abs(total2 / kTwoPi - out.m2) > tol.winding_residual)
        throw NonIntegerResidual(total1 / kTwoPi - out.m1,
                                 "boundary phase increment not a multiple of 2 pi");
    return out;
}

// Shared column-interpolation core. The k-points are the linearized grid of
// `field` (1d loop or 2d surface); `unwrap_last` turns the last-column
// overlaps into a continuous phase field or throws WindingObstruction.
Homotopy contract_columns_impl(
    const UnitaryField& field, int t_size, std::uint64_t seed, const Tolerances& tol,
    ContractionStats* stats,
    const std::function<std::vector<double>(const std::vector<cdouble>&)>& unwrap_last) {
    if (t_size < 2) throw InvalidParams("contract_columns: t-grid needs at least two points");
    const long K = field.grid.npoints();
    const int N = field.n;
    const int T = t_size;
    if (field.max_unitarity_residual() > tol.unitarity)
        throw InvalidParams("contract_columns: input field not unitary");

    Homotopy h(field.grid, N, T);
    for (auto& v : h.values) v = CMatrix::Zero(N, N);

    std::vector<CMatrix> tilde(size_t(K) * T);

    for (int n = 0; n < N; ++n) {
        const int r = N - n;

        // (a) transport the remaining original columns in homotopy time,
        // inside the complement of the columns built so far
        for (long k = 0; k < K; ++k) {
            tilde[size_t(k) * T] = field.values[k].rightCols(r);
            for (int s = 1; s < T; ++s) {
                CMatrix a = tilde[size_t(k) * T + s - 1];
                const CMatrix& done = h.at(k, s);
                for (int j = 0; j < n; ++j)
                    a -= done.col(j) * (done.col(j).adjoint() * a);
                tilde[size_t(k) * T + s] = loewdin(a, tol);
            }
        }

        if (n < N - 1) {
            // (b) coefficient interpolation toward a safe reference vector
            std::vector<CVector> samples(K);
            for (long k = 0; k < K; ++k) samples[k] = tilde[size_t(k) * T + T - 1].col(0);
            ReferencePick pick = pick_reference_vector(samples, tilde[T - 1], tol.candidate_budget,
                                                       seed + std::uint64_t(n), tol);
            if (stats) stats->reference_margins.push_back(pick.margin);
            for (long k = 0; k < K; ++k) {
                CVector c = tilde[size_t(k) * T + T - 1].adjoint() * pick.v;
                c.normalize();
                for (int s = 0; s < T; ++s) {
                    double t = h.t_value(s);
                    CVector w = t * c;
                    w(0) += 1.0 - t;
                    double norm = w.norm();
                    if (norm < 1e-12)
                        throw NoSafeVector(norm, "contraction denominator vanished");
                    w /= norm;
                    h.at(k, s).col(n) = tilde[size_t(k) * T + s] * w;
                }
            }
        } else {
            // (c) last column: explicit phase unwinding; the total increment
            // is the winding of det V and must vanish
            CVector vbar = tilde[T - 1].col(0);
            std::vector<cdouble> z(K);
            for (long k = 0; k < K; ++k) z[k] = vbar.dot(tilde[size_t(k) * T + T - 1].col(0));
            std::vector<double> phi = unwrap_last(z);
            if (stats) {
                double lo = phi[0], hi = phi[0];
                for (double p : phi) {
                    lo = std::min(lo, p);
                    hi = std::max(hi, p);
                }
                stats->last_phase_total = hi - lo;
            }
            for (long k = 0; k < K; ++k)
                for (int s = 0; s < T; ++s)
                    h.at(k, s).col(n) =
                        tilde[size_t(k) * T + s].col(0) * std::polar(1.0, -h.t_value(s) * phi[k]);
        }
    }

    // (d) contract the residual constant unitary along the geodesic
    CMatrix vconst = loewdin(h.at(0, T - 1), tol);
    bool retried = false;
    AntiHermLog lg = log_unitary_branch_retry(vconst, tol, &retried);
    if (stats) stats->branch_retry = retried;
    std::vector<CMatrix> rect(T);
    for (int s = 0; s < T; ++s) rect[s] = exp_antiherm(lg.l, -h.t_value(s), tol);
    for (long k = 0; k < K; ++k)
        for (int s = 0; s < T; ++s) h.at(k, s) *= rect[s];

    h.compute_max_step();
    return h;
}

} // namespace

AntiHermLog log_unitary_branch_retry(const CMatrix& u, const Tolerances& tol, bool* retried) {
    if (retried) *retried = false;
    try {
        return log_unitary(u, tol);
    } catch (const BranchCut&) {
        // Rotate the branch by a small fixed phase and shift the result back;
        // exp of the shifted logarithm still reproduces u exactly.
        const double alpha = 1e-3;
        AntiHermLog lg = log_unitary((std::polar(1.0, -alpha) * u).eval(), tol);
        lg.l += cdouble(0.0, alpha) * CMatrix::Identity(u.rows(), u.cols());
        lg.eigenphases.array() += alpha;
        if (retried) *retried = true;
        return lg;
    }
}

int winding_det(const UnitaryField& loop, const Tolerances& tol) {
    if (loop.grid.dim != 1) throw InvalidParams("winding_det expects a 1d loop");
    std::vector<cdouble> d = det_sequence(loop);
    const long K = long(d.size());
    double total = 0.0;
    for (long i = 0; i < K; ++i) {
        double delta = std::arg(d[(i + 1) % K] * std::conj(d[i]));
        if (std::abs(delta) >= kPi - tol.aliased_margin)
            throw AliasedPhase(delta, "winding_det: det phase step too large; grid too coarse");
        total += delta;
    }
    double w_real = total / kTwoPi;
    int w = round_int(w_real);
    if (std::abs(w_real - w) > tol.winding_residual)
        throw NonIntegerResidual(w_real - w, "winding_det: non-integer winding");
    return w;
}

WindingReport winding_eigenvalues(const UnitaryField& loop, const Tolerances& tol) {
    EigTrack tr = track_eigenvalues(loop, tol);
    WindingReport rep;
    rep.total = winding_det(loop, tol);
    rep.per_eigenvalue = tr.windings;
    rep.max_phase_step = tr.max_phase_step;
    int sum = 0;
    for (int w : tr.windings) sum += w;
    if (sum != rep.total)
        throw EigenvalueCollision(
            "tracked eigenphase increments inconsistent with the determinant winding");
    return rep;
}

Homotopy contract_log(const UnitaryField& loop, int t_size, const Tolerances& tol) {
    EigTrack tr = track_eigenvalues(loop, tol);
    bool twisted = false;
    for (int w : tr.windings) twisted = twisted || (w != 0);
    if (twisted) {
        std::string msg = "contract_log: eigenvalue windings (";
        for (size_t i = 0; i < tr.windings.size(); ++i)
            msg += (i ? "," : "") + std::to_string(tr.windings[i]);
        msg += ") forbid a continuous periodic logarithm";
        throw EigenvalueWinding(tr.windings, msg);
    }
    return slices_from_phases(loop, t_size, tr.phases, tr.vectors);
}

Homotopy contract_log_forced(const UnitaryField& loop, int t_size, const Tolerances& tol) {
    const long K = loop.grid.npoints();
    std::vector<RVector> phases(K);
    std::vector<CMatrix> vectors(K);
    for (long k = 0; k < K; ++k) {
        UnitaryEig e = eig_unitary(loop.values[k], tol);
        phases[k] = e.phases;
        vectors[k] = e.vectors;
    }
    return slices_from_phases(loop, t_size, phases, vectors);
}

ReferencePick pick_reference_vector(const std::vector<CVector>& samples,
                                    const CMatrix& subspace_basis, int candidates,
                                    std::uint64_t seed, const Tolerances& tol) {
    const int r = int(subspace_basis.cols());
    if (r < 2)
        throw NoSafeVector(0.0, "pick_reference_vector: subspace complex dimension below 2, "
                                "the last column needs the phase route");
    if (samples.empty()) throw InvalidParams("pick_reference_vector: no samples");

    auto margin_of = [&](const CVector& p) {
        double m = std::numeric_limits<double>::infinity();
        for (const CVector& w : samples) m = std::min(m, (w + p).norm());
        return m;
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ReferencePick best;
    best.margin = -1.0;
    for (int c = 0; c < candidates; ++c) {
        CVector p;
        if (c < r) {
            p = subspace_basis.col(c);
        } else {
            CVector z(r);
            for (int i = 0; i < r; ++i) z(i) = cdouble(gauss(rng), gauss(rng));
            p = subspace_basis * z;
            double norm = p.norm();
            if (norm < 1e-12) continue;
            p /= norm;
        }
        double m = margin_of(p);
        if (m > best.margin) {
            best.margin = m;
            best.v = p;
            best.candidate = c;
        }
    }
    if (best.margin < tol.margin_floor)
        throw NoSafeVector(best.margin,
                           "pick_reference_vector: no candidate clears the antipode margin; "
                           "loop under-resolved or subspace too small");
    return best;
}

Homotopy contract_columns_1d(const UnitaryField& loop, int t_size, std::uint64_t seed,
                             const Tolerances& tol, ContractionStats* stats) {
    if (loop.grid.dim != 1) throw InvalidParams("contract_columns_1d expects a 1d loop");
    return contract_columns_impl(loop, t_size, seed, tol, stats,
                                 [&](const std::vector<cdouble>& z) {
                                     auto [phi, m] = unwrap_loop(z, tol);
                                     if (m != 0)
                                         throw WindingObstruction(
                                             {m}, "contract_columns_1d: det winding " +
                                                      std::to_string(m) + " forbids contraction");
                                     return phi;
                                 });
}

Homotopy contract_columns_2d(const UnitaryField& surface, int t_size, std::uint64_t seed,
                             const Tolerances& tol, ContractionStats* stats) {
    if (surface.grid.dim != 2) throw InvalidParams("contract_columns_2d expects a 2d surface");
    return contract_columns_impl(
        surface, t_size, seed, tol, stats, [&](const std::vector<cdouble>& z) {
            SurfaceUnwrap u = unwrap_surface(surface.grid, z, tol);
            if (u.m1 != 0 || u.m2 != 0)
                throw WindingObstruction({u.m1, u.m2},
                                         "contract_columns_2d: boundary windings (" +
                                             std::to_string(u.m1) + "," + std::to_string(u.m2) +
                                             ") forbid contraction");
            return u.phi;
        });
}

} // namespace bloch
