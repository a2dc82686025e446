#include "bloch/frames.hpp"

#include <cmath>

namespace bloch {

namespace {

void warn_small_grid(const KGrid& grid, std::vector<std::string>& warnings) {
    for (int a = 0; a < grid.dim; ++a)
        if (grid.sizes[a] < 8) {
            warnings.push_back("grid size " + std::to_string(grid.sizes[a]) + " along axis " +
                               std::to_string(a) + " is below 8; frame quality not guaranteed");
            return;
        }
}

Homotopy contract_obstruction(const UnitaryField& obstruction, FrameMethod method, int t_size,
                              std::uint64_t seed, const Tolerances& tol, ContractionStats* stats) {
    switch (method) {
        case FrameMethod::columns:
            if (obstruction.grid.dim == 1)
                return contract_columns_1d(obstruction, t_size, seed, tol, stats);
            return contract_columns_2d(obstruction, t_size, seed, tol, stats);
        case FrameMethod::log:
            if (obstruction.grid.dim != 1)
                throw InvalidParams("logarithm contraction is only defined for loops");
            return contract_log(obstruction, t_size, tol);
        case FrameMethod::log_forced:
            if (obstruction.grid.dim != 1)
                throw InvalidParams("logarithm contraction is only defined for loops");
            return contract_log_forced(obstruction, t_size, tol);
    }
    throw InvalidParams("unknown frame method");
}

} // namespace

FrameMethod frame_method_from_string(const std::string& s) {
    if (s == "log") return FrameMethod::log;
    if (s == "columns") return FrameMethod::columns;
    if (s == "log-forced" || s == "log_forced") return FrameMethod::log_forced;
    throw InvalidParams("unknown method '" + s + "' (expected log|columns|log-forced)");
}

std::string to_string(FrameMethod m) {
    switch (m) {
        case FrameMethod::log: return "log";
        case FrameMethod::columns: return "columns";
        case FrameMethod::log_forced: return "log-forced";
    }
    return "?";
}

FrameResult frame_1d(const OverlapProvider& provider, const Tolerances& tol) {
    const KGrid& grid = provider.grid();
    if (grid.dim != 1) throw InvalidParams("frame_1d expects a 1d provider");
    const int k_count = grid.sizes[0];
    const int n = provider.n_occ();

    FrameResult out;
    warn_small_grid(grid, out.warnings);

    TransportStats tstats;
    std::vector<Coords> line = axis_cycle(grid, {0, 0, 0}, 0);
    std::vector<CMatrix> seq =
        transport_line(provider, CMatrix::Identity(n, n), line, tol, &tstats);
    out.min_sigma = tstats.min_sigma;
    if (tstats.coarse_warning)
        out.warnings.push_back("transport overlaps poorly conditioned; grid likely too coarse");

    CMatrix v_obs = closure_obstruction(seq, tol);
    AntiHermLog lg = log_unitary_branch_retry(v_obs, tol, &out.branch_retry);

    out.frame = GaugeFrame(grid, n);
    for (int i = 0; i < k_count; ++i)
        out.frame.coeffs[i] = seq[i] * exp_antiherm(lg.l, -double(i) / k_count, tol);
    out.periodicity_residual = (seq[k_count] * exp_antiherm(lg.l, -1.0, tol) -
                                out.frame.coeffs[0]).norm();

    out.obstruction = UnitaryField(KGrid::line(1), n);
    out.obstruction.values[0] = v_obs;
    return out;
}

namespace {

// Shared 2d stage: edge frame, column transports along k2, obstruction loop.
struct ColumnsAndObstruction {
    FrameResult base;
    std::vector<std::vector<CMatrix>> columns;
    UnitaryField obstruction;
    TransportStats tstats;
};

ColumnsAndObstruction transport_columns_2d(const OverlapProvider& provider,
                                           const Tolerances& tol) {
    const KGrid& grid = provider.grid();
    if (grid.dim != 2) throw InvalidParams("expected a 2d provider");
    const int n1 = grid.sizes[0], n2 = grid.sizes[1];
    const int n = provider.n_occ();

    ColumnsAndObstruction out;
    RestrictedProvider edge(provider, 1);
    out.base = frame_1d(edge, tol);
    out.tstats.min_sigma = out.base.min_sigma;
    out.columns.resize(n1);
    out.obstruction = UnitaryField(KGrid::line(n1), n);
    for (int i = 0; i < n1; ++i) {
        out.columns[i] = transport_line(provider, out.base.frame.coeffs[i],
                                        axis_cycle(grid, {i, 0, 0}, 1), tol, &out.tstats);
        out.obstruction.values[i] =
            loewdin(out.columns[i][0].adjoint() * out.columns[i][n2], tol);
    }
    return out;
}

} // namespace

UnitaryField obstruction_loop_2d(const OverlapProvider& provider, const Tolerances& tol) {
    return transport_columns_2d(provider, tol).obstruction;
}

FrameResult frame_2d(const OverlapProvider& provider, FrameMethod method, std::uint64_t seed,
                     const Tolerances& tol) {
    const KGrid& grid = provider.grid();
    if (grid.dim != 2) throw InvalidParams("frame_2d expects a 2d provider");
    const int n1 = grid.sizes[0], n2 = grid.sizes[1];
    const int n = provider.n_occ();

    FrameResult out;
    warn_small_grid(grid, out.warnings);

    ColumnsAndObstruction stage = transport_columns_2d(provider, tol);
    FrameResult& base = stage.base;
    std::vector<std::vector<CMatrix>>& columns = stage.columns;
    UnitaryField& obstruction = stage.obstruction;
    out.branch_retry = base.branch_retry;
    out.min_sigma = stage.tstats.min_sigma;
    if (stage.tstats.coarse_warning)
        out.warnings.push_back("transport overlaps poorly conditioned; grid likely too coarse");

    int c1 = winding_det(obstruction, tol);
    out.obstruction = obstruction;
    out.obstruction_windings = {c1};
    if (c1 != 0)
        throw ChernObstruction({c1}, "frame_2d: obstruction winding " + std::to_string(c1) +
                                         " equals the Chern number; no periodic frame exists");

    ContractionStats cstats;
    Homotopy h = contract_obstruction(obstruction, method, n2 + 1, seed, tol, &cstats);
    out.reference_margins = cstats.reference_margins;
    out.branch_retry = out.branch_retry || cstats.branch_retry;
    out.homotopy_max_step = h.max_step;

    out.frame = GaugeFrame(grid, n);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) out.frame.at({i, j, 0}) = columns[i][j] * h.at(i, j);

    // Wrapped mismatch along k2, the transported axis. The k1 closure is an
    // exact index wrap except for the base edge's own residual, which the
    // transport carries through unchanged.
    double r2 = 0.0;
    for (int i = 0; i < n1; ++i)
        r2 = std::max(r2, (columns[i][n2] * h.at(i, n2) - out.frame.at({i, 0, 0})).norm());
    out.periodicity_residual = std::max(r2, base.periodicity_residual);
    return out;
}

FrameResult frame_3d(const OverlapProvider& provider, FrameMethod method, std::uint64_t seed,
                     const Tolerances& tol) {
    const KGrid& grid = provider.grid();
    if (grid.dim != 3) throw InvalidParams("frame_3d expects a 3d provider");
    if (method != FrameMethod::columns)
        throw InvalidParams("frame_3d supports method=columns only");
    const int n1 = grid.sizes[0], n2 = grid.sizes[1], n3 = grid.sizes[2];
    const int n = provider.n_occ();

    FrameResult out;
    warn_small_grid(grid, out.warnings);

    RestrictedProvider face(provider, 2);
    FrameResult base = frame_2d(face, method, seed, tol);
    out.branch_retry = base.branch_retry;
    out.reference_margins = base.reference_margins;

    TransportStats tstats;
    tstats.min_sigma = base.min_sigma;
    std::vector<std::vector<CMatrix>> pillars(size_t(n1) * n2);
    UnitaryField obstruction(KGrid::square(n1, n2), n);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            auto& line = pillars[size_t(i) * n2 + j];
            line = transport_line(provider, base.frame.at({i, j, 0}),
                                  axis_cycle(grid, {i, j, 0}, 2), tol, &tstats);
            obstruction.at({i, j, 0}) = loewdin(line[0].adjoint() * line[n3], tol);
        }
    out.min_sigma = tstats.min_sigma;
    if (tstats.coarse_warning)
        out.warnings.push_back("transport overlaps poorly conditioned; grid likely too coarse");

    // boundary loops of the obstruction surface carry the remaining two
    // winding numbers
    UnitaryField row(KGrid::line(n1), n), col(KGrid::line(n2), n);
    for (int i = 0; i < n1; ++i) row.values[i] = obstruction.at({i, 0, 0});
    for (int j = 0; j < n2; ++j) col.values[j] = obstruction.at({0, j, 0});
    int w1 = winding_det(row, tol);
    int w2 = winding_det(col, tol);
    out.obstruction = obstruction;
    out.obstruction_windings = {w1, w2};
    if (w1 != 0 || w2 != 0)
        throw ChernObstruction({w1, w2},
                               "frame_3d: obstruction boundary windings (" + std::to_string(w1) +
                                   "," + std::to_string(w2) +
                                   ") are nonzero Chern numbers; no periodic frame exists");

    ContractionStats cstats;
    Homotopy h = contract_columns_2d(obstruction, n3 + 1, seed, tol, &cstats);
    for (double m : cstats.reference_margins) out.reference_margins.push_back(m);
    out.branch_retry = out.branch_retry || cstats.branch_retry;
    out.homotopy_max_step = h.max_step;

    out.frame = GaugeFrame(grid, n);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            long kl = obstruction.grid.index({i, j, 0});
            for (int l = 0; l < n3; ++l)
                out.frame.at({i, j, l}) = pillars[size_t(i) * n2 + j][l] * h.at(kl, l);
        }

    double r3 = 0.0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            long kl = obstruction.grid.index({i, j, 0});
            r3 = std::max(r3, (pillars[size_t(i) * n2 + j][n3] * h.at(kl, n3) -
                               out.frame.at({i, j, 0})).norm());
        }
    out.periodicity_residual = std::max(r3, base.periodicity_residual);
    return out;
}

} // namespace bloch
