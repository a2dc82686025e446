#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bloch/diagnostics.hpp"

using namespace bloch;

namespace {

CMatrix random_unitary(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cdouble(g(rng), g(rng));
    return loewdin(a);
}

GaugeFrame identity_frame(const KGrid& grid, int n) {
    GaugeFrame f(grid, n);
    for (auto& u : f.coeffs) u = CMatrix::Identity(n, n);
    return f;
}

// second moment of the discrete Wannier amplitudes, window centered on the
// largest one so the ring unfolds cleanly
double direct_wannier_variance(const ModelOverlapProvider& provider, const GaugeFrame& frame) {
    const int n = frame.grid.sizes[0];
    const int nb = int(provider.occ_basis(0).rows());
    std::vector<CVector> w(n, CVector::Zero(nb));
    for (int r = 0; r < n; ++r)
        for (int k = 0; k < n; ++k) {
            CVector phys = provider.occ_basis(k) * frame.coeffs[k].col(0);
            w[r] += std::polar(1.0 / n, -2.0 * M_PI * double(k) * r / n) * phys;
        }
    int rmax = 0;
    double best = -1.0;
    for (int r = 0; r < n; ++r)
        if (w[r].squaredNorm() > best) best = w[r].squaredNorm(), rmax = r;
    double norm = 0.0, mean = 0.0, second = 0.0;
    for (int dr = -n / 2; dr < n / 2; ++dr) {
        double x = double(rmax + dr);
        double p = w[KGrid::wrap(rmax + dr, n)].squaredNorm();
        norm += p;
        mean += p * x;
        second += p * x * x;
    }
    mean /= norm;
    return second / norm - mean * mean;
}

} // namespace

TEST_CASE("regularity vanishes for the identity frame on a constant projector") {
    ConstantOverlapProvider p(KGrid::square(12, 12), 2);
    RegularityField reg = regularity(identity_frame(p.grid(), 2), p);
    CHECK(reg.max == doctest::Approx(0.0));
    CHECK(reg.mean == doctest::Approx(0.0));
}

TEST_CASE("regularity spikes at a deliberate sign flip") {
    KGrid grid = KGrid::square(16, 16);
    ConstantOverlapProvider p(grid, 2);
    GaugeFrame f = identity_frame(grid, 2);
    f.at({5, 5, 0}) = -CMatrix::Identity(2, 2);
    RegularityField reg = regularity(f, p);
    double expect = 2.0 * std::sqrt(2.0) / grid.spacing(0); // 2 sqrt(N) per difference
    CHECK(reg.max >= expect);
    CHECK(reg.max <= 2.5 * expect);
    // spike is localized: points away from the flip stay at zero
    CHECK(reg.values[grid.index({10, 10, 0})] == doctest::Approx(0.0));
}

TEST_CASE("chern_plaquette vanishes for time-reversal symmetric models") {
    for (double lnu : {0.0, 6.0}) {
        BlochModel km = kane_mele({1, 1, lnu, 1.0});
        ModelOverlapProvider p(km, KGrid::square(24, 24));
        CHECK(chern_plaquette(p) == 0);
    }
}

TEST_CASE("chern_plaquette counts the haldane invariant") {
    ModelOverlapProvider p(haldane_chern(), KGrid::square(24, 24));
    CHECK(chern_plaquette(p) == 1);
}

TEST_CASE("chern_plaquette on a constant projector") {
    ConstantOverlapProvider p(KGrid::square(12, 12), 2);
    CHECK(chern_plaquette(p) == 0);
}

TEST_CASE("plaquette sum and obstruction winding agree on every 2d model") {
    // two independent routes to c1
    struct Case {
        BlochModel model;
        int expected;
    };
    std::vector<Case> cases;
    cases.push_back({haldane_chern(), 1});
    cases.push_back({kane_mele({1, 1, 0.0, 1.0}), 0});
    cases.push_back({kane_mele({1, 1, 6.0, 1.0}), 0});
    for (const auto& c : cases) {
        ModelOverlapProvider p(c.model, KGrid::square(24, 24));
        CHECK(chern_plaquette(p) == c.expected);
        CHECK(winding_det(obstruction_loop_2d(p)) == c.expected);
    }
}

namespace {

// deterministic uniform-flux link phases that cannot come from any gapped
// projector family: the plaquette sum is far from an integer turn count
class FluxLinkProvider : public OverlapProvider {
public:
    FluxLinkProvider() : grid_(KGrid::square(6, 6)) {}
    int n_occ() const override { return 1; }
    const KGrid& grid() const override { return grid_; }
    CMatrix overlap(const Coords& from, const Coords& to) const override {
        CMatrix m(1, 1);
        m(0, 0) = std::polar(1.0, 0.1 * double(from[0] * to[1] - to[0] * from[1]));
        return m;
    }

private:
    KGrid grid_;
};

} // namespace

TEST_CASE("chern_plaquette rejects non-integer flux sums") {
    FluxLinkProvider p;
    CHECK_THROWS_AS(chern_plaquette(p), NonIntegerResidual);
}

TEST_CASE("spread vanishes when the frame matches a constant projector") {
    KGrid grid = KGrid::square(10, 10);
    ConstantOverlapProvider p(grid, 2);
    SpreadReport rep = spread(identity_frame(grid, 2), p, MVGeometry::cubic(2));
    CHECK(rep.omega_total == doctest::Approx(0.0).epsilon(1e-12));
    for (double s : rep.per_band_spreads) CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("spread is invariant under constant gauge rotations") {
    BlochModel km = kane_mele({1, 1, 6.0, 1.0});
    MVGeometry geo = MVGeometry::hexagonal();

    // band relabelings (permutation times phases) leave the discretized
    // functional exactly invariant
    {
        KGrid grid = KGrid::square(12, 12);
        ModelOverlapProvider p(km, grid);
        FrameResult fr = frame_2d(p, FrameMethod::columns, 9);
        SpreadReport a = spread(fr.frame, p, geo);
        CMatrix g(2, 2);
        g << 0, std::polar(1.0, 0.7), std::polar(1.0, -1.1), 0;
        GaugeFrame rotated = fr.frame;
        for (auto& u : rotated.coeffs) u = u * g;
        SpreadReport b = spread(rotated, p, geo);
        CHECK(std::abs(a.omega_total - b.omega_total) < 1e-10);
        double sum_b = 0.0;
        for (double s : b.per_band_spreads) sum_b += s;
        CHECK(std::abs(a.omega_total - sum_b) < 1e-10);
    }

    // generic mixing rotations are invariant in the continuum; the finite
    // difference formula realizes that at its own O(1/n^2) accuracy
    CMatrix g = random_unitary(2, 303);
    double prev = 1e300;
    for (int n : {12, 24}) {
        KGrid grid = KGrid::square(n, n);
        ModelOverlapProvider p(km, grid);
        FrameResult fr = frame_2d(p, FrameMethod::columns, 9);
        SpreadReport a = spread(fr.frame, p, geo);
        GaugeFrame rotated = fr.frame;
        for (auto& u : rotated.coeffs) u = u * g;
        SpreadReport b = spread(rotated, p, geo);
        double diff = std::abs(a.omega_total - b.omega_total);
        CHECK(diff < 2e-5);
        CHECK(diff < 0.5 * prev);
        prev = diff;
    }
}

TEST_CASE("spread totals add up and stay positive on smooth frames") {
    BlochModel km = kane_mele({1, 1, 0.0, 1.0});
    ModelOverlapProvider p(km, KGrid::square(12, 12));
    FrameResult fr = frame_2d(p, FrameMethod::columns, 1);
    SpreadReport rep = spread(fr.frame, p, MVGeometry::hexagonal());
    double sum = 0.0;
    for (double s : rep.per_band_spreads) sum += s;
    CHECK(rep.omega_total == doctest::Approx(sum));
    CHECK(rep.omega_total >= 0.0);
}

TEST_CASE("spread matches direct integration of the Wannier function") {
    BlochModel cone = berry_cone(M_PI / 3.0);
    double prev_err = 1e300;
    for (int n : {32, 64, 128}) {
        ModelOverlapProvider p(cone, KGrid::line(n));
        FrameResult fr = frame_1d(p);
        SpreadReport rep = spread(fr.frame, p, MVGeometry::cubic(1));
        double direct = direct_wannier_variance(p, fr.frame);
        double err = std::abs(rep.omega_total - direct);
        CHECK(err < 0.05 * std::max(direct, 0.01));
        CHECK(err <= prev_err + 1e-12);
        prev_err = err;
    }
}

TEST_CASE("spread requires a complete shell set") {
    KGrid grid = KGrid::square(10, 10);
    ConstantOverlapProvider p(grid, 1);
    MVGeometry geo = MVGeometry::cubic(2);
    geo.shell_offsets = {{1, 0, 0}, {-1, 0, 0}}; // one axis only
    CHECK_THROWS_AS(spread(identity_frame(grid, 1), p, geo), IncompleteShells);
}

TEST_CASE("hexagonal geometry passes the completeness check") {
    BlochModel km = kane_mele({1, 1, 6.0, 1.0});
    KGrid grid = KGrid::square(10, 10);
    ModelOverlapProvider p(km, grid);
    FrameResult fr = frame_2d(p, FrameMethod::columns, 2);
    CHECK_NOTHROW(spread(fr.frame, p, MVGeometry::hexagonal()));
}

TEST_CASE("convergence_study tabulates runs and failures") {
    BlochModel km = kane_mele({1, 1, 0.0, 1.0});
    auto rows = convergence_study(km, FrameMethod::columns, {12, 24}, 3, MVGeometry::hexagonal());
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.status == "ok");
        CHECK(r.max_regularity > 0.0);
        CHECK(r.max_regularity >= r.mean_regularity);
    }

    auto bad = convergence_study(haldane_chern(), FrameMethod::columns, {12},
                                 4, MVGeometry::hexagonal());
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].status == "ChernObstruction");

    std::string csv = convergence_csv(rows);
    CHECK(csv.rfind("size,max_regularity", 0) == 0);
}
