#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bloch/frames.hpp"
#include "bloch/transport.hpp"

using namespace bloch;

namespace {

// rank-1 projector onto (cos(pi k), sin(pi k)) in R^2: the basis section is
// antiperiodic (Moebius band), so the closure carries Berry phase pi
class RotatingPlaneProvider : public OverlapProvider {
public:
    explicit RotatingPlaneProvider(int n) : grid_(KGrid::line(n)) {}
    int n_occ() const override { return 1; }
    const KGrid& grid() const override { return grid_; }
    CMatrix overlap(const Coords& from, const Coords& to) const override {
        double a = M_PI * double(KGrid::wrap(from[0], grid_.sizes[0])) / grid_.sizes[0];
        double b = M_PI * double(KGrid::wrap(to[0], grid_.sizes[0])) / grid_.sizes[0];
        CMatrix m(1, 1);
        m(0, 0) = std::cos(a) * std::cos(b) + std::sin(a) * std::sin(b);
        return m;
    }

private:
    KGrid grid_;
};

class TinyOverlapProvider : public OverlapProvider {
public:
    TinyOverlapProvider() : grid_(KGrid::line(4)) {}
    int n_occ() const override { return 1; }
    const KGrid& grid() const override { return grid_; }
    CMatrix overlap(const Coords& from, const Coords& to) const override {
        CMatrix m(1, 1);
        m(0, 0) = (grid_.index(from) == grid_.index(to)) ? 1.0 : 1e-12;
        return m;
    }

private:
    KGrid grid_;
};

BlochModel kane_mele_edge(double lambda_nu, double lambda_r) {
    BlochModel km = kane_mele({1, 1, lambda_nu, lambda_r});
    BlochModel edge = km;
    edge.dim = 1;
    edge.name = "kane-mele-edge";
    auto h = km.hamiltonian;
    edge.hamiltonian = [h](const std::array<double, 3>& k) {
        return h({k[0], 0.0, 0.0});
    };
    return edge;
}

CMatrix random_unitary(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cdouble(g(rng), g(rng));
    return loewdin(a);
}

} // namespace

TEST_CASE("constant projector leaves the frame unchanged") {
    ConstantOverlapProvider p(KGrid::line(10), 2);
    CMatrix u = random_unitary(2, 7);
    auto seq = transport_line(p, u, axis_cycle(p.grid(), {0, 0, 0}, 0));
    CHECK(seq.size() == 11);
    for (const auto& v : seq) CHECK(max_abs(v - u) < 1e-13);
    CHECK(max_abs(closure_obstruction(seq) - CMatrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("single step matches a fine-substep integration") {
    // transport across one cell of the cone model, once directly and once
    // through 1000 substeps of the same segment
    BlochModel cone = berry_cone(M_PI / 3.0);
    const int coarse = 8, refine = 1000;
    ModelOverlapProvider pc(cone, KGrid::line(coarse));
    ModelOverlapProvider pf(cone, KGrid::line(coarse * refine));

    CMatrix one = transport_step(pc, CMatrix::Identity(1, 1), {0, 0, 0}, {1, 0, 0});
    std::vector<Coords> seg;
    for (int i = 0; i <= refine; ++i) seg.push_back({i, 0, 0});
    CMatrix fine = transport_line(pf, CMatrix::Identity(1, 1), seg).back();

    double err = max_abs(one - fine);
    CHECK(err < 2e-2);

    // halving the step shrinks the one-step error quadratically
    ModelOverlapProvider pc2(cone, KGrid::line(2 * coarse));
    ModelOverlapProvider pf2(cone, KGrid::line(2 * coarse * refine));
    CMatrix one2 = transport_step(pc2, CMatrix::Identity(1, 1), {0, 0, 0}, {1, 0, 0});
    std::vector<Coords> seg2;
    for (int i = 0; i <= refine; ++i) seg2.push_back({i, 0, 0});
    CMatrix fine2 = transport_line(pf2, CMatrix::Identity(1, 1), seg2).back();
    double err2 = max_abs(one2 - fine2);
    CHECK(err2 < 0.35 * err);
}

TEST_CASE("every step is exactly orthonormal") {
    BlochModel edge = kane_mele_edge(6.0, 1.0);
    ModelOverlapProvider p(edge, KGrid::line(200));
    auto seq = transport_line(p, CMatrix::Identity(2, 2), axis_cycle(p.grid(), {0, 0, 0}, 0));
    for (const auto& u : seq) CHECK(unitarity_residual(u) < 1e-12);
}

TEST_CASE("transport is covariant under a fixed right rotation") {
    BlochModel edge = kane_mele_edge(0.0, 1.0);
    ModelOverlapProvider p(edge, KGrid::line(40));
    CMatrix g = random_unitary(2, 99);
    auto line = axis_cycle(p.grid(), {0, 0, 0}, 0);
    auto plain = transport_line(p, CMatrix::Identity(2, 2), line);
    auto rotated = transport_line(p, g, line);
    for (size_t i = 0; i < plain.size(); ++i)
        CHECK(max_abs(rotated[i] - plain[i] * g) < 1e-13);
}

TEST_CASE("endpoint self-convergence is first order") {
    BlochModel edge = kane_mele_edge(6.0, 1.0);
    auto endpoint = [&](int n) {
        ModelOverlapProvider p(edge, KGrid::line(n));
        return transport_line(p, CMatrix::Identity(2, 2), axis_cycle(p.grid(), {0, 0, 0}, 0))
            .back();
    };
    CMatrix e1 = endpoint(50), e2 = endpoint(100), e4 = endpoint(200);
    double d1 = max_abs(e2 - e1);
    double d2 = max_abs(e4 - e2);
    CHECK(d1 < 10.0 / 50.0);
    CHECK(d2 < 0.6 * d1);
}

TEST_CASE("rank-deficient overlaps are reported as too-coarse transport") {
    TinyOverlapProvider p;
    CHECK_THROWS_AS(transport_step(p, CMatrix::Identity(1, 1), {0, 0, 0}, {1, 0, 0}),
                    RankDeficient);
}

TEST_CASE("transport stats record conditioning") {
    BlochModel edge = kane_mele_edge(6.0, 1.0);
    ModelOverlapProvider p(edge, KGrid::line(16));
    TransportStats stats;
    transport_line(p, CMatrix::Identity(2, 2), axis_cycle(p.grid(), {0, 0, 0}, 0), {}, &stats);
    CHECK(stats.min_sigma > 0.5);
    CHECK(stats.min_sigma <= 1.0 + 1e-12);
    CHECK(!stats.coarse_warning);
}

TEST_CASE("moebius closure carries Berry phase pi") {
    RotatingPlaneProvider p(256);
    auto seq = transport_line(p, CMatrix::Identity(1, 1), axis_cycle(p.grid(), {0, 0, 0}, 0));
    CMatrix v_obs = closure_obstruction(seq);
    CHECK(std::abs(v_obs(0, 0) - cdouble(-1.0, 0.0)) < 1e-6);
}

TEST_CASE("cone closure matches the analytic Berry phase") {
    double polar = M_PI / 3.0;
    BlochModel cone = berry_cone(polar);
    ModelOverlapProvider p(cone, KGrid::line(512));
    auto seq = transport_line(p, CMatrix::Identity(1, 1), axis_cycle(p.grid(), {0, 0, 0}, 0));
    CMatrix v_obs = closure_obstruction(seq);
    double analytic = -M_PI * (1.0 - std::cos(polar));
    CHECK(std::arg(v_obs(0, 0)) == doctest::Approx(analytic).epsilon(1e-3));
}

TEST_CASE("QSH obstruction loop has unit determinant") {
    BlochModel km = kane_mele({1, 1, 0.0, 1.0});
    ModelOverlapProvider p(km, KGrid::square(48, 48));
    UnitaryField loop = obstruction_loop_2d(p);
    CHECK(loop.max_unitarity_residual() < 1e-10);
    for (const auto& v : loop.values) CHECK(std::abs(v.determinant() - cdouble(1, 0)) < 1e-6);
}

TEST_CASE("overlap providers are contractions with identity diagonal") {
    BlochModel km = kane_mele({1, 1, 2.0, 0.5});
    ModelOverlapProvider p(km, KGrid::square(12, 12));
    for (long idx = 0; idx < p.grid().npoints(); idx += 17) {
        Coords c = p.grid().coords(idx);
        CHECK(max_abs(p.overlap(c, c) - CMatrix::Identity(2, 2)) < 1e-12);
        CMatrix m = p.overlap(c, KGrid::step(c, 0, 1));
        Eigen::JacobiSVD<CMatrix> svd(m);
        CHECK(svd.singularValues().maxCoeff() <= 1.0 + 1e-8);
    }
}
