#include <climits>
#include <cmath>
#include <random>

#include "doctest.h"

#include "bfk/evolve.hpp"
#include "bfk/fronts.hpp"
#include "bfk/transforms.hpp"
#include "bfk/waves.hpp"

using namespace bfk;

namespace {

SolverConfig small(double beta, double t_end, int stride) {
    SolverConfig c;
    c.beta = beta;
    c.grid = Grid1D::with_spacing(-30, 60, 0.1);
    c.frame = beta > 2 ? FrameSpec::linear(c_star(beta)) : FrameSpec::linear(2.0);
    c.t_end = t_end;
    c.observer_stride = stride;
    return c;
}

// frame-aligned difference a(x) - b(x) at snapshot k
std::vector<double> aligned_diff(const Trajectory& a, const Trajectory& b, std::size_t k, double extra = 0.0) {
    const Grid1D& g = a.config.grid;
    std::vector<double> d(g.n);
    double ds = a.shifts[k] - b.shifts[k] + extra;
    for (int i = 0; i < g.n; ++i) d[i] = a.snapshots[k].v[i] - b.snapshots[k].at(g.x(i) + ds);
    return d;
}

int sign_changes(const std::vector<double>& d, double floor) {
    int s = 0, last = 0;
    for (double v : d) {
        int sg = v > floor ? 1 : (v < -floor ? -1 : 0);
        if (sg == 0) continue;
        if (last != 0 && sg != last) ++s;
        last = sg;
    }
    return s;
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("comparison principle on random ordered pairs") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        double beta = 4.0 * U(rng);
        double L1 = -8.0 + 4.0 * U(rng), L2 = L1 + 1.0 + 4.0 * U(rng);
        SolverConfig c = small(beta, 8.0, 400);
        Trajectory lo = run(make_ic(IcSpec::front_like(L1, L2), c.grid), c);
        Trajectory hi = run(make_ic(IcSpec::front_like(L1 + 0.5 * U(rng), L2 + 2.0 * U(rng) + 0.1), c.grid), c);
        REQUIRE(lo.size() == hi.size());
        for (std::size_t k = 0; k < lo.size(); ++k) {
            auto d = aligned_diff(lo, hi, k);
            CHECK(*std::max_element(d.begin(), d.end()) <= 5e-12);
        }
    }
}

TEST_CASE("range and monotonicity are preserved") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        double beta = 4.0 * U(rng);
        IcSpec ic = trial % 3 == 0 ? IcSpec::heaviside()
                  : trial % 3 == 1 ? IcSpec::steep_sigmoid(1.0 + 1.5 * U(rng) + 0.01, 2.0 * U(rng))
                                   : IcSpec::front_like(-6.0, -6.0 + 6.0 * U(rng) + 0.2);
        SolverConfig c = small(beta, 8.0, 200);
        Trajectory tr = run(make_ic(ic, c.grid), c);
        for (const Field& f : tr.snapshots) {
            CHECK(f.in_class_w(1e-10));
            CHECK(*std::min_element(f.v.begin(), f.v.end()) >= 0.0);
            CHECK(*std::max_element(f.v.begin(), f.v.end()) <= 1.0 + 1e-10);
        }
    }
}

TEST_CASE("steepness propagation: at most one sign change against every shift") {
    for (double beta : {0.5, 2.0, 3.0}) {
        SolverConfig c = small(beta, 10.0, 500);
        c.grid = Grid1D::with_spacing(-60, 60, 0.1);  // keep the left boundary far from the compared region
        Trajectory st = run(make_ic(IcSpec::heaviside(), c.grid), c);
        Trajectory sh = run(make_ic(IcSpec::steep_sigmoid(1.5, 0.0), c.grid), c);
        for (std::size_t k = 0; k < st.size(); ++k)
            for (int j = 0; j < 32; ++j) {
                double s = -8.0 + 0.5 * j;
                CHECK(sign_changes(aligned_diff(st, sh, k, s), 1e-9) <= 1);
            }
    }
}

TEST_CASE("steepness level slopes relax in time") {
    SolverConfig c = small(1.0, 20.0, 1000);
    Trajectory tr = run(make_ic(IcSpec::heaviside(), c.grid), c);
    std::vector<double> lv;
    for (int k = 1; k <= 9; ++k) lv.push_back(0.1 * k);
    for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
        auto a = level_slopes(tr.snapshots[k], lv), b = level_slopes(tr.snapshots[k + 1], lv);
        for (std::size_t j = 0; j < lv.size(); ++j) CHECK(b[j] <= a[j] + 1e-10);
    }
}

TEST_CASE("steepness order is antisymmetric on random logistic pairs") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0.2, 3.0);
    Grid1D g = Grid1D::with_spacing(-30, 30, 0.02);
    for (int t = 0; t < 10; ++t) {
        double k1 = U(rng), k2 = U(rng);
        auto mk = [&](double k) { return Field::sample(g, [k](double x) { return 1.0 / (1.0 + std::exp(k * x)); }); };
        FieldOrder ab = steepness_order(mk(k1), mk(k2)).order, ba = steepness_order(mk(k2), mk(k1)).order;
        if (ab == FieldOrder::steeper) CHECK(ba == FieldOrder::less_steep);
        if (ab == FieldOrder::less_steep) CHECK(ba == FieldOrder::steeper);
        CHECK((ab == FieldOrder::steeper) == (k1 > k2));
    }
}

TEST_CASE("wave steepness is a preorder consistent with speed") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 4; ++t) {
        double beta = 3.5 * U(rng);
        double c1 = c_star(beta) + 0.5 * U(rng), c2 = c1 + 0.3 + 0.7 * U(rng);
        CHECK(wave_steepness(shoot_wave(beta, c1), shoot_wave(beta, c2)) == Steepness::steeper);
    }
}

TEST_CASE("Hopf-Cole transform inverts on random profiles") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Grid1D g = Grid1D::with_spacing(-20, 40, 0.05);
    for (int t = 0; t < 5; ++t) {
        double k = 0.8 + 2.0 * U(rng), a = 4.0 * U(rng) - 2.0, beta = 2.0 * U(rng);
        Field u = Field::sample(g, [&](double x) { return 1.0 / (1.0 + std::exp(k * (x - a))); });
        Field back = hopf_cole_inverse(hopf_cole(u, beta), beta);
        for (int i = 0; i < g.n; ++i) CHECK(std::abs(back.v[i] - u.v[i]) <= 1e-8);
    }
}

TEST_CASE("integration additivity and crossing equivariance on random data") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Grid1D g = Grid1D::with_spacing(-10, 10, 0.05);
    for (int t = 0; t < 10; ++t) {
        double k = 0.5 + 2 * U(rng), s = 2 * U(rng) - 1;
        auto f = [&](double x) { return 1.0 / (1.0 + std::exp(k * (x - s))); };
        Field a = Field::sample(g, f), b = Field::sample(g, [&](double x) { return f(x - g.h); });
        double lv = 0.05 + 0.9 * U(rng);
        CHECK(level_crossing(b, lv) - level_crossing(a, lv) == doctest::Approx(g.h).epsilon(1e-8));
        double p = -9 + 18 * U(rng), q = -9 + 18 * U(rng), m = std::min(p, q), M = std::max(p, q), mid = m + (M - m) * U(rng);
        CHECK(integrate(a, m, mid) + integrate(a, mid, M) == doctest::Approx(integrate(a, m, M)).epsilon(1e-12));
    }
}

TEST_CASE("critical shift stays above -log 2") {
    SolverConfig c;
    c.beta = 2.0;
    c.grid = Grid1D::with_spacing(-40, 80, 0.05);
    c.frame = FrameSpec::bramson(1.0);
    c.t_end = 100.0;
    c.observer_stride = INT_MAX;
    FrontTrace tr;
    run(make_ic(IcSpec::heaviside(), c.grid), c, trace_observer(tr, c.frame, 1.0));
    MuBand band = mu_bounds_check(tr);
    CHECK(band.mu_min >= -std::log(2.0));
    CHECK(band.m0 <= 3.0);
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        if (tr.times[k] >= 1.0) CHECK(2 * tr.times[k] - tr.x_level[k] <= 1.5 * std::log(tr.times[k]) + 3.0);
}

TEST_CASE("discrete p mass is conserved step by step") {
    SolverConfig c;
    c.beta = 2.0;
    c.grid = Grid1D::with_spacing(-50, 60, 0.05);
    c.frame = FrameSpec::linear(2.0);
    c.t_end = 5.0;
    c.observer_stride = 1;
    Trajectory tr = run(make_ic(IcSpec::heaviside(), c.grid), c);
    MomentSeries ms = moments(tr);
    for (std::size_t k = 1; k < ms.times.size(); ++k)
        CHECK(std::abs(ms.mass_p[k] - ms.mass_p[k - 1]) <= 1e-6 * c.time_step());
}

}
