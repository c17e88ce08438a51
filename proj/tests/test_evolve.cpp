#include <climits>
#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "bfk/evolve.hpp"
#include "bfk/fronts.hpp"
#include "bfk/waves.hpp"

using namespace bfk;

namespace {

SolverConfig base(double beta, double h, double x0, double x1, FrameSpec frame, double t_end, int stride = INT_MAX) {
    SolverConfig c;
    c.beta = beta;
    c.grid = Grid1D::with_spacing(x0, x1, h);
    c.frame = frame;
    c.t_end = t_end;
    c.observer_stride = stride;
    return c;
}

double sup_dist(const Field& a, const Field& b) {
    double d = 0;
    for (int i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.v[i] - b.v[i]));
    return d;
}

}  // namespace

TEST_SUITE("evolve") {

TEST_CASE("frame offsets") {
    CHECK(FrameSpec::lab().offset(7.0) == 0.0);
    CHECK(FrameSpec::linear(2.5).offset(4.0) == doctest::Approx(10.0));
    FrameSpec b = FrameSpec::bramson(3.0);
    CHECK(b.offset(9.0) == doctest::Approx(18.0 - 1.5 * std::log(10.0)));
    CHECK(b.speed(9.0) == doctest::Approx(2.0 - 1.5 / 10.0));
    CHECK(bramson_r(1.0) == 3.0);
    CHECK(bramson_r(2.0) == 1.0);
    CHECK_THROWS(bramson_r(3.0));
}

TEST_CASE("default time step and CFL validation") {
    CHECK(default_dt(0.05) == doctest::Approx(0.001));
    CHECK(default_dt(1.0) == doctest::Approx(0.01));
    SolverConfig c = base(2.0, 0.05, -10, 10, FrameSpec::linear(2.0), 1.0);
    CHECK_NOTHROW(c.validate());
    c.dt = 0.1;  // 0.1 > 0.5 h / (beta + c)
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("initial conditions") {
    Grid1D g = Grid1D::with_spacing(-50, 50, 0.05);
    Field hv = make_ic(IcSpec::heaviside(), g);
    CHECK(hv.at(-1.0) == 1.0);
    CHECK(hv.at(1.0) == 0.0);
    CHECK(hv.in_class_w());
    Field ss = make_ic(IcSpec::steep_sigmoid(1.5, 0.0), g);
    CHECK(std::abs(ss.at(-g.h) - 0.5) < 0.05);
    CHECK(ss.at(1.0) == 0.0);
    CHECK(ss.in_class_w());
    Field fl = make_ic(IcSpec::front_like(-5.0, 0.0), g);
    for (int i = 0; i < g.n; ++i) {
        if (g.x(i) <= -5.0) CHECK(fl.v[i] == 1.0);
        if (g.x(i) >= 0.0) CHECK(fl.v[i] == 0.0);
    }
    CHECK_THROWS_AS(make_ic(IcSpec::steep_sigmoid(1.0, 0.0), g), std::invalid_argument);
    CHECK_THROWS_AS(make_ic(IcSpec::front_like(0.0, -5.0), g), std::invalid_argument);
}

TEST_CASE("constant states are fixed points of a step") {
    SolverConfig c = base(1.5, 0.05, -10, 10, FrameSpec::lab(), 1.0);
    c.left_value = 0.0;
    c.right_value = 0.0;
    Field z(c.grid, 0.0);
    CHECK(sup_dist(step(z, c), z) == 0.0);
    c.left_value = 1.0;
    c.right_value = 1.0;
    Field o(c.grid, 1.0);
    CHECK(sup_dist(step(o, c), o) < 1e-15);
}

TEST_CASE("closed-form wave is nearly steady in its own frame, at scheme order") {
    // the sampled exact wave moves by C (h^2 + dt) per unit time
    double err[2], scale[2];
    for (int l = 0; l < 2; ++l) {
        double h = 0.2 / (1 << l);
        SolverConfig c = base(3.0, h, -30, 30, FrameSpec::linear(c_star(3.0)), 1.0);
        Field u = make_ic(IcSpec::profile(3.0), c.grid);
        Field s = step(u, c);
        err[l] = sup_dist(s, u);
        scale[l] = h * h + c.time_step();
    }
    CHECK(err[0] / scale[0] < 1.0);
    CHECK(err[1] / scale[1] < 1.0);
}

TEST_CASE("exact wave drift over t in [0,10] and its refinement ratio") {
    double drift[2];
    for (int l = 0; l < 2; ++l) {
        SolverConfig c = base(2.0, 0.2 / (1 << l), -40, 40, FrameSpec::linear(2.0), 10.0, 1);
        c.dt = 0.004 / (1 << l);
        Trajectory tr = run(make_ic(IcSpec::profile(2.0), c.grid), c);
        REQUIRE_FALSE(tr.aborted);
        FrontTrace ft = track(tr);
        double d = 0;
        for (std::size_t k = 0; k < ft.times.size(); ++k) d = std::max(d, std::abs(ft.x_level[k] - 2.0 * ft.times[k]));
        drift[l] = d;
        double scale = c.grid.h * c.grid.h + c.dt;
        CHECK(d <= 10.0 * scale);
    }
    // halving h and dt: at least a factor 3, or already at round-off
    CHECK((drift[0] / drift[1] >= 3.0 || drift[1] < 1e-10));
}

TEST_CASE("run with t_end = 0 keeps only the initial snapshot") {
    SolverConfig c = base(1.0, 0.1, -10, 10, FrameSpec::lab(), 0.0);
    Trajectory tr = run(make_ic(IcSpec::heaviside(), c.grid), c);
    REQUIRE(tr.size() == 1);
    CHECK(tr.times[0] == 0.0);
}

TEST_CASE("run rejects a grid mismatch and records the abort reason") {
    SolverConfig c = base(1.0, 0.1, -10, 10, FrameSpec::lab(), 1.0);
    Grid1D other = Grid1D::with_spacing(-10, 10, 0.2);
    CHECK_THROWS_AS(run(make_ic(IcSpec::heaviside(), other), c), std::invalid_argument);
}

TEST_CASE("pulled front position follows 2t - (3/2) log t at beta = 0") {
    SolverConfig c = base(0.0, 0.05, -50, 200, FrameSpec::bramson(3.0), 100.0);
    FrontTrace tr;
    Trajectory t = run(make_ic(IcSpec::heaviside(), c.grid), c, trace_observer(tr, c.frame, 1.0));
    REQUIRE_FALSE(t.aborted);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        double s = tr.times[k];
        if (s < 50.0) continue;
        double m = 2 * s - 1.5 * std::log(s);
        CHECK(std::abs(tr.x_level[k] - m) / m < 0.05);
    }
}

TEST_CASE("re-gridding keeps lab positions consistent across frames") {
    // same physics in lab and bramson frames; the two differ by O(h^2) in speed
    SolverConfig lab = base(1.0, 0.05, -30, 80, FrameSpec::lab(), 10.0, 200);
    SolverConfig bra = base(1.0, 0.05, -30, 30, FrameSpec::bramson(3.0), 10.0, 200);
    FrontTrace a = track(run(make_ic(IcSpec::heaviside(), lab.grid), lab));
    FrontTrace b = track(run(make_ic(IcSpec::heaviside(), bra.grid), bra));
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t k = 0; k < a.times.size(); ++k) CHECK(std::abs(a.x_level[k] - b.x_level[k]) <= 0.05);
}

TEST_CASE("supersolution residuals") {
    Grid1D g = Grid1D::with_spacing(-30, 30, 0.01);
    BarrierParams p;
    p.A = 1.2;
    Field r = supersolution_residual(BarrierKind::pulled_bound, p, 0.0, g, 1.0);
    double mn = *std::min_element(r.v.begin() + 1, r.v.end() - 1);
    CHECK(mn >= -10 * g.h * g.h);
    CHECK_THROWS_AS(supersolution_residual(BarrierKind::pulled_bound, p, 0.0, g, 2.5), std::invalid_argument);
    BarrierParams q;
    q.lambda = 1.0;
    q.q0 = 0.01;
    q.mu = 0.01;
    for (BarrierKind k : {BarrierKind::pushed_upper, BarrierKind::pushed_lower})
        CHECK_THROWS_AS(supersolution_residual(k, q, 0.0, g, 1.5), std::invalid_argument);
    Field up = supersolution_residual(BarrierKind::pushed_upper, q, 0.5, g, 4.0);
    double mu = *std::min_element(up.v.begin() + 1, up.v.end() - 1);
    CHECK(mu >= -1e-3);
    Field lo = supersolution_residual(BarrierKind::pushed_lower, q, 0.5, g, 4.0);
    double ml = *std::max_element(lo.v.begin() + 1, lo.v.end() - 1);
    CHECK(ml <= 1e-3);
}

TEST_CASE("checkpoint round trip") {
    SolverConfig c = base(1.0, 0.1, -20, 20, FrameSpec::bramson(3.0), 3.0, 100);
    Trajectory tr = run(make_ic(IcSpec::heaviside(), c.grid), c);
    auto dir = std::filesystem::temp_directory_path() / "bfk_ckpt_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_checkpoint(tr, dir.string());
    Trajectory back = read_checkpoint(dir.string());
    REQUIRE(back.size() == tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        CHECK(back.times[k] == tr.times[k]);
        CHECK(back.shifts[k] == tr.shifts[k]);
        CHECK(back.snapshots[k].v == tr.snapshots[k].v);
    }
    CHECK(back.frame == tr.frame);
    std::filesystem::remove_all(dir);
}

TEST_CASE("runs are deterministic") {
    SolverConfig c = base(1.5, 0.1, -20, 40, FrameSpec::bramson(3.0), 5.0, 50);
    Trajectory a = run(make_ic(IcSpec::steep_sigmoid(1.5, 0.0), c.grid), c);
    Trajectory b = run(make_ic(IcSpec::steep_sigmoid(1.5, 0.0), c.grid), c);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.snapshots[k].v == b.snapshots[k].v);
}

}
