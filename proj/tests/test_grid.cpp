#include <cmath>
#include <sstream>

#include "doctest.h"

#include "bfk/grid.hpp"

using namespace bfk;

TEST_SUITE("grid") {

TEST_CASE("grid construction and node positions") {
    Grid1D g(-1.0, 1.0, 201);
    CHECK(g.h == doctest::Approx(0.01));
    CHECK(g.x(0) == -1.0);
    CHECK(g.x(100) == doctest::Approx(0.0).epsilon(1e-15));
    Grid1D w = Grid1D::with_spacing(-50.0, 200.0, 0.05);
    CHECK(w.n == 5001);
    CHECK(w.x(w.n - 1) == doctest::Approx(200.0));
    CHECK_THROWS_AS(Grid1D(-1.0, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Grid1D(1.0, 2.0, 11), std::invalid_argument);  // origin not representable
    CHECK_THROWS_AS(Grid1D(1.0, -1.0, 11), std::invalid_argument);
}

TEST_CASE("d1 exact on linear and constant data") {
    Grid1D g(-3.0, 2.0, 51);
    Field lin = Field::sample(g, [](double x) { return x; });
    Field c(g, 4.0);
    Field dl = d1(lin), dc = d1(c);
    for (int i = 0; i < g.n; ++i) {
        CHECK(dl.v[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dc.v[i] == doctest::Approx(0.0));
    }
    Field up = d1(lin, DiffScheme::upwind, 1), um = d1(lin, DiffScheme::upwind, -1);
    for (int i = 1; i + 1 < g.n; ++i) {
        CHECK(up.v[i] == doctest::Approx(1.0));
        CHECK(um.v[i] == doctest::Approx(1.0));
    }
}

TEST_CASE("d1 of sin at the origin matches cos 0") {
    Grid1D g(-1.0, 1.0, 201);
    Field f = Field::sample(g, [](double x) { return std::sin(x); });
    CHECK(std::abs(d1(f).v[100] - 1.0) < 1e-4);
}

TEST_CASE("d2 exact on quadratics and constants") {
    Grid1D g(-2.0, 2.0, 41);
    Field q = Field::sample(g, [](double x) { return x * x; });
    Field d = d2(q), z = d2(Field(g, 3.0));
    for (int i = 1; i + 1 < g.n; ++i) {
        CHECK(d.v[i] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(z.v[i] == doctest::Approx(0.0));
    }
}

TEST_CASE("d2 of exp at the origin") {
    Grid1D g(-1.0, 1.0, 201);
    Field f = Field::sample(g, [](double x) { return std::exp(x); });
    CHECK(std::abs(d2(f).v[100] - 1.0) < 1e-4);
}

TEST_CASE("central stencils converge at second order") {
    auto err = [](int n, bool second) {
        Grid1D g(-1.0, 2.0, n);
        Field f = Field::sample(g, [](double x) { return std::sin(2 * x) + x * x * x; });
        Field d = second ? d2(f) : d1(f);
        double e = 0;
        for (int i = 0; i < g.n; ++i) {
            double x = g.x(i);
            double ex = second ? -4 * std::sin(2 * x) + 6 * x : 2 * std::cos(2 * x) + 3 * x * x;
            if (second && (i == 0 || i == g.n - 1)) continue;
            e = std::max(e, std::abs(d.v[i] - ex));
        }
        return e;
    };
    for (bool second : {false, true}) {
        double e1 = err(61, second), e2 = err(121, second), e3 = err(241, second);
        CHECK(std::log2(e1 / e2) >= 1.9);
        CHECK(std::log2(e2 / e3) >= 1.9);
    }
}

TEST_CASE("integrate: constants, exponential, indicator") {
    Grid1D g(-1.0, 1.0, 201);
    CHECK(integrate(Field(g, 1.0), 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    Grid1D ge(-20.0, 0.0, 2001);
    Field e = Field::sample(ge, [](double x) { return std::exp(x); });
    CHECK(std::abs(integrate(e) - (1.0 - std::exp(-20.0))) < 1e-4);
    Field ind = Field::sample(g, [](double x) { return x <= 0 ? 1.0 : 0.0; });
    CHECK(std::abs(integrate(ind) - 1.0) <= g.h);
    CHECK_THROWS_AS(integrate(ind, -2.0, 0.0), std::out_of_range);
}

TEST_CASE("integrate is additive over subintervals") {
    Grid1D g(-3.0, 4.0, 71);
    Field f = Field::sample(g, [](double x) { return std::cos(x) + x * x; });
    for (double b : {-1.234, 0.0, 0.55, 2.01}) {
        double lhs = integrate(f, -2.5, b) + integrate(f, b, 3.3);
        CHECK(lhs == doctest::Approx(integrate(f, -2.5, 3.3)).epsilon(1e-13));
    }
}

TEST_CASE("tail integral oracles") {
    Grid1D g0(-1.0, 40.0, 4101);
    Field z = tail_integral(Field(g0, 0.0));
    for (double v : z.v) CHECK(v == 0.0);
    Field e = Field::sample(g0, [](double x) { return std::exp(-x); });
    Field F = tail_integral(e);
    CHECK(F.v.back() == 0.0);
    int i0 = 100;  // x = 0
    CHECK(std::abs(F.v[i0] - (1.0 - std::exp(-40.0))) < 1e-6 * 10);
    Grid1D g(-40.0, 40.0, 8001);
    Field phi = Field::sample(g, [](double x) { return 1.0 / (1.0 + std::exp(x)); });
    Field P = tail_integral(phi);
    CHECK(std::abs(P.v[4000] - std::log(2.0)) < 1e-5);
}

TEST_CASE("tail integral warns when the tail has not decayed") {
    Grid1D g(-1.0, 1.0, 21);
    CHECK(tail_integral_checked(Field(g, 1.0)).tail_warning);
    CHECK_FALSE(tail_integral_checked(Field(g, 0.0)).tail_warning);
}

TEST_CASE("tail integral differentiates back to minus the integrand") {
    Grid1D g(-10.0, 30.0, 4001);
    Field f = Field::sample(g, [](double x) { return std::exp(-x * x / 4); });
    Field d = d1(tail_integral(f));
    double e = 0;
    for (int i = 1; i + 1 < g.n; ++i) e = std::max(e, std::abs(d.v[i] + f.v[i]));
    CHECK(e < 5 * g.h * g.h);
}

TEST_CASE("level crossing") {
    Grid1D g(-10.0, 10.0, 2001);
    Field phi = Field::sample(g, [](double x) { return 1.0 / (1.0 + std::exp(x)); });
    CHECK(std::abs(level_crossing(phi, 0.5)) <= g.h * g.h);
    Grid1D g2(-1.0, 1.0, 3);
    Field lin = Field::sample(g2, [](double x) { return 0.5 - 0.5 * x; });
    CHECK(level_crossing(lin, 0.5) == doctest::Approx(0.0));
    Field s2 = Field::sample(g, [](double x) { return 1.0 / (1.0 + std::exp(2 * x)); });
    CHECK(std::abs(level_crossing(s2, 0.5)) <= g.h * g.h);
    CHECK_THROWS_AS(level_crossing(phi, 2.0), std::domain_error);
}

TEST_CASE("level crossing is translation equivariant by one node") {
    Grid1D g(-10.0, 10.0, 401);
    auto f = [](double x) { return 1.0 / (1.0 + std::exp(1.3 * (x - 0.37))); };
    Field a = Field::sample(g, f);
    Field b = Field::sample(g, [&](double x) { return f(x - g.h); });
    for (double lv : {0.1, 0.5, 0.77})
        CHECK(level_crossing(b, lv) - level_crossing(a, lv) == doctest::Approx(g.h).epsilon(1e-9));
}

TEST_CASE("class W check and interpolation") {
    Grid1D g(-5.0, 5.0, 101);
    Field phi = Field::sample(g, [](double x) { return 1.0 / (1.0 + std::exp(x)); });
    CHECK(phi.in_class_w());
    Field bump = Field::sample(g, [](double x) { return std::exp(-x * x); });
    CHECK_FALSE(bump.in_class_w());
    Field over = phi;
    over.v[3] = 1.2;
    CHECK_FALSE(over.in_class_w());
    CHECK(phi.at(-100.0) == phi.v.front());
    CHECK(phi.at(0.05) == doctest::Approx(0.5 * (phi.v[50] + phi.v[51])));
}

TEST_CASE("CSV round trip is bit exact") {
    Grid1D g(-2.0, 3.0, 17);
    Field f = Field::sample(g, [](double x) { return std::exp(-x) / 3.0 + 1e-300; });
    std::stringstream ss;
    write_csv(f, ss);
    CHECK(ss.str().rfind("# grid x_min=", 0) == 0);
    Field r = read_csv(ss);
    CHECK(r.grid.congruent(g));
    for (int i = 0; i < g.n; ++i) CHECK(r.v[i] == f.v[i]);
}

}
