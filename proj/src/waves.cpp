#include "bfk/waves.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <Eigen/Dense>

namespace bfk {

namespace odeint = boost::numeric::odeint;

double c_star(double beta) { return beta <= 2.0 ? 2.0 : 0.5 * beta + 2.0 / beta; }

double phi_closed_form(double beta, double x) {
    if (beta < 2.0) throw std::domain_error("phi_closed_form: beta must be >= 2");
    double y = 0.5 * beta * x;
    return y > 0 ? std::exp(-y) / (1.0 + std::exp(-y)) : 1.0 / (1.0 + std::exp(y));
}

namespace {

using State = std::array<double, 2>;

struct PhasePlane {
    double beta, c;
    void operator()(const State& y, State& dy, double) const {
        dy[0] = -y[1];
        dy[1] = (beta * y[0] - c) * y[1] + y[0] * (1.0 - y[0]);
    }
    double dV(double U, double V) const { return (beta * U - c) * V + U * (1.0 - U); }
};

double lambda_plus(double beta, double c) {
    double b = beta - c;
    return 0.5 * (b + std::sqrt(b * b + 4.0));
}

enum class Outcome { connects, crosses_zero, leaves_box, spirals, overshoots, stalled };

struct Orbit {
    std::vector<double> x, U, V;
    Outcome outcome = Outcome::stalled;
};

// integrate from the saddle at (1,0) until U <= u_stop; classification of the
// remaining linear dynamics near (0,0) is done by the caller
Orbit integrate_orbit(double beta, double c, double u_stop, const ShootOptions& opt) {
    PhasePlane sys{beta, c};
    const double lp = lambda_plus(beta, c);
    State y{1.0 - opt.delta0, lp * opt.delta0};
    auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(y, 0.0, 1e-3);
    Orbit o;
    o.x.push_back(0.0);
    o.U.push_back(y[0]);
    o.V.push_back(y[1]);
    const int max_steps = 2000000;
    for (int k = 0; k < max_steps; ++k) {
        stepper.do_step(sys);
        const State& s = stepper.current_state();
        double x = stepper.current_time();
        if (!(x > o.x.back())) { o.outcome = Outcome::stalled; return o; }
        o.x.push_back(x);
        o.U.push_back(s[0]);
        o.V.push_back(s[1]);
        if (s[0] > 1.0 || s[0] < 0.0) { o.outcome = Outcome::leaves_box; return o; }
        if (s[1] <= 0.0) { o.outcome = Outcome::crosses_zero; return o; }
        if (s[0] <= u_stop) { o.outcome = Outcome::connects; return o; }
        if (x > 1e5) break;
    }
    o.outcome = Outcome::stalled;
    return o;
}

// fate of the linearization at the origin given a point (U,V) with U,V > 0
bool linear_regime_connects(double c, double U, double V) {
    if (c < 2.0) return false;  // complex pair: V must change sign
    double lf = 0.5 * (c + std::sqrt(c * c - 4.0));
    return V <= lf * U * (1.0 + 1e-12);
}

// V(U) by cubic Hermite in U between orbit points
double orbit_E(const std::vector<double>& U, const std::vector<double>& V, const PhasePlane& sys, double v) {
    const std::size_t n = U.size();
    if (n < 2) return 0.0;
    // U decreasing along the orbit
    if (v >= U.front()) return -V.front();
    if (v <= U.back()) return -V.back();
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (U[mid] > v) lo = mid; else hi = mid;
    }
    double u0 = U[lo], u1 = U[hi], v0 = V[lo], v1 = V[hi];
    double m0 = -sys.dV(u0, v0) / v0, m1 = -sys.dV(u1, v1) / v1;  // dV/dU
    double hU = u1 - u0;
    double s = (v - u0) / hU;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return -(h00 * v0 + h10 * hU * m0 + h01 * v1 + h11 * hU * m1);
}

std::vector<std::pair<double, double>> ev_table(const WaveProfile& w, int npts) {
    std::vector<std::pair<double, double>> t;
    for (int k = 1; k <= npts; ++k) {
        double v = static_cast<double>(k) / (npts + 1);
        t.emplace_back(v, w.E(v));
    }
    return t;
}

}  // namespace

double WaveProfile::E(double v) const {
    PhasePlane sys{beta, c};
    return orbit_E(orbit_U, orbit_V, sys, v);
}

bool wave_exists(double beta, double c, const ShootOptions& opt) {
    if (c <= 0) return false;
    const double u_lin = 1e-8;
    Orbit o = integrate_orbit(beta, c, u_lin, opt);
    if (o.outcome != Outcome::connects) return false;
    return linear_regime_connects(c, o.U.back(), o.V.back());
}

WaveProfile shoot_wave(double beta, double c, double eps_stop, const ShootOptions& opt) {
    if (!(eps_stop > 0 && eps_stop < 1e-3)) throw std::invalid_argument("shoot_wave: eps_stop must lie in (0, 1e-3)");
    Orbit o = integrate_orbit(beta, c, eps_stop, opt);
    switch (o.outcome) {
        case Outcome::crosses_zero: throw NoWave("shoot_wave: V <= 0 with U above eps_stop (no monotone connection)");
        case Outcome::leaves_box: throw NoWave("shoot_wave: orbit left [0,1] (no monotone connection)");
        case Outcome::stalled: throw std::runtime_error("shoot_wave: step size underflow or runaway orbit");
        default: break;
    }
    if (!linear_regime_connects(c, o.U.back(), o.V.back()))
        throw NoWave("shoot_wave: linearization at the origin forbids a monotone connection");

    PhasePlane sys{beta, c};
    // normalize U(0) = 1/2 using a quintic Hermite interpolant of the orbit in x
    std::vector<double> xs = o.x, us = o.U, dus(o.U.size()), ddus(o.U.size());
    for (std::size_t k = 0; k < us.size(); ++k) {
        dus[k] = -o.V[k];
        ddus[k] = -sys.dV(o.U[k], o.V[k]);
    }
    std::size_t khalf = 0;
    while (us[khalf + 1] > 0.5) ++khalf;
    const double xa = xs[khalf], xb = xs[khalf + 1];
    const double x_first = xs.front(), x_last = xs.back();
    const double u_first = us.front(), u_last = us.back();
    const double v_last = o.V.back();
    boost::math::interpolators::quintic_hermite<std::vector<double>> qh(std::move(xs), std::move(us), std::move(dus),
                                                                       std::move(ddus));
    boost::uintmax_t iters = 200;
    auto bracket = boost::math::tools::toms748_solve([&](double x) { return qh(x) - 0.5; }, xa, xb,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    const double x_half = 0.5 * (bracket.first + bracket.second);

    WaveProfile w;
    w.beta = beta;
    w.c = c;
    w.orbit_x.resize(o.x.size());
    for (std::size_t k = 0; k < o.x.size(); ++k) w.orbit_x[k] = o.x[k] - x_half;
    w.orbit_U = o.U;
    w.orbit_V = o.V;

    // uniform samples; exact linear asymptotics outside the orbit's span
    const double hs = opt.sample_h;
    const double lp = lambda_plus(beta, c);
    const double x0 = x_first - x_half, x1 = x_last - x_half;
    const double decay = v_last / u_last;
    int il = static_cast<int>(std::floor(x0 / hs)) - static_cast<int>(std::ceil(10.0 / (lp * hs)));
    int ir = static_cast<int>(std::floor(x1 / hs));
    Grid1D g(il * hs, ir * hs, ir - il + 1);
    w.samples = Field::sample(g, [&](double x) {
        if (x <= x0) return 1.0 - (1.0 - u_first) * std::exp(lp * (x - x0));
        if (x >= x1) return u_last * std::exp(-decay * (x - x1));
        return qh(x + x_half);
    });
    w.E_of_v = ev_table(w, opt.ev_points);
    w.tail = tail_fit(w);
    return w;
}

double minimal_speed_search(double beta, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("minimal_speed_search: tol must be positive");
    double lo = 0.1, hi = beta + 10.0;
    if (!wave_exists(beta, hi)) throw std::runtime_error("minimal_speed_search: no wave at the upper bracket");
    if (wave_exists(beta, lo)) throw std::runtime_error("minimal_speed_search: wave at the lower bracket");
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (wave_exists(beta, mid)) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

WaveProfile closed_form_profile(double beta, const Grid1D& grid) {
    WaveProfile w;
    w.beta = beta;
    w.c = c_star(beta);
    w.samples = Field::sample(grid, [&](double x) { return phi_closed_form(beta, x); });
    // orbit on a fine x-grid, V = (beta/2) U (1-U)
    const double k = 0.5 * beta;
    for (double x = -40.0 / k; x <= 40.0 / k; x += 0.01) {
        double u = phi_closed_form(beta, x);
        w.orbit_x.push_back(x);
        w.orbit_U.push_back(u);
        w.orbit_V.push_back(k * u * (1 - u));
    }
    w.E_of_v = ev_table(w, 99);
    w.tail = tail_fit(w);
    return w;
}

TailDescriptor tail_fit(const WaveProfile& w, double u_lo, double u_hi) {
    const Field& f = w.samples;
    std::vector<double> xs, ys;
    for (int i = 0; i < f.size(); ++i)
        if (f.v[i] >= u_lo && f.v[i] <= u_hi) {
            xs.push_back(f.x(i));
            ys.push_back(f.v[i]);
        }
    TailDescriptor t;
    const int m = static_cast<int>(xs.size());
    if (m < 4) {
        t.flagged = true;
        return t;
    }
    auto r2_of = [&](const Eigen::VectorXd& obs, const Eigen::VectorXd& res) {
        double mean = obs.mean();
        double sst = (obs.array() - mean).square().sum();
        return sst > 0 ? 1.0 - res.squaredNorm() / sst : 1.0;
    };
    const bool pulled_critical = w.beta < 2.0 && std::abs(w.c - 2.0) < 1e-9;
    if (!pulled_critical) {
        Eigen::MatrixXd A(m, 2);
        Eigen::VectorXd y(m);
        for (int k = 0; k < m; ++k) {
            A(k, 0) = xs[k];
            A(k, 1) = 1.0;
            y(k) = std::log(ys[k]);
        }
        Eigen::VectorXd co = A.colPivHouseholderQr().solve(y);
        Eigen::VectorXd res = A * co - y;
        t.kind = TailKind::exponential;
        t.rate = -co(0);
        t.r2 = r2_of(y, res);
        t.rms = std::sqrt(res.squaredNorm() / m);
    } else {
        // U e^x = A x + B: linear start, then Gauss-Newton on log residuals
        Eigen::MatrixXd A(m, 2);
        Eigen::VectorXd y(m), ly(m);
        for (int k = 0; k < m; ++k) {
            A(k, 0) = xs[k];
            A(k, 1) = 1.0;
            y(k) = ys[k] * std::exp(xs[k]);
            ly(k) = std::log(y(k));
        }
        Eigen::VectorXd p = A.colPivHouseholderQr().solve(y);
        for (int it = 0; it < 50; ++it) {
            Eigen::VectorXd model = A * p;
            if ((model.array() <= 0).any()) break;
            Eigen::VectorXd r = model.array().log().matrix() - ly;
            Eigen::MatrixXd J(m, 2);
            for (int k = 0; k < m; ++k) {
                J(k, 0) = xs[k] / model(k);
                J(k, 1) = 1.0 / model(k);
            }
            Eigen::VectorXd dp = J.colPivHouseholderQr().solve(-r);
            p += dp;
            if (dp.norm() < 1e-14 * (1 + p.norm())) break;
        }
        Eigen::VectorXd model = A * p;
        Eigen::VectorXd res = model.array().log().matrix() - ly;
        t.kind = TailKind::linear_exponential;
        t.A = p(0);
        t.B = p(1);
        t.rate = 1.0;
        t.r2 = r2_of(ly, res);
        t.rms = std::sqrt(res.squaredNorm() / m);
    }
    t.flagged = !(t.r2 > 0.999);
    return t;
}

double wave_residual_sup(const WaveProfile& w, double margin) {
    const Field& f = w.samples;
    const double h = f.grid.h;
    boost::math::interpolators::cardinal_quintic_b_spline<double> sp(f.v, f.grid.x_min, h);
    double worst = 0.0;
    for (int i = 0; i < f.size(); ++i) {
        double x = f.x(i);
        if (x < f.grid.x_min + margin || x > f.grid.x_max - margin) continue;
        double u = sp(x), up = sp.prime(x), upp = sp.double_prime(x);
        double r = -w.c * up + w.beta * u * up - upp - u + u * u;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

const char* to_string(Steepness s) {
    switch (s) {
        case Steepness::steeper: return "steeper";
        case Steepness::less_steep: return "less_steep";
        case Steepness::incomparable: return "incomparable";
    }
    return "?";
}

Steepness wave_steepness(const WaveProfile& w1, const WaveProfile& w2, double tol) {
    if (w1.beta != w2.beta) throw std::invalid_argument("wave_steepness: profiles must share beta");
    bool all_pos = true, all_neg = true;
    for (int k = 1; k <= 19; ++k) {
        double v = 0.05 * k;
        double d = std::abs(w1.E(v)) - std::abs(w2.E(v));
        if (!(d > tol)) all_pos = false;
        if (!(d < -tol)) all_neg = false;
    }
    if (all_pos) return Steepness::steeper;
    if (all_neg) return Steepness::less_steep;
    return Steepness::incomparable;
}

SattingerLimits sattinger_limits(double beta) {
    if (!(beta > 2.0)) throw std::domain_error("sattinger_limits: beta must exceed 2");
    double a = 0.25 * beta - 1.0 / beta, b = 1.0 / beta + 0.25 * beta;
    return {-a * a, -b * b - 1.0};
}

}  // namespace bfk
