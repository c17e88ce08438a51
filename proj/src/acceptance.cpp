#include "bfk/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <tuple>

#include "json.hpp"

#include "bfk/evolve.hpp"
#include "bfk/fronts.hpp"
#include "bfk/transforms.hpp"
#include "bfk/waves.hpp"

namespace bfk {

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Env {
    const AcceptOptions& opt;

    double h(double pinned) const { return opt.h_override > 0 ? opt.h_override : pinned; }

    SolverConfig pde(double beta, double h_pinned, double x0, double x1, FrameSpec frame, double t_end,
                     double snap_dt) const {
        SolverConfig c;
        c.beta = beta;
        c.grid = Grid1D::with_spacing(x0, x1, h(h_pinned));
        c.frame = frame;
        c.t_end = t_end;
        c.observer_stride = snap_dt > 0 ? std::max(1, static_cast<int>(std::lround(snap_dt / c.time_step()))) : INT_MAX;
        return c;
    }

    // traces of the long heaviside runs in the Bramson frame, shared between criteria
    // the right edge must stay well ahead of the diffusive leading edge, sqrt(4t)
    std::map<std::tuple<double, double, double>, FrontTrace> traces;
    const FrontTrace& bramson_trace(double beta, double t_end, double x_max = 200.0) {
        auto key = std::make_tuple(beta, t_end, x_max);
        auto it = traces.find(key);
        if (it != traces.end()) return it->second;
        SolverConfig c = pde(beta, 0.05, -50.0, x_max, FrameSpec::bramson(bramson_r(beta)), t_end, 0.0);
        FrontTrace tr;
        Trajectory t = run(make_ic(IcSpec::heaviside(), c.grid), c, trace_observer(tr, c.frame, 1.0));
        if (t.aborted) throw NumericalAbort(t.abort_reason);
        return traces[key] = tr;
    }
};

Trajectory run_checked(const IcSpec& ic, const SolverConfig& c) {
    Trajectory t = run(make_ic(ic, c.grid), c);
    if (t.aborted) throw NumericalAbort(t.abort_reason);
    return t;
}

double slope_of(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= x.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
}

// ---------------------------------------------------------------- criteria

void c1_minimal_speed(Env&, CriterionResult& r) {
    r.title = "minimal speed search";
    r.target = "|c_search - c_*| <= 1e-4 for beta in {0,0.5,1,1.5,2,3,4,6}";
    double worst = 0.0;
    for (double b : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0})
        worst = std::max(worst, std::abs(minimal_speed_search(b) - c_star(b)));
    r.measured = fmt("max error %.2e", worst);
    r.pass = worst <= 1e-4;
}

void c2_closed_form(Env&, CriterionResult& r) {
    r.title = "closed-form waves";
    r.target = "sup |U - 1/(1+e^{beta x/2})| <= 1e-6 for beta in {2,3,4}";
    double worst = 0.0;
    for (double b : {2.0, 3.0, 4.0}) {
        WaveProfile w = shoot_wave(b, c_star(b));
        for (int i = 0; i < w.samples.size(); ++i)
            worst = std::max(worst, std::abs(w.samples.v[i] - phi_closed_form(b, w.samples.x(i))));
    }
    r.measured = fmt("max error %.2e", worst);
    r.pass = worst <= 1e-6;
}

void c3_pulled(Env& env, CriterionResult& r) {
    r.title = "pulled Bramson shift";
    r.target = "a = 1.5 +- 0.15 for beta in {0,1}, window [200,2000]";
    r.pass = true;
    for (double b : {0.0, 1.0}) {
        ShiftFit f = fit_shift(env.bramson_trace(b, 2000.0), ShiftModel::pulled, 200.0, 2000.0);
        r.measured += fmt("%sa(beta=%g)=%.4f", r.measured.empty() ? "" : ", ", b, f.a);
        r.pass = r.pass && std::abs(f.a - 1.5) <= 0.15;
    }
}

void c4_pushmi_pullyu(Env& env, CriterionResult& r) {
    r.title = "pushmi-pullyu shift";
    r.target = "a = 0.5 +- 0.05 for beta = 2, window [200,2000]";
    ShiftFit f = fit_shift(env.bramson_trace(2.0, 2000.0), ShiftModel::pushmi_pullyu, 200.0, 2000.0);
    r.measured = fmt("a=%.4f", f.a);
    r.pass = std::abs(f.a - 0.5) <= 0.05;
}

void c5_pushed(Env& env, CriterionResult& r) {
    r.title = "pushed regime";
    r.target = "c = 2.5 +- 0.01, a = 0 +- 0.05 on [20,200]; omega > 0.05 with R^2 > 0.99 on [10,60]";
    SolverConfig c = env.pde(4.0, 0.05, -50.0, 100.0, FrameSpec::linear(c_star(4.0)), 200.0, 0.5);
    Trajectory tr = run_checked(IcSpec::front_like(-5.0, 0.0), c);
    ShiftFit f = fit_shift(track(tr), ShiftModel::pushed, 20.0, 200.0);
    // distance to the scheme's own traveling wave, so the O(h^2) profile error is not a floor
    WaveProfile w = discrete_wave(c);
    ConvergenceRate cr = convergence_rate(tr, w, 10.0, 60.0);
    r.measured = fmt("c=%.5f a=%.4f omega=%.4f R2=%.4f (decay phase: omega=%.3f R2=%.3f until t=%g, d=%.1e)", f.c, f.a,
                     cr.omega_hat, cr.r2, cr.omega_decay, cr.r2_decay, cr.floor_time,
                     cr.distance.empty() ? 0.0 : cr.distance.front());
    r.pass = std::abs(f.c - 2.5) <= 0.01 && std::abs(f.a) <= 0.05 && cr.omega_hat > 0.05 && cr.r2 > 0.99;
}

struct Beta2Run {
    Trajectory tr;
    MomentSeries ms;
};

Beta2Run& beta2_heaviside(Env& env, std::unique_ptr<Beta2Run>& cache) {
    if (!cache) {
        cache = std::make_unique<Beta2Run>();
        SolverConfig c = env.pde(2.0, 0.05, -50.0, 200.0, FrameSpec::linear(2.0), 500.0, 1.0);
        cache->tr = run_checked(IcSpec::heaviside(), c);
        cache->ms = moments(cache->tr);
    }
    return *cache;
}

void c6_mass(Env& env, CriterionResult& r, std::unique_ptr<Beta2Run>& cache) {
    r.title = "mass and moment identities";
    r.target = "mass drift < 1e-3 on [0,500]; |I - I(0)e^mu|/I < 0.02 on [1,200]";
    const MomentSeries& ms = beta2_heaviside(env, cache).ms;
    double drift = 0.0, growth = 0.0;
    for (std::size_t k = 0; k < ms.times.size(); ++k) {
        drift = std::max(drift, std::abs(ms.mass_p[k] / ms.mass_p[0] - 1.0));
        if (ms.times[k] >= 1.0 && ms.times[k] <= 200.0)
            growth = std::max(growth, std::abs(ms.I_exp[k] - ms.I_exp[0] * std::exp(ms.mu[k])) / ms.I_exp[k]);
    }
    r.measured = fmt("drift=%.2e growth=%.2e", drift, growth);
    r.pass = drift < 1e-3 && growth < 0.02;
}

void c7_p_decay(Env& env, CriterionResult& r, std::unique_ptr<Beta2Run>& cache) {
    r.title = "p decay exponents";
    r.target = "slope of log sup p vs log t = -0.5 +- 0.05 on [50,500]; c0 > 0 on -(1/2)log t <= x <= sqrt(t)/2";
    Beta2Run& b = beta2_heaviside(env, cache);
    std::vector<double> x, y;
    double c0 = INFINITY;
    for (std::size_t k = 0; k < b.ms.times.size(); ++k) {
        double t = b.ms.times[k];
        if (t < 50.0 || t > 500.0) continue;
        x.push_back(std::log(t));
        y.push_back(std::log(b.ms.sup_p[k]));
        double off = linear2_offset(b.tr, k);
        Field p = p_field(b.tr.snapshots[k], off);
        for (int i = 0; i < p.size(); ++i) {
            double xx = p.x(i) + off;
            if (xx >= -0.5 * std::log(t) && xx <= 0.5 * std::sqrt(t)) c0 = std::min(c0, p.v[i] * std::sqrt(t));
        }
    }
    double s = slope_of(x, y);
    r.measured = fmt("slope=%.4f c0=%.4f", s, c0);
    r.pass = std::abs(s + 0.5) <= 0.05 && c0 > 0.0 && std::isfinite(c0);
}

void c8_hopf_cole(Env& env, CriterionResult& r) {
    r.title = "Hopf-Cole inequality";
    double h0 = env.h(0.1), dt0 = 0.04 * h0;
    r.target = fmt("positive part <= 50(h^2+dt) on t in [1,50] and halves under (h,dt)->(h/2,dt/2); h=%g dt=%g", h0, dt0);
    r.pass = true;
    for (double b : {1.0, 2.0})
        for (int icn = 0; icn < 2; ++icn) {
            IcSpec ic = icn == 0 ? IcSpec::heaviside() : IcSpec::steep_sigmoid(1.5, 0.0);
            double pp[2];
            for (int l = 0; l < 2; ++l) {
                SolverConfig c;
                c.beta = b;
                c.grid = Grid1D::with_spacing(-40.0, 120.0, h0 / (1 << l));
                c.dt = dt0 / (1 << l);
                c.t_end = 50.0;
                c.frame = FrameSpec::bramson(bramson_r(b));
                c.scheme = Scheme::strang;
                c.observer_stride = 10;
                Trajectory tr = run_checked(ic, c);
                double worst = 0.0;
                for (const auto& s : hopf_cole_residual(tr, b, 1.0, 50.0)) worst = std::max(worst, s.sup_positive);
                pp[l] = worst;
                double hh = c.grid.h;
                if (worst > 50.0 * (hh * hh + c.dt)) r.pass = false;
            }
            bool halves = pp[1] <= 0.5 * pp[0] || (pp[0] < 1e-13 && pp[1] < 1e-13);
            r.pass = r.pass && halves;
            r.measured += fmt("%sbeta=%g %s: %.2e -> %.2e", r.measured.empty() ? "" : "; ", b,
                              icn == 0 ? "heaviside" : "sigmoid", pp[0], pp[1]);
        }
}

double dirichlet(const Field& phi, const Field& r) {
    Field d = d1(phi);
    Field e(phi.grid);
    for (int i = 0; i < phi.size(); ++i) e.v[i] = d.v[i] * d.v[i] * r.v[i];
    return integrate(e);
}

void c9_dissipation(Env& env, CriterionResult& r) {
    r.title = "dissipation, Nash and rearrangement";
    r.target = "0 violations at 100(h^2+dt) on [5,400], decay exponent in [-0.7,-0.3]; 20 Nash pairs; "
               "50 rearrangements (L1, L2 to 1e-3, energy not increased)";
    SolverConfig c = env.pde(2.0, 0.05, -50.0, 200.0, FrameSpec::linear(2.0), 400.0, 1.0);
    Trajectory tr = run_checked(IcSpec::steep_sigmoid(1.5, 2.0), c);
    double tol = 100.0 * (tr.config.grid.h * tr.config.grid.h + tr.config.dt);
    MonotonicityReport rep = dissipation_monotonicity(tr, tol, 50.0, 400.0, 5.0);
    int viol = rep.energy_violations + rep.rate_violations;
    bool ok_diss = rep.checked > 0 && viol == 0 && rep.decay_exponent >= -0.7 && rep.decay_exponent <= -0.3;

    std::mt19937 rng(20240517u);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Grid1D g(-30.0, 30.0, 6001);
    Field w = Field::sample(g, [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    auto random_bumps = [&](int count, double spread) {
        std::vector<std::array<double, 3>> b;
        for (int k = 0; k < count; ++k) b.push_back({0.1 + 1.9 * U(rng), spread * (2 * U(rng) - 1), 0.3 + 2.7 * U(rng)});
        return Field::sample(g, [b](double x) {
            double s = 0.0;
            for (const auto& q : b) s += q[0] * std::exp(-(x - q[1]) * (x - q[1]) / (2 * q[2] * q[2]));
            return s;
        });
    };
    int nash_fail = 0;
    double nash_worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        Field phi = random_bumps(1 + k % 3, 10.0);
        double theta = std::exp(std::log(0.05) + U(rng) * std::log(400.0));
        NashCheck nc = nash_check(phi, w, theta);
        nash_worst = std::max(nash_worst, nc.lhs / nc.rhs);
        if (!(nc.lhs <= nc.rhs)) ++nash_fail;
    }
    int rear_fail = 0;
    double norm_worst = 0.0, energy_ratio = 0.0;
    for (int k = 0; k < 50; ++k) {
        Field phi = random_bumps(1 + k % 4, 8.0);
        if (k % 2) {  // an interior oscillation
            double om = 1.0 + 2.0 * U(rng);
            for (int i = 0; i < g.n; ++i) phi.v[i] *= 1.0 + 0.4 * std::sin(om * g.x(i));
        }
        Field ps = weighted_rearrangement(phi, w);
        double worst = 0.0;
        for (int p = 1; p <= 2; ++p) {
            Field a(g), b(g);
            for (int i = 0; i < g.n; ++i) {
                a.v[i] = std::pow(phi.v[i], p) * w.v[i];
                b.v[i] = std::pow(ps.v[i], p) * w.v[i];
            }
            worst = std::max(worst, std::abs(integrate(b) / integrate(a) - 1.0));
        }
        double ratio = dirichlet(ps, w) / dirichlet(phi, w);
        norm_worst = std::max(norm_worst, worst);
        energy_ratio = std::max(energy_ratio, ratio);
        if (worst > 1e-3 || ratio > 1.0) ++rear_fail;
    }
    r.measured = fmt("violations=%d (checked %d) exponent=%.3f; nash fails=%d max lhs/rhs=%.3f; rearrangement fails=%d "
                     "max norm err=%.1e max energy ratio=%.4f",
                     viol, rep.checked, rep.decay_exponent, nash_fail, nash_worst, rear_fail, norm_worst, energy_ratio);
    r.pass = ok_diss && nash_fail == 0 && rear_fail == 0;
}

void c10_moment_transform(Env& env, CriterionResult& r) {
    r.title = "moment-transform identity";
    r.target = "|Phi_1 - Phi|/Phi + truncation budget < 0.02 for beta in {1,2}, r in {0.5,0.8}; T=600";
    r.pass = true;
    for (double b : {1.0, 2.0}) {
        SolverConfig c = env.pde(b, 0.05, -40.0, 120.0, FrameSpec::linear(2.0), 600.0, 0.1);
        Trajectory tr = run_checked(IcSpec::heaviside(), c);
        for (double rr : {0.5, 0.8}) {
            MomentIdentity m = moment_transform_identity(tr, rr, b, 1.0, 0.02);
            r.measured += fmt("%s(%g,%g): %.2e+%.1e", r.measured.empty() ? "" : " ", b, rr, m.rel_error, m.rel_budget);
            r.pass = r.pass && m.rel_error + m.rel_budget < 0.02;
        }
    }
}

void c11_higher_order(Env& env, CriterionResult& r) {
    r.title = "higher-order coefficient (non-blocking)";
    r.blocking = false;
    r.target = "|b - (-sqrt(pi)/2)| <= 0.3 for beta = 2, t_end = 1e4, window [1000,10000]";
    HigherOrderFit f = higher_order_fit(env.bramson_trace(2.0, 1e4, 600.0), 2.0, 1000.0, 1e4);
    double target = -0.5 * std::sqrt(std::acos(-1.0));
    r.measured = fmt("b=%.4f +- %.4f (three-term b=%.4f, logt/t=%.4f)%s", f.b_hat, f.b_sigma, f.b3, f.logt_over_t_hat,
                     f.inconclusive ? " inconclusive" : "");
    r.pass = std::abs(f.b_hat - target) <= 0.3;
}

void c12_properties(Env& env, CriterionResult& r) {
    r.title = "property suites";
    r.target = "comparison, range/monotonicity, steepness propagation, wave steepness vs speed, phase-plane trapping";
    int fails = 0;
    std::string notes;
    // comparison, range and monotone class on ordered pairs
    for (double b : {0.5, 1.0, 2.0, 3.0}) {
        SolverConfig c = env.pde(b, 0.05, -50.0, 100.0, FrameSpec::linear(c_star(b)), 20.0, 1.0);
        Trajectory lo = run_checked(IcSpec::front_like(-5.0, 0.0), c);
        Trajectory hi = run_checked(IcSpec::front_like(-5.0, 2.0), c);
        double viol = 0.0;
        bool cls = true;
        for (std::size_t k = 0; k < lo.size(); ++k) {
            // the two runs re-grid independently; compare at equal frame coordinates
            const double ds = lo.shifts[k] - hi.shifts[k];
            for (int i = 0; i < c.grid.n; ++i)
                viol = std::max(viol, lo.snapshots[k].v[i] - hi.snapshots[k].at(c.grid.x(i) + ds));
            cls = cls && lo.snapshots[k].in_class_w(1e-10) && hi.snapshots[k].in_class_w(1e-10);
        }
        if (viol > 1e-12 || !cls) {
            ++fails;
            notes += fmt(" comparison/range beta=%g viol=%.1e class=%d;", b, viol, cls);
        }
        // a step is steeper than the gamma = 1.5 sigmoid at every level
        Trajectory st = run_checked(IcSpec::heaviside(), c);
        Trajectory sh = run_checked(IcSpec::steep_sigmoid(1.5, 0.0), c);
        // level slopes are read off the grid to O(h^2); once both runs sit on the same wave that is the floor
        const double stol = 0.1 * c.grid.h * c.grid.h;
        std::vector<double> levels;
        for (int k = 1; k <= 49; ++k) levels.push_back(0.02 * k);
        double worst = INFINITY;
        for (std::size_t k = 0; k < st.size(); ++k) {
            auto e1 = level_slopes(st.snapshots[k], levels), e2 = level_slopes(sh.snapshots[k], levels);
            for (std::size_t j = 0; j < levels.size(); ++j) worst = std::min(worst, e1[j] - e2[j]);
        }
        if (worst < -stol) {
            ++fails;
            notes += fmt(" steepness beta=%g margin=%.1e;", b, worst);
        }
    }
    // steeper waves for slower speeds
    const std::vector<std::array<double, 3>> pairs{{1.0, 2.0, 3.0}, {0.5, 2.0, 2.5}, {3.0, c_star(3.0), c_star(3.0) + 1.0},
                                                   {4.0, 2.5, 3.0}};
    for (const auto& p : pairs) {
        Steepness s = wave_steepness(shoot_wave(p[0], p[1]), shoot_wave(p[0], p[2]));
        if (s != Steepness::steeper) {
            ++fails;
            notes += fmt(" wave steepness beta=%g;", p[0]);
        }
    }
    // trapping region for 0 < beta < 2 at c = 2
    double trap = 0.0;
    for (double b : {0.5, 1.0, 1.5, 1.9}) {
        WaveProfile w = shoot_wave(b, 2.0);
        for (std::size_t k = 0; k < w.orbit_U.size(); ++k) {
            double U = w.orbit_U[k], V = w.orbit_V[k], f = U * (1.0 - U);
            double scale = std::max(f, 1e-300);
            trap = std::max(trap, std::max(0.5 * b * f - V, V - f) / scale);
        }
    }
    if (trap > 1e-6) {
        ++fails;
        notes += fmt(" trapping excess %.1e;", trap);
    }
    r.measured = fmt("%d failures; trapping max relative excess %.1e%s", fails, trap, notes.c_str());
    r.pass = fails == 0;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptOptions& opt, std::ostream& log) {
    Env env{opt, {}};
    std::unique_ptr<Beta2Run> beta2;
    auto selected = [&](int id) { return opt.only.empty() || std::count(opt.only.begin(), opt.only.end(), id); };
    const std::vector<std::pair<int, std::function<void(CriterionResult&)>>> suite{
        {1, [&](CriterionResult& r) { c1_minimal_speed(env, r); }},
        {2, [&](CriterionResult& r) { c2_closed_form(env, r); }},
        {3, [&](CriterionResult& r) { c3_pulled(env, r); }},
        {4, [&](CriterionResult& r) { c4_pushmi_pullyu(env, r); }},
        {5, [&](CriterionResult& r) { c5_pushed(env, r); }},
        {6, [&](CriterionResult& r) { c6_mass(env, r, beta2); }},
        {7, [&](CriterionResult& r) { c7_p_decay(env, r, beta2); }},
        {8, [&](CriterionResult& r) { c8_hopf_cole(env, r); }},
        {9, [&](CriterionResult& r) { c9_dissipation(env, r); }},
        {10, [&](CriterionResult& r) { c10_moment_transform(env, r); }},
        {11, [&](CriterionResult& r) { c11_higher_order(env, r); }},
        {12, [&](CriterionResult& r) { c12_properties(env, r); }},
    };
    const std::vector<int> quick_set{1, 2, 12};
    std::vector<CriterionResult> out;
    for (const auto& [id, fn] : suite) {
        if (!selected(id)) continue;
        CriterionResult r;
        r.id = id;
        if (opt.quick && std::find(quick_set.begin(), quick_set.end(), id) == quick_set.end()) {
            r.skipped = true;
            r.title = "skipped (quick)";
            r.blocking = id != 11;
        } else {
            auto t0 = std::chrono::steady_clock::now();
            try {
                fn(r);
            } catch (const std::exception& e) {
                r.pass = false;
                r.measured = std::string("error: ") + e.what();
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        const char* tag = r.skipped ? "SKIP" : (r.pass ? "PASS" : (r.blocking ? "FAIL" : "MISS"));
        log << fmt("criterion %2d %s  %s", id, tag, r.title.c_str());
        if (!r.skipped) log << " | measured: " << r.measured << " | target: " << r.target << fmt(" | %.1f s", r.seconds);
        log << std::endl;
        out.push_back(r);
    }
    return out;
}

int acceptance_exit_code(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.skipped && r.blocking && !r.pass) return 1;
    return 0;
}

std::string acceptance_json(const std::vector<CriterionResult>& results) {
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["criteria"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json c;
        c["id"] = r.id;
        c["title"] = r.title;
        c["status"] = r.skipped ? "skipped" : (r.pass ? "pass" : "fail");
        c["blocking"] = r.blocking;
        c["measured"] = r.measured;
        c["target"] = r.target;
        c["seconds"] = r.seconds;
        j["criteria"].push_back(c);
    }
    j["exit_code"] = acceptance_exit_code(results);
    return j.dump(2);
}

}  // namespace bfk
