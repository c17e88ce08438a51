#include "bfk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "bfk/transforms.hpp"
#include "bfk/waves.hpp"

namespace bfk {

namespace fs = std::filesystem;

namespace {

bool needs_snapshots(const ExperimentConfig& c) {
    for (const auto& a : c.analyses)
        if (a != "track" && a != "fit") return true;
    return false;
}

double scheme_tol(const Trajectory& tr) {
    double h = tr.config.grid.h;
    return h * h + tr.config.dt;
}

Window default_window(const ExperimentConfig& c) {
    if (c.fit_window.set) return c.fit_window;
    return {c.solver.t_end / 10.0, c.solver.t_end, true};
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << s;
}

std::string csv_row(std::initializer_list<double> xs) {
    std::string s;
    bool first = true;
    for (double x : xs) {
        if (!first) s += ",";
        s += format_double(x);
        first = false;
    }
    return s + "\n";
}

json identity_record(const std::string& name, const std::string& ref, double lhs, double rhs, double tol, bool pass) {
    json j;
    j["schema"] = 1;
    j["name"] = name;
    j["paper_ref"] = ref;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["tolerance"] = tol;
    j["pass"] = pass;
    return j;
}

void require_beta2(const Trajectory& tr, const std::string& what) {
    if (tr.config.beta != 2.0) throw std::invalid_argument(what + " requires beta = 2");
}

// (phi, rho) on the right interval where rho >= floor, last snapshot
std::pair<Field, Field> weighted_pair(const Trajectory& tr) {
    const std::size_t k = tr.size() - 1;
    const Field& u = tr.snapshots[k];
    Field p = p_field(u, linear2_offset(tr, k));
    int i0 = u.size();
    for (int i = u.size() - 1; i >= 0; --i) {
        if (1.0 - u.v[i] >= kRhoFloor) i0 = i; else break;
    }
    if (i0 > u.size() - 8) throw std::runtime_error("weighted pair: no region with rho above the floor");
    if (u.x(i0) > 0) throw std::runtime_error("weighted pair: rho floor region does not contain the origin");
    Field phi(Grid1D(u.x(i0), u.grid.x_max, u.size() - i0)), rho(phi.grid);
    double prev = 0.0;
    for (int i = i0; i < u.size(); ++i) {
        double r = std::max(1.0 - u.v[i], prev);  // round-off can break monotonicity far right
        prev = r;
        rho.v[i - i0] = r;
        phi.v[i - i0] = p.v[i] / r;
    }
    return {phi, rho};
}

}  // namespace

// ---------------------------------------------------------------- reports

int RunReport::exit_code() const {
    if (aborted) return kExitNumerical;
    return assertions_passed ? kExitOk : kExitAssertion;
}

json RunReport::to_json() const {
    json j;
    j["schema"] = 1;
    j["config"] = config_echo;
    j["aborted"] = aborted;
    if (aborted) j["abort_reason"] = abort_reason;
    j["assertions_passed"] = assertions_passed;
    j["results"] = results;
    return j;
}

json shift_fit_json(const ShiftFit& f) {
    json j;
    j["schema"] = 1;
    j["model"] = to_string(f.model);
    j["c"] = f.c;
    j["a"] = f.a;
    j["x_const"] = f.x_const;
    j["b"] = f.b;
    j["window"] = {f.t0, f.t1};
    j["rms_residual"] = f.rms_residual;
    j["samples"] = f.samples;
    json cov = json::array();
    for (int r = 0; r < f.covariance.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < f.covariance.cols(); ++c) row.push_back(f.covariance(r, c));
        cov.push_back(row);
    }
    j["covariance"] = cov;
    return j;
}

// ---------------------------------------------------------------- identities

json verify_identity(const std::string& id, const ExperimentConfig& cfg, const Trajectory& tr) {
    const double tol = scheme_tol(tr);
    const double beta = tr.config.beta;
    if (id == "hopf_cole") {
        auto res = hopf_cole_residual(tr, beta, 1.0, 50.0);
        double worst = 0.0;
        for (const auto& s : res) worst = std::max(worst, s.sup_positive);
        double rhs = 50.0 * tol;
        return identity_record(id, "weighted Hopf-Cole differential inequality", worst, rhs, rhs,
                               !res.empty() && worst <= rhs);
    }
    if (id == "g_functional") {
        double mn = 1e300;
        for (std::size_t k = 1; k < tr.size(); ++k) {
            Field G = g_functional(tr.snapshots[k], beta);
            mn = std::min(mn, *std::min_element(G.v.begin(), G.v.end()));
        }
        double t = 1e-6 + tol;
        return identity_record(id, "G >= 0 for solutions steeper than the wave", -mn, 0.0, t, -mn <= t);
    }
    if (id == "mass") {
        require_beta2(tr, id);
        auto ms = moments(tr);
        double worst = 0.0;
        for (double m : ms.mass_p) worst = std::max(worst, std::abs(m / ms.mass_p[0] - 1.0));
        return identity_record(id, "conservation of the p mass", worst, 0.0, 1e-3, worst <= 1e-3);
    }
    if (id == "moment_growth") {
        require_beta2(tr, id);
        auto ms = moments(tr);
        double worst = 0.0;
        for (std::size_t k = 0; k < ms.times.size(); ++k) {
            if (ms.times[k] < 1.0 || ms.times[k] > 200.0) continue;
            double pred = ms.I_exp[0] * std::exp(ms.mu[k]);
            worst = std::max(worst, std::abs(ms.I_exp[k] - pred) / ms.I_exp[k]);
        }
        return identity_record(id, "I(t) = I(0) exp(mu(t))", worst, 0.0, 0.02, worst <= 0.02);
    }
    if (id == "p_decay") {
        require_beta2(tr, id);
        auto ms = moments(tr);
        std::vector<double> x, y;
        for (std::size_t k = 0; k < ms.times.size(); ++k)
            if (ms.times[k] >= 50.0 && ms.times[k] <= 500.0) {
                x.push_back(std::log(ms.times[k]));
                y.push_back(std::log(ms.sup_p[k]));
            }
        if (x.size() < 3) throw std::invalid_argument("p_decay: run must cover t in [50, 500]");
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
        mx /= x.size();
        my /= x.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
        double slope = sxy / sxx;
        return identity_record(id, "sup p decays like t^(-1/2)", slope, -0.5, 0.05, std::abs(slope + 0.5) <= 0.05);
    }
    if (id == "dissipation") {
        require_beta2(tr, id);
        double t = 100.0 * tol;
        auto rep = dissipation_monotonicity(tr, t, 50.0, 400.0, 5.0);
        int v = rep.energy_violations + rep.rate_violations;
        return identity_record(id, "energy dissipation inequality", v, 0.0, t, rep.checked > 0 && v == 0);
    }
    if (id == "nash") {
        auto [phi, rho] = weighted_pair(tr);
        auto nc = nash_check(phi, rho, 1.0);
        return identity_record(id, "weighted Nash inequality", nc.lhs, nc.rhs, 0.0, nc.lhs <= nc.rhs);
    }
    if (id == "rearrangement") {
        auto [phi, rho] = weighted_pair(tr);
        Field ps = weighted_rearrangement(phi, rho);
        double worst = 0.0;
        for (int p = 1; p <= 2; ++p) {
            Field a(phi.grid), b(phi.grid);
            for (int i = 0; i < phi.size(); ++i) {
                a.v[i] = std::pow(std::abs(phi.v[i]), p) * rho.v[i];
                b.v[i] = std::pow(std::abs(ps.v[i]), p) * rho.v[i];
            }
            double ia = integrate(a), ib = integrate(b);
            worst = std::max(worst, std::abs(ib - ia) / ia);
        }
        return identity_record(id, "rearrangement preserves weighted L1 and L2 norms", worst, 0.0, 1e-3, worst <= 1e-3);
    }
    if (id == "moment_transform") {
        auto m = moment_transform_identity(tr, cfg.identity_r, beta, 1.0, 1.0);
        double lhs = m.rel_error + m.rel_budget;
        json j = identity_record(id, "exponential moment transform identity", m.phi_1, m.phi_exact, 0.02, lhs < 0.02);
        j["rel_error"] = m.rel_error;
        j["rel_budget"] = m.rel_budget;
        return j;
    }
    if (id == "mu_bounds") {
        require_beta2(tr, id);
        auto band = mu_bounds_check(track(tr));
        if (band.empty) throw std::invalid_argument("mu_bounds: run must reach t >= 1");
        json j = identity_record(id, "mu(t) within (1/2) log t + [-m0, m0]", band.m0, 3.0, 0.0, band.m0 <= 3.0);
        j["mu_min"] = band.mu_min;
        return j;
    }
    if (id == "steepness") {
        int bad = 0, checked = 0;
        for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
            if (tr.times[k] > 100.0) break;
            auto o = steepness_order(tr.snapshots[k], tr.snapshots[k + 1], 0.0);
            ++checked;
            if (o.order != FieldOrder::steeper) ++bad;
        }
        return identity_record(id, "steepness propagates forward in time", bad, 0.0, 0.0, checked > 0 && bad == 0);
    }
    throw std::invalid_argument("unknown identity '" + id + "'");
}

json verify(const std::string& identity, const ExperimentConfig& cfg) {
    Trajectory tr = run(make_ic(cfg.ic, cfg.solver.grid), cfg.solver);
    if (tr.aborted) throw NumericalAbort(tr.abort_reason);
    return verify_identity(identity, cfg, tr);
}

// ---------------------------------------------------------------- simulate

RunReport simulate(const ExperimentConfig& cfg, bool write_outputs) {
    auto t_start = std::chrono::steady_clock::now();
    RunReport rep;
    rep.config_echo = echo(cfg);
    fs::path out(cfg.output_dir);
    if (write_outputs) fs::create_directories(out);

    SolverConfig sc = cfg.solver;
    if (!needs_snapshots(cfg)) sc.observer_stride = INT_MAX;
    FrontTrace trace;
    Observer obs = trace_observer(trace, sc.frame, cfg.snapshot_dt, cfg.track_level);
    Trajectory tr;
    try {
        tr = run(make_ic(cfg.ic, sc.grid), sc, obs);
    } catch (const LevelLost& e) {
        tr.aborted = true;
        tr.abort_reason = e.what();
    }
    if (tr.aborted) {
        rep.aborted = true;
        rep.abort_reason = tr.abort_reason;
    } else {
        for (const auto& a : cfg.analyses) {
            json r;
            if (a == "track") {
                r["level"] = trace.level;
                r["points"] = trace.times.size();
                r["x_final"] = trace.x_level.back();
                r["file"] = "trace.csv";
                if (write_outputs) write_trace(trace, (out / "trace.csv").string());
            } else if (a == "fit") {
                Window w = default_window(cfg);
                try {
                    ShiftFit f = fit_shift(trace, cfg.fit_model, w.t0, w.t1);
                    r = shift_fit_json(f);
                    auto js = jackknife_shift(trace, cfg.fit_model, w.t0, w.t1);
                    r["jackknife"] = {{"a_mean", js.a_mean}, {"a_spread", js.a_spread}, {"c_spread", js.c_spread}};
                    if (cfg.assert_a.set) {
                        bool ok = f.a >= cfg.assert_a.t0 && f.a <= cfg.assert_a.t1;
                        r["assert_a"] = {{"range", {cfg.assert_a.t0, cfg.assert_a.t1}}, {"pass", ok}};
                        rep.assertions_passed = rep.assertions_passed && ok;
                    }
                    if (cfg.assert_c.set) {
                        bool ok = f.c >= cfg.assert_c.t0 && f.c <= cfg.assert_c.t1;
                        r["assert_c"] = {{"range", {cfg.assert_c.t0, cfg.assert_c.t1}}, {"pass", ok}};
                        rep.assertions_passed = rep.assertions_passed && ok;
                    }
                } catch (const std::exception& e) {
                    r["error"] = e.what();
                    rep.assertions_passed = false;
                }
            } else if (a == "moments") {
                auto ms = moments(tr, cfg.moment_m);
                std::string csv = "t,mass_p,I_exp,mu,sup_p";
                for (double m : ms.m_values) csv += ",I_m" + format_double(m);
                csv += "\n";
                double drift = 0.0;
                for (std::size_t k = 0; k < ms.times.size(); ++k) {
                    std::string row = csv_row({ms.times[k], ms.mass_p[k], ms.I_exp[k], ms.mu[k], ms.sup_p[k]});
                    row.pop_back();
                    for (std::size_t j = 0; j < ms.m_values.size(); ++j) row += "," + format_double(ms.I_m[j][k]);
                    csv += row + "\n";
                    drift = std::max(drift, std::abs(ms.mass_p[k] / ms.mass_p[0] - 1.0));
                }
                if (write_outputs) write_text(out / "moments.csv", csv);
                r["mass_drift"] = drift;
                r["tail_warning"] = ms.tail_warning;
                r["file"] = "moments.csv";
            } else if (a == "dissipation") {
                try {
                    require_beta2(tr, "dissipation");
                    double t = 100.0 * scheme_tol(tr);
                    auto m = dissipation_monotonicity(tr, t);
                    std::string csv = "t,energy,dissipation,nash_C1,mass\n";
                    for (const auto& d : m.records) csv += csv_row({d.t, d.energy, d.dissipation, d.nash_C1, d.mass});
                    if (write_outputs) write_text(out / "dissipation.csv", csv);
                    r["checked"] = m.checked;
                    r["energy_violations"] = m.energy_violations;
                    r["rate_violations"] = m.rate_violations;
                    r["tolerance"] = t;
                    r["decay_exponent"] = m.decay_exponent;
                    r["decay_r2"] = m.decay_r2;
                    r["file"] = "dissipation.csv";
                } catch (const std::exception& e) {
                    r["error"] = e.what();
                    rep.assertions_passed = false;
                }
            } else if (a == "project") {
                try {
                    auto ps = self_similar_project(tr, cfg.solver.beta, cfg.project_gamma);
                    std::string csv = "tau,t,alpha_hat,residual\n";
                    for (const auto& p : ps) csv += csv_row({p.tau, p.t, p.alpha_hat, p.residual});
                    if (write_outputs) write_text(out / "project.csv", csv);
                    if (!ps.empty()) {
                        r["alpha_hat"] = ps.back().alpha_hat;
                        r["residual"] = ps.back().residual;
                    }
                    r["samples"] = ps.size();
                    r["file"] = "project.csv";
                } catch (const std::exception& e) {
                    r["error"] = e.what();
                    rep.assertions_passed = false;
                }
            } else if (a == "order_probe") {
                // closed-form wave advanced in its own frame on h and h/2
                double b = std::max(cfg.solver.beta, 3.0);
                double err[2];
                for (int l = 0; l < 2; ++l) {
                    SolverConfig pc;
                    pc.beta = b;
                    pc.grid = Grid1D::with_spacing(-30.0, 30.0, cfg.solver.grid.h / (1 << l));
                    pc.dt = cfg.solver.time_step() / (1 << (2 * l));
                    pc.t_end = 1.0;
                    pc.frame = FrameSpec::linear(c_star(b));
                    pc.observer_stride = INT_MAX;
                    auto t2 = run(make_ic(IcSpec::profile(b), pc.grid), pc);
                    const Field& u = t2.snapshots.back();
                    double e = 0.0;
                    for (int i = 0; i < u.size(); ++i) e = std::max(e, std::abs(u.v[i] - phi_closed_form(b, u.x(i))));
                    err[l] = e;
                }
                r["beta"] = b;
                r["error_h"] = err[0];
                r["error_h2"] = err[1];
                r["observed_order"] = std::log2(err[0] / err[1]);
            } else if (a.rfind("verify-", 0) == 0) {
                try {
                    r = verify_identity(a.substr(7), cfg, tr);
                    rep.assertions_passed = rep.assertions_passed && r["pass"].get<bool>();
                } catch (const std::exception& e) {
                    r["error"] = e.what();
                    rep.assertions_passed = false;
                }
            }
            rep.results[a] = r;
        }
        if (write_outputs) {
            const Field& last = tr.snapshots.back();
            write_csv(last, (out / "final.csv").string());
        }
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (write_outputs) {
        write_text(out / "config.echo", rep.config_echo);
        write_text(out / "report.json", rep.to_json().dump(2) + "\n");
    }
    return rep;
}

// ---------------------------------------------------------------- sweep

std::vector<SweepRow> sweep(const KeyValues& base, const std::string& param, const std::vector<std::string>& values,
                            int jobs) {
    std::vector<SweepRow> rows(values.size());
    if (values.empty()) return rows;
    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(values.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= values.size()) return;
            SweepRow& row = rows[i];
            row.value = values[i];
            try {
                KeyValues kv = base;
                kv.set(param, values[i]);
                ExperimentConfig cfg = parse_experiment(kv);
                SolverConfig sc = cfg.solver;
                sc.observer_stride = INT_MAX;
                FrontTrace trace;
                Trajectory tr = run(make_ic(cfg.ic, sc.grid), sc,
                                    trace_observer(trace, sc.frame, cfg.snapshot_dt, cfg.track_level));
                if (tr.aborted) throw NumericalAbort(tr.abort_reason);
                Window w = default_window(cfg);
                row.t0 = w.t0;
                row.t1 = w.t1;
                row.c_star = c_star(sc.beta);
                ShiftFit f = fit_shift(trace, ShiftModel::pushed, w.t0, w.t1);
                row.c_fit = f.c;
                row.a_fit = f.a;
                row.a_at_cstar = fit_shift_fixed_speed(trace, row.c_star, w.t0, w.t1).a;
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& param) {
    std::string s = param + ",status,c_star,c_fit,a_fit,a_at_cstar,t0,t1,error\n";
    for (const auto& r : rows) {
        s += r.value + "," + (r.ok ? "ok" : "failed") + ",";
        if (r.ok) {
            std::string nums = csv_row({r.c_star, r.c_fit, r.a_fit, r.a_at_cstar, r.t0, r.t1});
            nums.pop_back();
            s += nums + ",";
        } else
            s += ",,,,,,";
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        s += err + "\n";
    }
    return s;
}

}  // namespace bfk
