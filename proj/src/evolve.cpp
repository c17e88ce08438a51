#include "bfk/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bfk {

using json = nlohmann::json;

double FrameSpec::offset(double t) const {
    switch (kind) {
        case FrameKind::lab: return 0.0;
        case FrameKind::linear: return c * t;
        case FrameKind::bramson: return c * t - 0.5 * r * std::log1p(t);
    }
    return 0.0;
}

double FrameSpec::speed(double t) const {
    switch (kind) {
        case FrameKind::lab: return 0.0;
        case FrameKind::linear: return c;
        case FrameKind::bramson: return c - 0.5 * r / (t + 1.0);
    }
    return 0.0;
}

std::string FrameSpec::describe() const {
    char buf[64];
    switch (kind) {
        case FrameKind::lab: return "lab";
        case FrameKind::linear: std::snprintf(buf, sizeof buf, "linear(%.17g)", c); return buf;
        case FrameKind::bramson: std::snprintf(buf, sizeof buf, "bramson(%.17g)", r); return buf;
    }
    return "lab";
}

double bramson_r(double beta) {
    if (beta < 2.0) return 3.0;
    if (beta == 2.0) return 1.0;
    throw std::invalid_argument("bramson_r: no logarithmic frame for beta > 2");
}

double default_dt(double h) { return std::min(0.4 * h * h, 0.01); }

double SolverConfig::time_step() const { return dt > 0 ? dt : default_dt(grid.h); }

void SolverConfig::validate() const {
    if (!(t_end >= 0)) throw std::invalid_argument("t_end must be non-negative");
    if (dt < 0) throw std::invalid_argument("dt must be positive");
    if (observer_stride < 1) throw std::invalid_argument("observer_stride must be >= 1");
    double k = time_step();
    double cmax = std::max(std::abs(frame.speed(0.0)), std::abs(frame.speed(1e30)));
    double bound = 0.5 * grid.h / (std::abs(beta) * 1.0 + cmax);
    if (k > bound) {
        std::ostringstream os;
        os << "CFL violation: dt=" << k << " exceeds 0.5*h/(|beta|+|c|)=" << bound;
        throw std::invalid_argument(os.str());
    }
}

// ---------------------------------------------------------------- stepping
//
// Linear part u_xx + s u_x + u in the frame of speed s is split as
//   (u_xx + 2u_x + u) + (s - 2) u_x.
// The first piece uses the exponentially fitted stencil
//   (e^h u_{i+1} - 2u_i + e^{-h} u_{i-1}) / h^2,
// exact on e^{-x}; with weights e^{x_i} every term below telescopes, so the
// discrete p = e^x u inherits the conservation structure of the continuum.

Stepper::Stepper(const SolverConfig& config) : cfg_(config) {
    cfg_.validate();
    dt_ = cfg_.time_step();
    h_ = cfg_.grid.h;
    const double h = h_;
    ep_ = std::exp(h);
    em_ = std::exp(-h);
    ehp_ = std::exp(0.5 * h);
    ehm_ = std::exp(-0.5 * h);
    zeta_ = 2.0 * std::sinh(0.5 * h) / h;
    kh_ = zeta_ * zeta_;
    sinhc_ = std::sinh(h) / h;
    const int m = cfg_.grid.n - 2;
    lower_.assign(m, 0.0);
    diag_.assign(m, 0.0);
    upper_.assign(m, 0.0);
    cp_.assign(m, 0.0);
    m_.assign(m, 0.0);
    work_.assign(cfg_.grid.n, 0.0);
    work2_.assign(cfg_.grid.n, 0.0);
    work3_.assign(cfg_.grid.n, 0.0);
}

void Stepper::build_linear(double s, double theta) {
    if (s == cached_s_ && theta == cached_theta_) return;
    const double h = h_, h2 = h * h;
    const double lo = em_ / h2 - (s - 2.0) * em_ / (2 * h);
    const double up = ep_ / h2 + (s - 2.0) * ep_ / (2 * h);
    const double di = -2.0 / h2 - (s - 2.0) * sinhc_;
    const int m = static_cast<int>(diag_.size());
    std::fill(lower_.begin(), lower_.end(), lo);
    std::fill(upper_.begin(), upper_.end(), up);
    std::fill(diag_.begin(), diag_.end(), di);
    // factor I - theta*dt*A
    const double k = theta * dt_;
    double b = 1.0 - k * di;
    m_[0] = 1.0 / b;
    cp_[0] = -k * up * m_[0];
    for (int i = 1; i < m; ++i) {
        double denom = b - (-k * lo) * cp_[i - 1];
        m_[i] = 1.0 / denom;
        cp_[i] = -k * up * m_[i];
    }
    cached_s_ = s;
    cached_theta_ = theta;
}

void Stepper::solve(std::vector<double>& d) {
    // d holds the interior right-hand side at indices 1..n-2
    const int m = static_cast<int>(diag_.size());
    const double a = -cached_theta_ * dt_ * lower_[0];
    d[1] = d[1] * m_[0];
    for (int i = 1; i < m; ++i) d[i + 1] = (d[i + 1] - a * d[i]) * m_[i];
    for (int i = m - 2; i >= 0; --i) d[i + 1] -= cp_[i] * d[i + 2];
}

void Stepper::explicit_rhs(const std::vector<double>& u, std::vector<double>& out) const {
    const int n = cfg_.grid.n;
    const double beta = cfg_.beta;
    if (cfg_.advection_form == AdvectionForm::conservative) {
        const double cf = beta * zeta_ / (2.0 * h_);
        const double ca = kh_ * (1.0 - 0.5 * beta);
        for (int i = 1; i < n - 1; ++i) {
            const double ui = u[i];
            out[i] = -cf * ui * (ehp_ * u[i + 1] - ehm_ * u[i - 1]) - ca * ui * ui;
        }
    } else {
        const double cf = beta / (2.0 * h_);
        for (int i = 1; i < n - 1; ++i) {
            const double ui = u[i];
            out[i] = -cf * ui * (u[i + 1] - u[i - 1]) - kh_ * ui * ui;
        }
    }
}

void Stepper::nonlinear_heun(std::vector<double>& u, double tau) {
    const int n = cfg_.grid.n;
    explicit_rhs(u, work_);
    std::vector<double>& us = work2_;
    us[0] = u[0];
    us[n - 1] = u[n - 1];
    for (int i = 1; i < n - 1; ++i) us[i] = u[i] + tau * work_[i];
    std::vector<double>& k2 = work3_;
    explicit_rhs(us, k2);
    for (int i = 1; i < n - 1; ++i) u[i] += 0.5 * tau * (work_[i] + k2[i]);
}

void Stepper::advance(std::vector<double>& u, double t) {
    const int n = cfg_.grid.n;
    const double uL = cfg_.left_value, uR = cfg_.right_value;
    u[0] = uL;
    u[n - 1] = uR;
    if (cfg_.scheme == Scheme::imex_bdf1) {
        build_linear(cfg_.frame.speed(t + dt_), 1.0);
        explicit_rhs(u, work_);
        std::vector<double>& d = work2_;
        for (int i = 1; i < n - 1; ++i) d[i] = u[i] + dt_ * work_[i];
        d[1] += dt_ * lower_[0] * uL;
        d[n - 2] += dt_ * upper_[0] * uR;
        solve(d);
        for (int i = 1; i < n - 1; ++i) u[i] = d[i];
    } else {
        nonlinear_heun(u, 0.5 * dt_);
        build_linear(cfg_.frame.speed(t + 0.5 * dt_), 0.5);
        std::vector<double>& d = work2_;
        const double k = 0.5 * dt_;
        const double lo = lower_[0], di = diag_[0], up = upper_[0];
        for (int i = 1; i < n - 1; ++i) d[i] = u[i] + k * (lo * u[i - 1] + di * u[i] + up * u[i + 1]);
        d[1] += k * lo * uL;
        d[n - 2] += k * up * uR;
        solve(d);
        for (int i = 1; i < n - 1; ++i) u[i] = d[i];
        nonlinear_heun(u, 0.5 * dt_);
    }
}

Field step(const Field& u, const SolverConfig& config, double t) {
    Stepper s(config);
    Field out = u;
    s.advance(out.v, t);
    if (!out.all_finite()) throw NumericalAbort("step: non-finite value");
    return out;
}

// ---------------------------------------------------------------- initial data

Field make_ic(const IcSpec& ic, const Grid1D& grid) {
    const double h = grid.h;
    const double w = 0.5 * kMollifyCells * h;  // ramp over [-w, w]
    switch (ic.kind) {
        case IcKind::heaviside:
            return Field::sample(grid, [&](double x) {
                if (x <= -w) return 1.0;
                if (x >= w) return 0.0;
                return (w - x) / (2 * w);
            });
        case IcKind::steep_sigmoid: {
            if (!(ic.gamma > 1.0)) throw std::invalid_argument("steep_sigmoid: gamma must exceed 1");
            auto s = [&](double x) { return 1.0 / (1.0 + std::exp(ic.gamma * (x - ic.a))); };
            const double sl = s(-w);
            return Field::sample(grid, [&](double x) {
                if (x <= -w) return s(x);
                if (x >= w) return 0.0;
                return sl * (w - x) / (2 * w);
            });
        }
        case IcKind::front_like: {
            if (!(ic.L2 > ic.L1)) throw std::invalid_argument("front_like: need L1 < L2");
            const double pi = std::acos(-1.0);
            return Field::sample(grid, [&](double x) {
                if (x <= ic.L1) return 1.0;
                if (x >= ic.L2) return 0.0;
                return 0.5 * (1.0 + std::cos(pi * (x - ic.L1) / (ic.L2 - ic.L1)));
            });
        }
        case IcKind::profile: {
            if (ic.beta < 2.0) throw std::invalid_argument("profile IC: closed form needs beta >= 2");
            return Field::sample(grid, [&](double x) {
                double y = 0.5 * ic.beta * (x - ic.a);
                return y > 0 ? std::exp(-y) / (1.0 + std::exp(-y)) : 1.0 / (1.0 + std::exp(y));
            });
        }
    }
    throw std::invalid_argument("make_ic: unknown kind");
}

// ---------------------------------------------------------------- driver

namespace {

bool regrid(std::vector<double>& u, const Grid1D& g, double trigger, double uL, double uR, double& shift) {
    const int n = g.n;
    if (!(u[0] > 0.5 && u[n - 1] < 0.5)) return false;
    Field tmp(g, u);
    double xl = level_crossing(tmp, 0.5);
    double margin = trigger * (g.x_max - g.x_min);
    if (xl - g.x_min >= margin && g.x_max - xl >= margin) return false;
    int j = static_cast<int>(std::lround(xl / g.h));
    if (j == 0) return false;
    std::vector<double> nu(n);
    for (int i = 0; i < n; ++i) {
        int k = i + j;
        nu[i] = k < 0 ? uL : (k >= n ? uR : u[k]);
    }
    u.swap(nu);
    shift += j * g.h;
    return true;
}

}  // namespace

Trajectory run(const Field& ic, const SolverConfig& config, const Observer& observer) {
    config.validate();
    if (!ic.grid.congruent(config.grid)) throw std::invalid_argument("run: IC grid differs from config grid");
    Trajectory tr;
    tr.frame = config.frame;
    tr.config = config;

    Field u = ic;
    StepState st;
    tr.times.push_back(0.0);
    tr.snapshots.push_back(u);
    tr.shifts.push_back(0.0);
    if (observer) observer(st, u);
    if (config.t_end <= 0) return tr;

    const double dt_req = config.time_step();
    const long nsteps = static_cast<long>(std::ceil(config.t_end / dt_req - 1e-9));
    SolverConfig cfg = config;
    cfg.dt = config.t_end / nsteps;
    tr.config.dt = cfg.dt;
    Stepper stepper(cfg);

    try {
        for (long k = 1; k <= nsteps; ++k) {
            stepper.advance(u.v, st.t);
            st.t = k * cfg.dt;
            st.steps = k;
            if ((k & 63) == 0 || k == nsteps) {
                for (double a : u.v)
                    if (!std::isfinite(a) || std::abs(a) > 1e6) throw NumericalAbort("non-finite or overflowing value");
            }
            if ((k & 15) == 0) regrid(u.v, cfg.grid, cfg.regrid_trigger, cfg.left_value, cfg.right_value, st.shift);
            if (observer) observer(st, u);
            if (k % cfg.observer_stride == 0 || k == nsteps) {
                tr.times.push_back(st.t);
                tr.snapshots.push_back(u);
                tr.shifts.push_back(st.shift);
            }
        }
    } catch (const NumericalAbort& e) {
        tr.aborted = true;
        tr.abort_reason = e.what();
    }
    return tr;
}

// ---------------------------------------------------------------- barriers

namespace {

double logistic_right(double y) {  // 1/(1+e^y), stable
    return y > 0 ? std::exp(-y) / (1.0 + std::exp(-y)) : 1.0 / (1.0 + std::exp(y));
}

double c_star_local(double beta) { return beta <= 2 ? 2.0 : 0.5 * beta + 2.0 / beta; }

void check_barrier(BarrierKind kind, const BarrierParams& p, double beta) {
    if (kind == BarrierKind::pulled_bound) {
        if (!(beta < 2.0)) throw std::invalid_argument("pulled_bound requires beta < 2");
        double amax = beta > 0 ? 2.0 / beta : INFINITY;
        if (!(p.A > 1.0 && p.A < amax)) throw std::invalid_argument("pulled_bound requires 1 < A < 2/beta");
    } else {
        if (!(beta > 2.0)) throw std::invalid_argument("pushed barriers require beta > 2");
        if (!(p.lambda > 2.0 / beta && p.lambda < 0.5 * beta))
            throw std::invalid_argument("pushed barriers require lambda in (2/beta, beta/2)");
        if (!(p.q0 > 0 && p.mu > 0 && p.K > 0)) throw std::invalid_argument("pushed barriers require q0, mu, K > 0");
    }
}

struct BarrierEval {
    Field value;
    Field dt;
};

BarrierEval barrier_eval(BarrierKind kind, const BarrierParams& p, double t, const Grid1D& g, double beta) {
    check_barrier(kind, p, beta);
    BarrierEval e{Field(g), Field(g)};
    if (kind == BarrierKind::pulled_bound) {
        for (int i = 0; i < g.n; ++i) {
            double s1 = logistic_right(g.x(i) - 2 * t - p.L);  // 1/(1+s)
            e.value.v[i] = p.A * s1;
            e.dt.v[i] = 2.0 * p.A * s1 * (1.0 - s1);
        }
        return e;
    }
    const double k = 0.5 * beta;
    const double emt = std::exp(-p.mu * t);
    const double xi = p.xi0 + p.K * p.q0 / p.mu * (1.0 - emt);
    const double dxi = p.K * p.q0 * emt;
    auto q = [&](double y) { return p.q0 * emt * std::min(std::exp(-p.lambda * y), 1.0); };
    for (int i = 0; i < g.n; ++i) {
        double z = g.x(i);
        if (kind == BarrierKind::pushed_upper) {
            double ph = logistic_right(k * (z - xi));
            double dph = -k * ph * (1 - ph);
            double qq = q(z - p.z0);
            e.value.v[i] = ph + qq;
            e.dt.v[i] = -dxi * dph - p.mu * qq;
        } else {
            double ph = logistic_right(k * (z + xi));
            double dph = -k * ph * (1 - ph);
            double qq = q(z + p.z0);
            e.value.v[i] = ph - qq;
            e.dt.v[i] = dxi * dph + p.mu * qq;
        }
    }
    return e;
}

}  // namespace

Field barrier_profile(BarrierKind kind, const BarrierParams& p, double t, const Grid1D& grid, double beta) {
    return barrier_eval(kind, p, t, grid, beta).value;
}

Field supersolution_residual(BarrierKind kind, const BarrierParams& p, double t, const Grid1D& grid, double beta) {
    auto e = barrier_eval(kind, p, t, grid, beta);
    const double c = kind == BarrierKind::pulled_bound ? 0.0 : c_star_local(beta);
    Field ux = d1(e.value), uxx = d2(e.value);
    Field r(grid);
    for (int i = 0; i < grid.n; ++i) {
        double u = e.value.v[i];
        r.v[i] = e.dt.v[i] - c * ux.v[i] + beta * u * ux.v[i] - uxx.v[i] - u * (1 - u);
    }
    return r;
}

// ---------------------------------------------------------------- checkpoints

namespace {

json frame_json(const FrameSpec& f) {
    json j;
    j["kind"] = f.kind == FrameKind::lab ? "lab" : (f.kind == FrameKind::linear ? "linear" : "bramson");
    j["c"] = f.c;
    j["r"] = f.r;
    return j;
}

FrameSpec frame_from_json(const json& j) {
    FrameSpec f;
    std::string k = j.at("kind");
    f.kind = k == "lab" ? FrameKind::lab : (k == "linear" ? FrameKind::linear : FrameKind::bramson);
    f.c = j.at("c");
    f.r = j.at("r");
    return f;
}

}  // namespace

void write_checkpoint(const Trajectory& traj, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json m;
    m["schema"] = 1;
    m["times"] = traj.times;
    m["shifts"] = traj.shifts;
    m["frame"] = frame_json(traj.frame);
    const auto& c = traj.config;
    m["config"] = {{"beta", c.beta},
                   {"dt", c.dt},
                   {"t_end", c.t_end},
                   {"grid", {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n", c.grid.n}}},
                   {"scheme", c.scheme == Scheme::imex_bdf1 ? "imex_bdf1" : "strang"},
                   {"advection_form", c.advection_form == AdvectionForm::conservative ? "conservative" : "nonconservative"},
                   {"regrid_trigger", c.regrid_trigger},
                   {"observer_stride", c.observer_stride}};
    m["aborted"] = traj.aborted;
    if (traj.aborted) m["abort_reason"] = traj.abort_reason;
    std::vector<std::string> files;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.csv", k);
        write_csv(traj.snapshots[k], (fs::path(dir) / name).string());
        files.emplace_back(name);
    }
    m["snapshots"] = files;
    std::ofstream os(fs::path(dir) / "manifest.json");
    os << m.dump(2) << "\n";
}

Trajectory read_checkpoint(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream is(fs::path(dir) / "manifest.json");
    if (!is) throw std::runtime_error("no manifest in " + dir);
    json m = json::parse(is);
    Trajectory tr;
    tr.times = m.at("times").get<std::vector<double>>();
    tr.shifts = m.at("shifts").get<std::vector<double>>();
    tr.frame = frame_from_json(m.at("frame"));
    const auto& c = m.at("config");
    tr.config.beta = c.at("beta");
    tr.config.dt = c.at("dt");
    tr.config.t_end = c.at("t_end");
    tr.config.grid = Grid1D(c["grid"]["x_min"], c["grid"]["x_max"], c["grid"]["n"].get<int>());
    tr.config.scheme = c.at("scheme") == "strang" ? Scheme::strang : Scheme::imex_bdf1;
    tr.config.advection_form =
        c.at("advection_form") == "nonconservative" ? AdvectionForm::nonconservative : AdvectionForm::conservative;
    tr.config.regrid_trigger = c.at("regrid_trigger");
    tr.config.observer_stride = c.at("observer_stride");
    tr.config.frame = tr.frame;
    tr.aborted = m.value("aborted", false);
    for (const auto& f : m.at("snapshots")) tr.snapshots.push_back(read_csv((fs::path(dir) / f.get<std::string>()).string()));
    return tr;
}

}  // namespace bfk
