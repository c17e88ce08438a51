#include "bfk/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace bfk {

namespace {

double trapz(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return s;
}

// trapezoid over nodes [i0, i1]
double trapz_range(const std::vector<double>& f, double h, int i0, int i1) {
    if (i1 <= i0) return 0.0;
    double s = 0.5 * (f[i0] + f[i1]);
    for (int i = i0 + 1; i < i1; ++i) s += f[i];
    return s * h;
}

double safe_exp(double a) {
    if (a > 709.0) throw std::overflow_error("exponential weight overflows");
    return std::exp(a);
}

}  // namespace

// ---------------------------------------------------------------- Hopf-Cole

Field hopf_cole(const Field& u, double beta, double x_offset) {
    Field T = tail_integral(u);
    Field v(u.grid);
    for (int i = 0; i < u.size(); ++i) {
        if (u.v[i] <= 0.0) continue;
        double lg = u.x(i) + x_offset + 0.5 * beta * T.v[i] + std::log(u.v[i]);
        v.v[i] = safe_exp(lg);
    }
    return v;
}

Field hopf_cole_inverse(const Field& v, double beta, double x_offset) {
    const int n = v.size();
    const double h = v.grid.h;
    const double k = 0.25 * beta * h;
    Field u(v.grid);
    double T = 0.0;
    u.v[n - 1] = v.v[n - 1] > 0 ? std::exp(std::log(v.v[n - 1]) - v.x(n - 1) - x_offset) : 0.0;
    for (int i = n - 2; i >= 0; --i) {
        // u_i = v_i exp(-x_i - (beta/2)(T_{i+1} + h/2 (u_{i+1} + u_i)))
        double y = 0.0;
        if (v.v[i] > 0) {
            double la = std::log(v.v[i]) - v.x(i) - x_offset - 0.5 * beta * (T + 0.5 * h * u.v[i + 1]);
            double a = std::exp(la);
            y = a;
            for (int it = 0; it < 100; ++it) {
                double e = a * std::exp(-k * y);
                double F = y - e, dF = 1.0 + k * e;
                double dy = F / dF;
                y -= dy;
                if (std::abs(dy) <= 1e-16 * std::max(1.0, std::abs(y))) break;
            }
        }
        u.v[i] = y;
        T += 0.5 * h * (u.v[i] + u.v[i + 1]);
    }
    return u;
}

std::vector<ResidualSample> hopf_cole_residual(const Trajectory& traj, double beta, double t_min, double t_max,
                                               double x_lo, double x_hi) {
    if (beta > 2.0) throw std::invalid_argument("hopf_cole_residual: requires beta <= 2");
    const FrameSpec& f = traj.frame;
    const bool lin2 = f.kind == FrameKind::linear && f.c == 2.0;
    if (!lin2 && f.kind != FrameKind::bramson) throw std::invalid_argument("hopf_cole_residual: frame mismatch");
    std::vector<ResidualSample> out;
    const std::size_t N = traj.size();
    if (N < 3) return out;
    const Grid1D& g = traj.snapshots[0].grid;
    const double h = g.h;
    Field vm, v0, vp;
    std::size_t have = 0;  // index of v0 currently cached
    for (std::size_t k = 1; k + 1 < N; ++k) {
        double t = traj.times[k];
        if (t < t_min || t > t_max) continue;
        if (traj.shifts[k - 1] != traj.shifts[k] || traj.shifts[k + 1] != traj.shifts[k]) continue;
        if (have == k) {
            vm = std::move(v0);
            v0 = std::move(vp);
        } else {
            vm = hopf_cole(traj.snapshots[k - 1], beta, traj.shifts[k - 1]);
            v0 = hopf_cole(traj.snapshots[k], beta, traj.shifts[k]);
        }
        vp = hopf_cole(traj.snapshots[k + 1], beta, traj.shifts[k + 1]);
        have = k + 1;
        const double kk = 2.0 - f.speed(t);
        const double dtt = traj.times[k + 1] - traj.times[k - 1];
        ResidualSample s{t, 0.0, 0.0};
        for (int i = 2; i < g.n - 2; ++i) {
            double x = g.x(i) + traj.shifts[k];
            if (x < x_lo || x > x_hi) continue;
            double vt = (vp.v[i] - vm.v[i]) / dtt;
            double vx = (v0.v[i + 1] - v0.v[i - 1]) / (2 * h);
            double vxx = (v0.v[i + 1] - 2 * v0.v[i] + v0.v[i - 1]) / (h * h);
            double r = vt - vxx + kk * (vx - v0.v[i]);
            s.sup_positive = std::max(s.sup_positive, r);
            s.sup_abs = std::max(s.sup_abs, std::abs(r));
        }
        out.push_back(s);
    }
    return out;
}

Field g_functional(const Field& u, double beta) {
    Field w(u.grid);
    for (int i = 0; i < u.size(); ++i) w.v[i] = u.v[i] * (1.0 - u.v[i]);
    Field T = tail_integral(w);
    Field G(u.grid);
    for (int i = 0; i < u.size(); ++i) G.v[i] = u.v[i] - 0.5 * beta * T.v[i];
    return G;
}

// ---------------------------------------------------------------- p and moments

Field p_field(const Field& u, double x_offset) {
    Field p(u.grid);
    for (int i = 0; i < u.size(); ++i)
        if (u.v[i] > 0) p.v[i] = safe_exp(u.x(i) + x_offset + std::log(u.v[i]));
    return p;
}

double linear2_offset(const Trajectory& traj, std::size_t k) { return traj.lab_offset(k) - 2.0 * traj.times[k]; }

MomentSeries moments(const Trajectory& traj, const std::vector<double>& m_list) {
    MomentSeries ms;
    ms.m_values = m_list;
    ms.I_m.assign(m_list.size(), {});
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Field& u = traj.snapshots[k];
        const double o = linear2_offset(traj, k);
        const double t = traj.times[k];
        Field p = p_field(u, o);
        double mass = integrate(p);
        double xl = level_crossing(u, 0.5) + traj.lab_offset(k);
        double mu = 2.0 * t - xl;
        // I(t) = int u(t, x + 2t - mu) e^x dx, integrated on the mu-shifted coordinate
        std::vector<double> w(u.size());
        for (int i = 0; i < u.size(); ++i)
            w[i] = u.v[i] > 0 ? safe_exp(u.x(i) + o + mu + std::log(u.v[i])) : 0.0;
        double I = trapz_range(w, u.grid.h, 0, u.size() - 1);
        for (std::size_t j = 0; j < m_list.size(); ++j) {
            const double m = m_list[j];
            for (int i = 0; i < u.size(); ++i) {
                if (u.v[i] <= 0) { w[i] = 0; continue; }
                double y = u.x(i) + o, lu = std::log(u.v[i]);
                w[i] = safe_exp((1 + m) * y + lu) + safe_exp((1 - m) * y + lu);
            }
            double Im = trapz_range(w, u.grid.h, 0, u.size() - 1);
            if (std::max(w.front(), w.back()) > 1e-10 * std::max(Im, 1e-300)) ms.tail_warning = true;
            ms.I_m[j].push_back(Im);
        }
        ms.times.push_back(t);
        ms.mass_p.push_back(mass);
        ms.I_exp.push_back(I);
        ms.mu.push_back(mu);
        ms.sup_p.push_back(*std::max_element(p.v.begin(), p.v.end()));
    }
    return ms;
}

// ---------------------------------------------------------------- self-similar projection

ProjectionSample project_profile(const std::vector<double>& eta, const std::vector<double>& omega, double beta,
                                 double eta_min) {
    std::vector<double> xs, om, psi, wgt, num, den, sq;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        double e = eta[i];
        if (e < eta_min || e > 3.0) continue;
        double g = std::exp(-0.25 * e * e);
        xs.push_back(e);
        om.push_back(omega[i]);
        psi.push_back(beta < 2.0 ? e * g : g);
        wgt.push_back(1.0 / g);
        num.push_back(omega[i] * psi.back() * wgt.back());
        den.push_back(psi.back() * psi.back() * wgt.back());
        sq.push_back(omega[i] * omega[i] * wgt.back());
    }
    ProjectionSample s{0, 0, 0, 0};
    if (xs.size() < 8) throw std::runtime_error("self_similar_project: eta range under-resolved");
    double a = trapz(xs, num) / trapz(xs, den);
    std::vector<double> res(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double d = om[i] - a * psi[i];
        res[i] = d * d * wgt[i];
    }
    double nrm = trapz(xs, sq);
    s.alpha_hat = a;
    s.residual = nrm > 0 ? std::sqrt(trapz(xs, res) / nrm) : 0.0;
    return s;
}

std::vector<ProjectionSample> self_similar_project(const Trajectory& traj, double beta, double gamma_cut) {
    if (traj.frame.kind != FrameKind::bramson) throw std::invalid_argument("self_similar_project: needs the bramson frame");
    if (beta > 2.0) throw std::invalid_argument("self_similar_project: requires beta <= 2");
    std::vector<ProjectionSample> out;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double t = traj.times[k];
        if (t <= 0) continue;
        const Field& u = traj.snapshots[k];
        double sq = std::sqrt(t + 1.0);
        if (u.grid.x_max + traj.shifts[k] < 3.0 * sq) continue;  // window does not reach eta = 3
        double tau = std::log(t + 1.0);
        Field v = hopf_cole(u, beta, traj.shifts[k]);
        std::vector<double> eta(u.size()), om(u.size());
        double scale = beta < 2.0 ? std::exp(-0.5 * tau) : 1.0;
        for (int i = 0; i < u.size(); ++i) {
            eta[i] = (u.x(i) + traj.shifts[k]) / sq;
            om[i] = v.v[i] * scale;
        }
        double eta_min = beta < 2.0 ? std::exp(-(0.5 - gamma_cut) * tau) : 0.0;
        ProjectionSample s;
        try {
            s = project_profile(eta, om, beta, eta_min);
        } catch (const std::runtime_error&) {
            continue;
        }
        s.tau = tau;
        s.t = t;
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------- dissipation and Nash

double nash_constant(const Field& r) {
    const int n = r.size();
    int i0 = 0;
    while (i0 < n && !(r.v[i0] > 0)) ++i0;
    if (i0 >= n - 1) return 0.0;
    const double h = r.grid.h;
    double rb = 0.0, rbb = 0.0, C1 = 0.0;
    for (int i = i0 + 1; i < n; ++i) {
        double rb_new = rb + 0.5 * h * (r.v[i] + r.v[i - 1]);
        rbb += 0.5 * h * (rb + rb_new);
        rb = rb_new;
        if (r.v[i] > 0) C1 = std::max(C1, rbb / (std::max(1.0, rb * rb) * r.v[i]));
    }
    return C1;
}

DissipationRecord dissipation_pair(const Field& u, double x_offset, double rho_floor) {
    const int n = u.size();
    const double h = u.grid.h;
    Field p = p_field(u, x_offset);
    DissipationRecord d;
    // rho = 1 - u is non-decreasing for monotone u; keep the right interval where rho >= floor
    int i0 = n;
    for (int i = n - 1; i >= 0; --i) {
        if (1.0 - u.v[i] >= rho_floor) i0 = i; else break;
    }
    if (i0 >= n - 2) return d;
    std::vector<double> e(n, 0.0), dd(n, 0.0), phi(n, 0.0), pm(n, 0.0);
    for (int i = i0; i < n; ++i) {
        double rho = 1.0 - u.v[i];
        phi[i] = p.v[i] / rho;
        e[i] = phi[i] * phi[i] * rho;
        pm[i] = p.v[i];
    }
    for (int i = i0 + 1; i < n - 1; ++i) {
        double px = (phi[i + 1] - phi[i - 1]) / (2 * h);
        dd[i] = px * px * (1.0 - u.v[i]);
    }
    d.energy = trapz_range(e, h, i0, n - 1);
    d.dissipation = trapz_range(dd, h, i0 + 1, n - 2);
    d.mass = trapz_range(pm, h, i0, n - 1);
    Field rho(u.grid);
    for (int i = i0; i < n; ++i) rho.v[i] = 1.0 - u.v[i];
    d.nash_C1 = nash_constant(rho);
    return d;
}

MonotonicityReport dissipation_monotonicity(const Trajectory& traj, double tolerance, double fit_t0, double fit_t1,
                                            double t_min) {
    MonotonicityReport rep;
    if (traj.size() < 2) return rep;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.times[k] < t_min) continue;
        auto r = dissipation_pair(traj.snapshots[k], linear2_offset(traj, k));
        r.t = traj.times[k];
        rep.records.push_back(r);
    }
    for (std::size_t k = 1; k < rep.records.size(); ++k) {
        const auto& a = rep.records[k - 1];
        const auto& b = rep.records[k];
        ++rep.checked;
        double excess = b.energy - a.energy;
        rep.worst_energy_excess = std::max(rep.worst_energy_excess, excess);
        if (excess > tolerance) ++rep.energy_violations;
        double rate = (b.energy - a.energy) / (b.t - a.t);
        double bound = -(a.dissipation + b.dissipation);  // -2 * mean dissipation
        double rex = rate - bound;
        rep.worst_rate_excess = std::max(rep.worst_rate_excess, rex);
        if (rex > tolerance) ++rep.rate_violations;
    }
    std::vector<double> lx, ly;
    for (const auto& r : rep.records)
        if (r.t >= fit_t0 && r.t <= fit_t1 && r.energy > 0) {
            lx.push_back(std::log(r.t));
            ly.push_back(std::log(r.energy));
        }
    if (lx.size() >= 3) {
        Eigen::MatrixXd A(lx.size(), 2);
        Eigen::VectorXd y(lx.size());
        for (std::size_t i = 0; i < lx.size(); ++i) {
            A(i, 0) = lx[i];
            A(i, 1) = 1.0;
            y(i) = ly[i];
        }
        Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
        Eigen::VectorXd res = A * c - y;
        double sst = (y.array() - y.mean()).square().sum();
        rep.decay_exponent = c(0);
        rep.decay_r2 = sst > 0 ? 1.0 - res.squaredNorm() / sst : 1.0;
    }
    return rep;
}

Field weighted_rearrangement(const Field& phi, const Field& r, int subcells) {
    if (!phi.grid.congruent(r.grid)) throw std::invalid_argument("weighted_rearrangement: grid mismatch");
    const int n = phi.size();
    const double h = phi.grid.h;
    const double hs = h / subcells;
    struct Piece {
        double value, mass;
    };
    std::vector<Piece> pieces;
    pieces.reserve(static_cast<std::size_t>(n - 1) * subcells);
    for (int i = 0; i + 1 < n; ++i)
        for (int s = 0; s < subcells; ++s) {
            double w = (s + 0.5) / subcells;
            double val = (1 - w) * phi.v[i] + w * phi.v[i + 1];
            double rr = (1 - w) * r.v[i] + w * r.v[i + 1];
            pieces.push_back({val, rr * hs});
        }
    std::stable_sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.value > b.value; });
    // centers of the sorted pieces on the mass axis
    std::vector<double> center(pieces.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
        center[j] = acc + 0.5 * pieces[j].mass;
        acc += pieces[j].mass;
    }
    Field out(phi.grid);
    double rb = 0.0;
    std::size_t j = 0;
    for (int i = 0; i < n; ++i) {
        if (i > 0) rb += 0.5 * h * (r.v[i] + r.v[i - 1]);
        while (j + 1 < center.size() && center[j + 1] < rb) ++j;
        if (rb <= center.front()) out.v[i] = pieces.front().value;
        else if (j + 1 >= center.size()) out.v[i] = pieces.back().value;
        else {
            double w = (rb - center[j]) / (center[j + 1] - center[j]);
            out.v[i] = (1 - w) * pieces[j].value + w * pieces[j + 1].value;
        }
    }
    return out;
}

NashCheck nash_check(const Field& phi, const Field& r, double theta) {
    if (!phi.grid.congruent(r.grid)) throw std::invalid_argument("nash_check: grid mismatch");
    if (!(theta > 0)) throw std::invalid_argument("nash_check: theta must be positive");
    for (int i = 0; i < r.size(); ++i) {
        if (!(r.v[i] > 0)) throw std::invalid_argument("nash_check: weight must be positive");
        if (i > 0 && r.v[i] < r.v[i - 1]) throw std::invalid_argument("nash_check: weight must be non-decreasing");
    }
    const int n = phi.size();
    Field dphi = d1(phi);
    std::vector<double> a(n), b(n), c(n);
    for (int i = 0; i < n; ++i) {
        a[i] = phi.v[i] * phi.v[i] * r.v[i];
        b[i] = phi.v[i] * r.v[i];
        c[i] = dphi.v[i] * dphi.v[i] * r.v[i];
    }
    const double h = phi.grid.h;
    NashCheck out;
    out.C1 = nash_constant(r);
    double l1 = trapz_range(b, h, 0, n - 1);
    out.lhs = trapz_range(a, h, 0, n - 1);
    out.rhs = 2.0 / theta * l1 * l1 + 8.0 * out.C1 * std::max(1.0, theta * theta) * trapz_range(c, h, 0, n - 1);
    return out;
}

// ---------------------------------------------------------------- moment identity

MomentIdentity moment_transform_identity(const Trajectory& traj, double r, double beta, double t_ref,
                                         double budget_limit) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("moment_transform_identity: r must lie in (0,1)");
    if (beta > 2.0) throw std::invalid_argument("moment_transform_identity: requires beta <= 2");
    if (traj.size() < 2) throw std::invalid_argument("moment_transform_identity: trajectory too short");
    const double pi = std::acos(-1.0);
    MomentIdentity m;

    auto log_moment = [&](std::size_t k, int power) {
        const Field& u = traj.snapshots[k];
        const double off = traj.lab_offset(k);
        // scale by the right end to keep exponents moderate
        const double xr = u.grid.x_max;
        std::vector<double> w(u.size());
        for (int i = 0; i < u.size(); ++i) {
            double uu = power == 2 ? u.v[i] * u.v[i] : u.v[i];
            w[i] = uu * std::exp(r * (u.x(i) - xr));
        }
        double s = trapz_range(w, u.grid.h, 0, u.size() - 1);
        double left = power == 2 ? u.v[0] * u.v[0] : u.v[0];
        s += left * std::exp(r * (u.grid.x_min - xr)) / r;  // u = left value beyond the window
        return std::log(s) + r * (xr + off);
    };

    m.phi_exact = std::exp(log_moment(0, 1));
    std::vector<double> ts, f;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double t = traj.times[k];
        ts.push_back(t);
        f.push_back(std::exp(log_moment(k, 2) - (r * r + 1.0) * t));
    }
    const double pref = 1.0 - 0.5 * r * beta;
    m.phi_1 = pref * trapz(ts, f);

    // L from the snapshot nearest t_ref: u <= 1/(1 + e^{x - 2t - L}) there and after
    std::size_t kr = 0;
    for (std::size_t k = 0; k < traj.size(); ++k)
        if (std::abs(traj.times[k] - t_ref) < std::abs(traj.times[kr] - t_ref)) kr = k;
    const Field& u = traj.snapshots[kr];
    const double tr = traj.times[kr];
    double L = -1e300;
    for (int i = 1; i + 1 < u.size(); ++i) {
        double uu = u.v[i];
        if (!(uu > 1e-14 && uu < 1.0 - 1e-12)) continue;
        double X = u.x(i) + traj.lab_offset(kr);
        L = std::max(L, X - 2.0 * tr - std::log(1.0 / uu - 1.0));
    }
    m.L = L;
    const double T = ts.back();
    const double I0 = pi / std::sin(pi * r);
    if (T >= tr)
        m.tail_bound = pref * I0 * std::exp(r * L - (1 - r) * (1 - r) * T) / ((1 - r) * (1 - r));
    else
        m.tail_bound = INFINITY;
    m.rel_error = std::abs(m.phi_1 - m.phi_exact) / m.phi_exact;
    m.rel_budget = m.tail_bound / m.phi_exact;
    if (!(m.rel_budget <= budget_limit)) throw TruncationTail("moment_transform_identity: truncation tail above tolerance");
    return m;
}

}  // namespace bfk
