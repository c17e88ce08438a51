#include "bfk/fronts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/tools/minima.hpp>

namespace bfk {

namespace {

struct LinearFit {
    Eigen::VectorXd coef;
    Eigen::MatrixXd cov;
    double rms = 0.0;
    double r2 = 0.0;
};

LinearFit least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double max_cond = 1e12) {
    const long n = A.rows(), p = A.cols();
    if (n < p + 1) throw IllConditioned("fit: fewer samples than coefficients");
    // column scaling before the conditioning test
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (long j = 0; j < p; ++j)
        if (!(scale(j) > 0)) throw IllConditioned("fit: degenerate basis column");
    Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cond = sv(0) / sv(p - 1);
    if (!(cond < max_cond)) throw IllConditioned("fit: ill-conditioned basis (window too short)");
    LinearFit f;
    Eigen::VectorXd cs = svd.solve(y);
    f.coef = cs.cwiseQuotient(scale);
    Eigen::VectorXd res = A * f.coef - y;
    double rss = res.squaredNorm();
    f.rms = std::sqrt(rss / n);
    double sst = (y.array() - y.mean()).square().sum();
    f.r2 = sst > 0 ? 1.0 - rss / sst : 1.0;
    double s2 = n > p ? rss / (n - p) : 0.0;
    Eigen::MatrixXd inv = (As.transpose() * As).inverse();
    f.cov = s2 * scale.cwiseInverse().asDiagonal() * inv * scale.cwiseInverse().asDiagonal();
    return f;
}

std::vector<std::size_t> window_indices(const FrontTrace& tr, double t0, double t1) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        if (tr.times[k] >= t0 && tr.times[k] <= t1) idx.push_back(k);
    return idx;
}

}  // namespace

// ---------------------------------------------------------------- tracking

FrontTrace track(const Trajectory& traj, double level) {
    if (!(level > 0 && level < 1)) throw std::invalid_argument("track: level must lie in (0,1)");
    FrontTrace tr;
    tr.level = level;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double x;
        try {
            x = level_crossing(traj.snapshots[k], level);
        } catch (const std::domain_error&) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "track: level lost at t=%.6g (front left the window)", traj.times[k]);
            throw LevelLost(buf);
        }
        tr.times.push_back(traj.times[k]);
        tr.x_level.push_back(x + traj.lab_offset(k));
    }
    return tr;
}

Observer trace_observer(FrontTrace& out, const FrameSpec& frame, double every, double level) {
    out.level = level;
    out.times.clear();
    out.x_level.clear();
    return [&out, frame, every, level, next = 0.0](const StepState& st, const Field& u) mutable {
        if (st.t + 1e-9 * every < next) return;
        double x;
        try {
            x = level_crossing(u, level);
        } catch (const std::domain_error&) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "track: level lost at t=%.6g (front left the window)", st.t);
            throw LevelLost(buf);
        }
        out.times.push_back(st.t);
        out.x_level.push_back(x + st.shift + frame.offset(st.t));
        next = (std::floor(st.t / every + 1e-9) + 1.0) * every;
    };
}

void write_trace(const FrontTrace& tr, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_trace: cannot open " + path);
    char buf[96];
    std::snprintf(buf, sizeof buf, "# level=%.17g\n", tr.level);
    os << buf << "t,x_level\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tr.times[k], tr.x_level[k]);
        os << buf;
    }
}

FrontTrace read_trace(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_trace: cannot open " + path);
    FrontTrace tr;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto p = line.find("level=");
            if (p != std::string::npos) tr.level = std::stod(line.substr(p + 6));
            continue;
        }
        if (line.rfind("t,", 0) == 0) continue;
        double t, x;
        if (std::sscanf(line.c_str(), "%lf,%lf", &t, &x) != 2)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed trace row");
        if (!tr.times.empty() && !(t > tr.times.back()))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": times not increasing");
        tr.times.push_back(t);
        tr.x_level.push_back(x);
    }
    return tr;
}

// ---------------------------------------------------------------- shift fits

const char* to_string(ShiftModel m) {
    switch (m) {
        case ShiftModel::pulled: return "pulled";
        case ShiftModel::pushmi_pullyu: return "pushmi_pullyu";
        case ShiftModel::pushed: return "pushed";
    }
    return "?";
}

ShiftModel parse_shift_model(const std::string& s) {
    if (s == "pulled") return ShiftModel::pulled;
    if (s == "pp" || s == "pushmi_pullyu") return ShiftModel::pushmi_pullyu;
    if (s == "pushed") return ShiftModel::pushed;
    throw std::invalid_argument("unknown model '" + s + "' (pulled|pp|pushed)");
}

namespace {

ShiftFit fit_shift_window(const FrontTrace& tr, ShiftModel model, double t0, double t1, double c_fixed = 2.0) {
    if (tr.times.empty() || t0 < tr.times.front() || t1 > tr.times.back())
        throw std::invalid_argument("fit_shift: window outside the trace");
    auto idx = window_indices(tr, t0, t1);
    const bool free_c = model == ShiftModel::pushed;
    const int p = free_c ? 4 : 3;
    Eigen::MatrixXd A(idx.size(), p);
    Eigen::VectorXd y(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        double t = tr.times[idx[j]];
        int c = 0;
        if (free_c) A(j, c++) = t;
        A(j, c++) = -std::log(t + 1.0);
        A(j, c++) = 1.0;
        A(j, c++) = 1.0 / std::sqrt(t + 1.0);
        y(j) = tr.x_level[idx[j]] - (free_c ? 0.0 : c_fixed * t);
    }
    LinearFit lf = least_squares(A, y);
    ShiftFit f;
    f.model = model;
    int c = 0;
    f.c = free_c ? lf.coef(c++) : c_fixed;
    f.a = lf.coef(c++);
    f.x_const = lf.coef(c++);
    f.b = lf.coef(c++);
    f.t0 = t0;
    f.t1 = t1;
    f.rms_residual = lf.rms;
    f.samples = static_cast<int>(idx.size());
    f.covariance = lf.cov;
    return f;
}

}  // namespace

ShiftFit fit_shift(const FrontTrace& tr, ShiftModel model, double t0, double t1) {
    if (!(t0 > 0 && t1 >= 10.0 * t0)) throw IllConditioned("fit_shift: window must span at least one decade in t");
    return fit_shift_window(tr, model, t0, t1);
}

ShiftFit fit_shift_fixed_speed(const FrontTrace& tr, double c, double t0, double t1) {
    if (!(t0 > 0 && t1 >= 10.0 * t0)) throw IllConditioned("fit_shift: window must span at least one decade in t");
    return fit_shift_window(tr, ShiftModel::pulled, t0, t1, c);
}

std::vector<std::pair<double, double>> jackknife_windows(double t0, double t1, int count) {
    // each window covers 60% of the log span; starts spread over the remaining 40%
    std::vector<std::pair<double, double>> w;
    const double L = std::log(t1 / t0);
    for (int k = 0; k < count; ++k) {
        double s = count > 1 ? 0.4 * L * k / (count - 1) : 0.0;
        w.emplace_back(t0 * std::exp(s), t0 * std::exp(s + 0.6 * L));
    }
    return w;
}

JackknifeSummary jackknife_shift(const FrontTrace& tr, ShiftModel model, double t0, double t1, int count) {
    JackknifeSummary js;
    double amin = 1e300, amax = -1e300, cmin = 1e300, cmax = -1e300;
    for (auto [a, b] : jackknife_windows(t0, t1, count)) {
        ShiftFit f;
        try {
            f = fit_shift_window(tr, model, a, b);
        } catch (const IllConditioned&) {
            continue;
        }
        js.fits.push_back(f);
        js.a_mean += f.a;
        js.c_mean += f.c;
        amin = std::min(amin, f.a);
        amax = std::max(amax, f.a);
        cmin = std::min(cmin, f.c);
        cmax = std::max(cmax, f.c);
    }
    if (!js.fits.empty()) {
        js.a_mean /= js.fits.size();
        js.c_mean /= js.fits.size();
        js.a_spread = amax - amin;
        js.c_spread = cmax - cmin;
    }
    return js;
}

MuBand mu_bounds_check(const FrontTrace& tr) {
    MuBand b;
    b.sup = -1e300;
    b.inf = 1e300;
    b.mu_min = 1e300;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        double t = tr.times[k];
        double mu = 2.0 * t - tr.x_level[k];
        b.mu_min = std::min(b.mu_min, mu);
        if (t < 1.0) continue;
        double d = mu - 0.5 * std::log(t);
        b.sup = std::max(b.sup, d);
        b.inf = std::min(b.inf, d);
        b.empty = false;
    }
    if (b.empty) return MuBand{};
    b.m0 = std::max(std::abs(b.sup), std::abs(b.inf));
    return b;
}

// ---------------------------------------------------------------- convergence to the wave

namespace {

// quintic spline of the wave samples with the end values held outside
class WaveEval {
public:
    explicit WaveEval(const WaveProfile& w)
        : sp_(w.samples.v, w.samples.grid.x_min, w.samples.grid.h),
          lo_(w.samples.grid.x_min + 3 * w.samples.grid.h),
          hi_(w.samples.grid.x_max - 3 * w.samples.grid.h),
          left_(w.samples.v.front()),
          right_(w.samples.v.back()) {}
    double operator()(double x) const {
        if (x < lo_) return left_;
        if (x > hi_) return right_;
        return sp_(x);
    }

private:
    boost::math::interpolators::cardinal_quintic_b_spline<double> sp_;
    double lo_, hi_, left_, right_;
};

double best_shift(const Field& u, double x_offset, const WaveEval& U, double* shift_out) {
    double xh = level_crossing(u, 0.5) + x_offset;  // U(0) = 1/2
    auto sup_dist = [&](double s) {
        double d = 0.0;
        for (int i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u.v[i] - U(u.x(i) + x_offset - s)));
        return d;
    };
    auto r = boost::math::tools::brent_find_minima(sup_dist, xh - 1.0, xh + 1.0, 50);
    if (shift_out) *shift_out = r.first;
    return r.second;
}

void fit_rates(const std::vector<double>& t, const std::vector<double>& d, double& omega, double& r2, double* ll_slope,
               double* ll_r2) {
    const std::size_t n = t.size();
    if (n < 3) return;
    Eigen::MatrixXd A(n, 2), B(n, 2);
    Eigen::VectorXd y(n);
    for (std::size_t k = 0; k < n; ++k) {
        A(k, 0) = t[k];
        A(k, 1) = 1.0;
        B(k, 0) = std::log(t[k]);
        B(k, 1) = 1.0;
        y(k) = std::log(std::max(d[k], 1e-300));
    }
    try {
        LinearFit f = least_squares(A, y);
        omega = -f.coef(0);
        r2 = f.r2;
    } catch (const IllConditioned&) {
    }
    if (!ll_slope) return;
    try {
        LinearFit f = least_squares(B, y);
        *ll_slope = f.coef(0);
        *ll_r2 = f.r2;
    } catch (const IllConditioned&) {
    }
}

}  // namespace

double best_shift_distance(const Field& u, double x_offset, const WaveProfile& wave, double* shift_out) {
    return best_shift(u, x_offset, WaveEval(wave), shift_out);
}

ConvergenceRate convergence_rate(const Trajectory& traj, const WaveProfile& wave, double t0, double t1) {
    ConvergenceRate cr;
    WaveEval U(wave);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double t = traj.times[k];
        if (t > t1) continue;
        double s;
        double d = best_shift(traj.snapshots[k], traj.lab_offset(k) - wave.c * t, U, &s);
        cr.all_times.push_back(t);
        cr.all_distance.push_back(d);
        if (t < t0) continue;
        cr.times.push_back(t);
        cr.distance.push_back(d);
        cr.shift.push_back(s);
    }
    const std::size_t n = cr.times.size();
    if (n == 0) return cr;
    cr.x_inf_hat = cr.shift.back();
    for (std::size_t k = 1; k < n; ++k)
        if (cr.distance[k] > 1.1 * cr.distance[k - 1] + 1e-14) cr.nonmonotone = true;
    fit_rates(cr.times, cr.distance, cr.omega_hat, cr.r2, &cr.loglog_slope, &cr.loglog_r2);

    // decay phase before the distance first stops decreasing (t >= 1)
    std::vector<double> et, ed;
    for (std::size_t k = 0; k < cr.all_times.size(); ++k) {
        if (cr.all_times[k] < 1.0) continue;
        if (!ed.empty() && cr.all_distance[k] >= ed.back()) break;
        et.push_back(cr.all_times[k]);
        ed.push_back(cr.all_distance[k]);
    }
    if (!et.empty()) cr.floor_time = et.back();
    fit_rates(et, ed, cr.omega_decay, cr.r2_decay, nullptr, nullptr);
    return cr;
}

WaveProfile discrete_wave(const SolverConfig& base, double relax_time) {
    if (base.beta < 2.0) throw std::invalid_argument("discrete_wave: needs beta >= 2");
    SolverConfig cfg = base;
    cfg.frame = FrameSpec::linear(c_star(base.beta));
    cfg.t_end = relax_time;
    cfg.observer_stride = 1 << 30;
    Trajectory tr = run(make_ic(IcSpec::profile(base.beta), cfg.grid), cfg);
    const Field& u = tr.snapshots.back();
    const std::size_t k = tr.size() - 1;
    double off = tr.lab_offset(k) - cfg.frame.c * tr.times[k];
    double xh = level_crossing(u, 0.5) + off;
    WaveProfile w;
    w.beta = base.beta;
    w.c = cfg.frame.c;
    w.samples = Field(Grid1D(u.grid.x_min + off - xh, u.grid.x_max + off - xh, u.grid.n), u.v);
    return w;
}

// ---------------------------------------------------------------- steepness

const char* to_string(FieldOrder o) {
    switch (o) {
        case FieldOrder::steeper: return "steeper";
        case FieldOrder::less_steep: return "less_steep";
        case FieldOrder::crossing: return "crossing";
    }
    return "?";
}

std::vector<double> level_slopes(const Field& u, const std::vector<double>& levels) {
    for (int i = 1; i < u.size(); ++i)
        if (u.v[i] > u.v[i - 1] + 1e-12) throw NonMonotone("steepness_order: input is not non-increasing");
    Field du = d1(u);
    std::vector<double> out;
    for (double v : levels) {
        double x = level_crossing(u, v);
        out.push_back(std::abs(du.at(x)));
    }
    return out;
}

SteepnessOrder steepness_order(const Field& u1, const Field& u2, double tol) {
    std::vector<double> levels;
    for (int k = 1; k <= 49; ++k) levels.push_back(0.02 * k);
    auto e1 = level_slopes(u1, levels);
    auto e2 = level_slopes(u2, levels);
    int above = 0, below = 0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        double d = e1[k] - e2[k];
        if (d > tol) ++above;
        else if (d < -tol) ++below;
    }
    SteepnessOrder so;
    const int n = static_cast<int>(levels.size());
    if (above == n) { so.order = FieldOrder::steeper; return so; }
    if (below == n) { so.order = FieldOrder::less_steep; return so; }
    // levels that break the majority ordering
    const bool maj_above = above >= below;
    so.v_lo = 1.0;
    so.v_hi = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        double d = e1[k] - e2[k];
        bool ok = maj_above ? d > tol : d < -tol;
        if (!ok) {
            so.v_lo = std::min(so.v_lo, levels[k]);
            so.v_hi = std::max(so.v_hi, levels[k]);
        }
    }
    return so;
}

// ---------------------------------------------------------------- higher-order coefficient

HigherOrderFit higher_order_fit(const FrontTrace& tr, double beta, double t0, double t1) {
    if (!(t0 > 0 && t1 >= 10.0 * t0)) throw IllConditioned("higher_order_fit: window must span at least one decade");
    const double a = 0.5 * bramson_r(beta);
    const bool crit = beta == 2.0;
    auto fit = [&](double w0, double w1, bool three) {
        auto idx = window_indices(tr, w0, w1);
        Eigen::MatrixXd A(idx.size(), three ? 3 : 2);
        Eigen::VectorXd y(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            double t = tr.times[idx[j]];
            double s = crit ? t : t + 1.0;
            A(j, 0) = 1.0;
            A(j, 1) = 1.0 / std::sqrt(s);
            if (three) A(j, 2) = std::log(s) / s;
            y(j) = tr.x_level[idx[j]] - 2.0 * t + a * std::log(s);
        }
        return least_squares(A, y, 1e14);
    };
    HigherOrderFit h;
    LinearFit f2 = fit(t0, t1, false);
    h.x_const = f2.coef(0);
    h.b_hat = f2.coef(1);
    LinearFit f3 = fit(t0, t1, true);
    h.x_const3 = f3.coef(0);
    h.b3 = f3.coef(1);
    h.logt_over_t_hat = f3.coef(2);
    // spread over sub-windows
    for (auto [w0, w1] : jackknife_windows(t0, t1, 5)) {
        try {
            h.jackknife_b.push_back(fit(w0, w1, false).coef(1));
        } catch (const IllConditioned&) {
        }
    }
    if (h.jackknife_b.size() >= 2) {
        double m = 0.0;
        for (double b : h.jackknife_b) m += b;
        m /= h.jackknife_b.size();
        double v = 0.0;
        for (double b : h.jackknife_b) v += (b - m) * (b - m);
        h.b_sigma = std::sqrt(v / (h.jackknife_b.size() - 1));
    }
    h.inconclusive = h.b_sigma > std::abs(h.b_hat);
    return h;
}

}  // namespace bfk
