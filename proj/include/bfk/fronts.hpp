#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bfk/evolve.hpp"
#include "bfk/waves.hpp"

namespace bfk {

struct FrontTrace {
    std::vector<double> times;
    std::vector<double> x_level;  // lab frame
    double level = 0.5;
};

struct LevelLost : std::runtime_error {
    using std::runtime_error::runtime_error;
};

FrontTrace track(const Trajectory& traj, double level = 0.5);
// records the level position every `every` time units during run(); throws LevelLost
Observer trace_observer(FrontTrace& out, const FrameSpec& frame, double every, double level = 0.5);

void write_trace(const FrontTrace& tr, const std::string& path);
FrontTrace read_trace(const std::string& path);

enum class ShiftModel { pulled, pushmi_pullyu, pushed };
const char* to_string(ShiftModel m);
ShiftModel parse_shift_model(const std::string& s);  // pulled | pp | pushmi_pullyu | pushed

// x_level(t) = c t - a log(t+1) + x_const + b / sqrt(t+1)
struct ShiftFit {
    ShiftModel model = ShiftModel::pulled;
    double c = 2.0;
    double a = 0.0;
    double x_const = 0.0;
    double b = 0.0;
    double t0 = 0.0, t1 = 0.0;
    double rms_residual = 0.0;
    int samples = 0;
    Eigen::MatrixXd covariance;  // over the free coefficients, in the order (c,) a, x_const, b
};

struct IllConditioned : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// c fixed to 2 for pulled / pushmi_pullyu, free for pushed
ShiftFit fit_shift(const FrontTrace& tr, ShiftModel model, double t0, double t1);

// c held at the given value (e.g. c_* of the run), a, x_const and b fitted
ShiftFit fit_shift_fixed_speed(const FrontTrace& tr, double c, double t0, double t1);

// five overlapping windows inside [t0, t1], equally spaced in log t
std::vector<std::pair<double, double>> jackknife_windows(double t0, double t1, int count = 5);

struct JackknifeSummary {
    std::vector<ShiftFit> fits;
    double a_mean = 0.0, a_spread = 0.0;  // spread = max - min
    double c_mean = 0.0, c_spread = 0.0;
};
JackknifeSummary jackknife_shift(const FrontTrace& tr, ShiftModel model, double t0, double t1, int count = 5);

struct MuBand {
    bool empty = true;
    double sup = 0.0;  // of mu(t) - (1/2) log t, t >= 1
    double inf = 0.0;
    double m0 = 0.0;   // max(|sup|, |inf|)
    double mu_min = 0.0;
};
// mu(t) = 2t - x_level(t)
MuBand mu_bounds_check(const FrontTrace& tr);

struct ConvergenceRate {
    std::vector<double> times;
    std::vector<double> distance;  // best-shift sup distance
    std::vector<double> shift;     // minimizing shift: u(t, x) ~ U(x - c t - shift)
    double omega_hat = 0.0;        // -slope of log d vs t over the window
    double r2 = 0.0;
    double loglog_slope = 0.0;     // slope of log d vs log t over the window
    double loglog_r2 = 0.0;
    double x_inf_hat = 0.0;
    bool nonmonotone = false;      // d increased by more than 10% between stored times in the window
    // the whole series up to t1, and the rate over its initial strictly decaying stretch (t >= 1)
    std::vector<double> all_times, all_distance;
    double floor_time = 0.0;
    double omega_decay = 0.0;
    double r2_decay = 0.0;
};

ConvergenceRate convergence_rate(const Trajectory& traj, const WaveProfile& wave, double t0, double t1);
// the scheme's own traveling wave: the closed-form profile relaxed in the frame moving at c_*
WaveProfile discrete_wave(const SolverConfig& base, double relax_time = 150.0);
// min over s of sup_x |u(x) - U(x - s)|, x in lab-frame coordinates relative to c t
double best_shift_distance(const Field& u, double x_offset, const WaveProfile& wave, double* shift_out = nullptr);

enum class FieldOrder { steeper, less_steep, crossing };
const char* to_string(FieldOrder o);

struct SteepnessOrder {
    FieldOrder order = FieldOrder::crossing;
    double v_lo = 0.0, v_hi = 0.0;  // levels where the ordering fails, when crossing
};

struct NonMonotone : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// compares |u'| at matching levels v = 0.02, ..., 0.98
SteepnessOrder steepness_order(const Field& u1, const Field& u2, double tol = 1e-10);
std::vector<double> level_slopes(const Field& u, const std::vector<double>& levels);

struct HigherOrderFit {
    double b_hat = 0.0;        // two-term fit (x_const, b) with c and a fixed
    double b_sigma = 0.0;      // jackknife standard deviation
    double x_const = 0.0;
    bool inconclusive = false;
    // three-term fit (x_const, b, d) with the (log s)/s term included
    double x_const3 = 0.0;
    double b3 = 0.0;
    double logt_over_t_hat = 0.0;
    std::vector<double> jackknife_b;
};

// beta = 2 uses s = t, beta < 2 uses s = t + 1, matching the two published expansions
HigherOrderFit higher_order_fit(const FrontTrace& tr, double beta, double t0, double t1);

}  // namespace bfk
