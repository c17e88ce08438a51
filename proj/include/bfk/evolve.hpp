#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bfk/grid.hpp"

namespace bfk {

enum class FrameKind { lab, linear, bramson };

struct FrameSpec {
    FrameKind kind = FrameKind::lab;
    double c = 0.0;  // linear: frame speed
    double r = 3.0;  // bramson: log coefficient

    static FrameSpec lab() { return {}; }
    static FrameSpec linear(double c) { return {FrameKind::linear, c, 0.0}; }
    static FrameSpec bramson(double r) { return {FrameKind::bramson, 2.0, r}; }

    // frame origin in lab coordinates, and its velocity
    double offset(double t) const;
    double speed(double t) const;
    std::string describe() const;
    bool operator==(const FrameSpec& o) const { return kind == o.kind && c == o.c && r == o.r; }
};

// r(beta): 3 below the critical value, 1 at it
double bramson_r(double beta);

enum class Scheme { imex_bdf1, strang };
enum class AdvectionForm { conservative, nonconservative };

struct SolverConfig {
    double beta = 0.0;
    double dt = 0.0;  // 0 -> default min(0.4 h^2, 0.01)
    double t_end = 0.0;
    Grid1D grid{-50.0, 200.0, 5001};
    Scheme scheme = Scheme::imex_bdf1;
    AdvectionForm advection_form = AdvectionForm::conservative;
    FrameSpec frame;
    double regrid_trigger = 0.05;  // fraction of the window
    int observer_stride = 1000;
    double left_value = 1.0;
    double right_value = 0.0;

    double time_step() const;
    // throws std::invalid_argument when the explicit part violates the advection CFL bound
    void validate() const;
};

double default_dt(double h);

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    std::vector<double> shifts;  // accumulated re-grid shift, frame coordinate = grid x + shift
    FrameSpec frame;
    SolverConfig config;
    bool aborted = false;
    std::string abort_reason;

    std::size_t size() const { return times.size(); }
    // lab position of grid node x at snapshot k is x + lab_offset(k)
    double lab_offset(std::size_t k) const { return shifts[k] + frame.offset(times[k]); }
    double frame_offset(std::size_t k) const { return shifts[k]; }
};

struct StepState {
    double t = 0.0;
    double shift = 0.0;
    long steps = 0;
};

using Observer = std::function<void(const StepState&, const Field&)>;

enum class IcKind { heaviside, steep_sigmoid, front_like, profile };

struct IcSpec {
    IcKind kind = IcKind::heaviside;
    double gamma = 1.5;  // steep_sigmoid
    double a = 0.0;
    double L1 = -5.0;  // front_like
    double L2 = 0.0;
    double beta = 2.0;  // profile: closed-form wave phi_beta shifted by a

    static IcSpec heaviside() { return {}; }
    static IcSpec steep_sigmoid(double gamma, double a) { IcSpec s; s.kind = IcKind::steep_sigmoid; s.gamma = gamma; s.a = a; return s; }
    static IcSpec front_like(double L1, double L2) { IcSpec s; s.kind = IcKind::front_like; s.L1 = L1; s.L2 = L2; return s; }
    static IcSpec profile(double beta, double shift = 0.0) { IcSpec s; s.kind = IcKind::profile; s.beta = beta; s.a = shift; return s; }
};

// jumps are mollified by a linear ramp over this many cells
inline constexpr int kMollifyCells = 2;

Field make_ic(const IcSpec& ic, const Grid1D& grid);

// one time step from time t to t + dt; throws NumericalAbort on NaN or overflow
Field step(const Field& u, const SolverConfig& config, double t = 0.0);

struct NumericalAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// time-stepping with re-gridding; snapshots every observer_stride steps (and at t_end).
// The observer, when given, is called after every step.
Trajectory run(const Field& ic, const SolverConfig& config, const Observer& observer = {});

// a reusable stepper; keeps factorization and scratch buffers between steps
class Stepper {
public:
    explicit Stepper(const SolverConfig& config);
    void advance(std::vector<double>& u, double t);  // t is the time at the start of the step
    double dt() const { return dt_; }

private:
    void build_linear(double s, double theta);
    void explicit_rhs(const std::vector<double>& u, std::vector<double>& out) const;
    void nonlinear_heun(std::vector<double>& u, double tau);
    void solve(std::vector<double>& rhs);

    SolverConfig cfg_;
    double dt_;
    double h_;
    double cached_s_ = 1e300, cached_theta_ = -1;
    std::vector<double> lower_, diag_, upper_;  // operator A on interior nodes
    std::vector<double> cp_, m_;                // Thomas factorization of I - theta dt A
    std::vector<double> work_, work2_, work3_;
    double ep_, em_, ehp_, ehm_, zeta_, kh_, sinhc_;
};

enum class BarrierKind { pulled_bound, pushed_upper, pushed_lower };

struct BarrierParams {
    // pulled_bound
    double A = 1.2;
    double L = 0.0;
    // pushed barriers
    double lambda = 1.0;
    double q0 = 0.01;
    double mu = 0.01;
    double K = 50.0;
    double z0 = 0.0;
    double xi0 = 0.0;
};

// pointwise residual of the candidate under the evolution operator; analytic time
// derivative, finite differences in space. pulled_bound uses lab coordinates,
// the pushed barriers the frame moving at c_*(beta).
Field supersolution_residual(BarrierKind kind, const BarrierParams& p, double t, const Grid1D& grid, double beta);
Field barrier_profile(BarrierKind kind, const BarrierParams& p, double t, const Grid1D& grid, double beta);

// checkpoint directory: snap_<k>.csv plus manifest.json
void write_checkpoint(const Trajectory& traj, const std::string& dir);
Trajectory read_checkpoint(const std::string& dir);

}  // namespace bfk
