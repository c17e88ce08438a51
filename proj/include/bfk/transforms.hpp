#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bfk/evolve.hpp"
#include "bfk/grid.hpp"

namespace bfk {

// v = exp(Gamma) u, Gamma = x + (beta/2) int_x^inf u; x measured as grid x + x_offset
Field hopf_cole(const Field& u_tilde, double beta, double x_offset = 0.0);
// pointwise inversion of hopf_cole (right-to-left sweep, Newton on each node)
Field hopf_cole_inverse(const Field& v, double beta, double x_offset = 0.0);

struct ResidualSample {
    double t;
    double sup_positive;  // sup of the positive part of the residual
    double sup_abs;
};

// v_t - v_xx + k(t) (v_x - v) on interior snapshots, with k = 2 - frame speed.
// Time derivatives are centered differences over neighbouring snapshots.
std::vector<ResidualSample> hopf_cole_residual(const Trajectory& traj, double beta, double t_min = 0.0,
                                               double t_max = 1e300, double x_lo = -1e300, double x_hi = 1e300);

Field g_functional(const Field& u_tilde, double beta);

// p = e^x u in log space
Field p_field(const Field& u_hat, double x_offset = 0.0);

struct MomentSeries {
    std::vector<double> times;
    std::vector<double> mass_p;
    std::vector<double> I_exp;
    std::vector<double> m_values;
    std::vector<std::vector<double>> I_m;  // I_m[j][k]: moment m_values[j] at time k
    std::vector<double> mu;
    std::vector<double> sup_p;
    bool tail_warning = false;
};

// offset of the speed-2 frame coordinate from the grid coordinate at snapshot k
double linear2_offset(const Trajectory& traj, std::size_t k);

MomentSeries moments(const Trajectory& traj, const std::vector<double>& m_list = {});

struct ProjectionSample {
    double tau;
    double t;
    double alpha_hat;
    double residual;  // relative weighted L2 norm of the orthogonal part
};

std::vector<ProjectionSample> self_similar_project(const Trajectory& traj, double beta, double gamma_cut = 0.25);
// projection of samples omega(eta) on the principal eigenfunction; the core used above
ProjectionSample project_profile(const std::vector<double>& eta, const std::vector<double>& omega, double beta,
                                 double eta_min);

struct DissipationRecord {
    double t = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double nash_C1 = 0.0;
    double mass = 0.0;  // weighted L1 norm, int phi rho = int p
};

inline constexpr double kRhoFloor = 1e-8;

DissipationRecord dissipation_pair(const Field& u_hat, double x_offset = 0.0, double rho_floor = kRhoFloor);

struct MonotonicityReport {
    int checked = 0;
    int energy_violations = 0;
    int rate_violations = 0;
    double worst_energy_excess = 0.0;
    double worst_rate_excess = 0.0;
    double decay_exponent = 0.0;  // fitted slope of log energy vs log t on the late window
    double decay_r2 = 0.0;
    std::vector<DissipationRecord> records;
};

MonotonicityReport dissipation_monotonicity(const Trajectory& traj, double tolerance, double fit_t0 = 50.0,
                                            double fit_t1 = 400.0, double t_min = 0.0);

// minimal C1 with rbb <= C1 max(1, rb^2) r over the nodes where r > 0
double nash_constant(const Field& r);

Field weighted_rearrangement(const Field& phi, const Field& r, int subcells = 8);

struct NashCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double C1 = 0.0;
};
NashCheck nash_check(const Field& phi, const Field& r, double theta);

struct MomentIdentity {
    double phi_exact = 0.0;    // Phi(r) from the initial datum
    double phi_1 = 0.0;        // time quadrature over the stored snapshots
    double tail_bound = 0.0;   // analytic bound on the truncated part of the time integral
    double L = 0.0;            // u <= 1/(1+e^{x-2t-L}) measured at the reference snapshot
    double rel_error = 0.0;    // |Phi_1 - Phi| / Phi
    double rel_budget = 0.0;   // tail_bound / Phi
};

struct TruncationTail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// throws TruncationTail when tail_bound / Phi exceeds budget_limit
MomentIdentity moment_transform_identity(const Trajectory& traj, double r, double beta, double t_ref = 1.0,
                                         double budget_limit = 0.01);

}  // namespace bfk
