#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "bfk/grid.hpp"

namespace bfk {

double c_star(double beta);
double phi_closed_form(double beta, double x);

enum class TailKind { exponential, linear_exponential };

struct TailDescriptor {
    TailKind kind = TailKind::exponential;
    double rate = 0.0;  // exponential: U ~ e^{-rate x}
    double A = 0.0;     // linear_exponential: U ~ (A x + B) e^{-x}
    double B = 0.0;
    double r2 = 0.0;
    double rms = 0.0;
    bool flagged = false;  // fit residual above threshold
};

struct WaveProfile {
    double beta = 0.0;
    double c = 0.0;
    Field samples;                                  // U(x), U(0) = 1/2
    std::vector<std::pair<double, double>> E_of_v;  // (v, U'(U^{-1}(v))) read off the orbit
    TailDescriptor tail;
    // the phase-plane orbit at the integrator's own step points, x normalized
    std::vector<double> orbit_x, orbit_U, orbit_V;

    // E(v) by interpolation of the orbit (V as a function of U)
    double E(double v) const;
};

struct NoWave : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShootOptions {
    double delta0 = 1e-8;
    double rtol = 1e-10;
    double atol = 1e-22;
    double sample_h = 0.01;
    int ev_points = 99;  // E_of_v on v = 1/(ev_points+1), ...
};

// phase-plane shooting: dU/dx = -V, dV/dx = (beta U - c) V + U(1-U)
WaveProfile shoot_wave(double beta, double c, double eps_stop = 1e-12, const ShootOptions& opt = {});

// monotone heteroclinic connection test used by the speed search
bool wave_exists(double beta, double c, const ShootOptions& opt = {});
double minimal_speed_search(double beta, double tol = 1e-5);

// profile assembled from the closed form 1/(1+e^{beta x/2}) (beta >= 2)
WaveProfile closed_form_profile(double beta, const Grid1D& grid);

TailDescriptor tail_fit(const WaveProfile& w, double u_lo = 1e-7, double u_hi = 1e-3);

// sup norm of -cU' + beta U U' - U'' - U + U^2 from a quintic spline of the samples
double wave_residual_sup(const WaveProfile& w, double margin = 0.5);

enum class Steepness { steeper, less_steep, incomparable };
const char* to_string(Steepness s);

Steepness wave_steepness(const WaveProfile& w1, const WaveProfile& w2, double tol = 1e-8);

struct SattingerLimits {
    double p_plus;
    double p_minus;
};
SattingerLimits sattinger_limits(double beta);

}  // namespace bfk
