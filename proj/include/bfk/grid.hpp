#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace bfk {

struct Grid1D {
    double x_min = -1.0;
    double x_max = 1.0;
    int n = 3;
    double h = 1.0;

    Grid1D() = default;
    Grid1D(double xmin, double xmax, int nodes);

    // grid with spacing h covering [xmin, xmax] (xmax rounded to a node)
    static Grid1D with_spacing(double xmin, double xmax, double spacing);

    double x(int i) const { return x_min + i * h; }
    bool congruent(const Grid1D& o) const { return n == o.n && h == o.h && x_min == o.x_min; }
};

struct Field {
    Grid1D grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(const Grid1D& g, double fill = 0.0) : grid(g), v(g.n, fill) {}
    Field(const Grid1D& g, std::vector<double> vals);

    template <class F>
    static Field sample(const Grid1D& g, F&& f) {
        Field out(g);
        for (int i = 0; i < g.n; ++i) out.v[i] = f(g.x(i));
        return out;
    }

    int size() const { return grid.n; }
    double x(int i) const { return grid.x(i); }
    double operator[](int i) const { return v[i]; }
    double& operator[](int i) { return v[i]; }

    bool all_finite() const;
    // class W check: range [0,1] and non-increasing, both with tolerance
    bool in_class_w(double tol = 1e-10) const;
    // linear interpolation, constant extension outside the grid
    double at(double x) const;
};

enum class DiffScheme { central, upwind };

// upwind: sign > 0 uses backward differences (information from the left)
Field d1(const Field& f, DiffScheme scheme = DiffScheme::central, int sign = 1);
Field d2(const Field& f);

double integrate(const Field& f, double a, double b);
double integrate(const Field& f);

struct TailIntegral {
    Field F;
    bool tail_warning = false;
};
TailIntegral tail_integral_checked(const Field& f, double tol = 1e-10);
Field tail_integral(const Field& f, double tol = 1e-10);

// running integral from x_min
Field cumulative_integral(const Field& f);

double level_crossing(const Field& f, double level);

void write_csv(const Field& f, std::ostream& os);
void write_csv(const Field& f, const std::string& path);
Field read_csv(std::istream& is);
Field read_csv(const std::string& path);

}  // namespace bfk
