#include "bfk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace bfk {

Grid1D::Grid1D(double xmin, double xmax, int nodes) : x_min(xmin), x_max(xmax), n(nodes) {
    if (nodes < 3) throw std::invalid_argument("Grid1D: need at least 3 nodes");
    if (!(xmax > xmin)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
    if (xmin > 0.0 || xmax < 0.0) throw std::invalid_argument("Grid1D: origin outside [x_min, x_max]");
    h = (xmax - xmin) / (nodes - 1);
}

Grid1D Grid1D::with_spacing(double xmin, double xmax, double spacing) {
    if (!(spacing > 0)) throw std::invalid_argument("Grid1D: spacing must be positive");
    int cells = static_cast<int>(std::llround((xmax - xmin) / spacing));
    return Grid1D(xmin, xmin + cells * spacing, cells + 1);
}

Field::Field(const Grid1D& g, std::vector<double> vals) : grid(g), v(std::move(vals)) {
    if (static_cast<int>(v.size()) != g.n) throw std::invalid_argument("Field: size mismatch");
}

bool Field::all_finite() const {
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

bool Field::in_class_w(double tol) const {
    for (int i = 0; i < grid.n; ++i) {
        if (v[i] < -tol || v[i] > 1.0 + tol) return false;
        if (i > 0 && v[i] > v[i - 1] + tol) return false;
    }
    return true;
}

double Field::at(double x) const {
    double s = (x - grid.x_min) / grid.h;
    if (s <= 0) return v.front();
    if (s >= grid.n - 1) return v.back();
    int i = static_cast<int>(s);
    double w = s - i;
    return (1 - w) * v[i] + w * v[i + 1];
}

Field d1(const Field& f, DiffScheme scheme, int sign) {
    const int n = f.size();
    const double h = f.grid.h;
    Field out(f.grid);
    const auto& u = f.v;
    if (scheme == DiffScheme::central) {
        for (int i = 1; i < n - 1; ++i) out.v[i] = (u[i + 1] - u[i - 1]) / (2 * h);
    } else if (sign > 0) {
        for (int i = 1; i < n - 1; ++i) out.v[i] = (u[i] - u[i - 1]) / h;
    } else {
        for (int i = 1; i < n - 1; ++i) out.v[i] = (u[i + 1] - u[i]) / h;
    }
    out.v[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h);
    out.v[n - 1] = (3 * u[n - 1] - 4 * u[n - 2] + u[n - 3]) / (2 * h);
    return out;
}

Field d2(const Field& f) {
    const int n = f.size();
    const double h2 = f.grid.h * f.grid.h;
    Field out(f.grid);
    const auto& u = f.v;
    for (int i = 1; i < n - 1; ++i) out.v[i] = (u[i + 1] - 2 * u[i] + u[i - 1]) / h2;
    if (n >= 4) {
        out.v[0] = (2 * u[0] - 5 * u[1] + 4 * u[2] - u[3]) / h2;
        out.v[n - 1] = (2 * u[n - 1] - 5 * u[n - 2] + 4 * u[n - 3] - u[n - 4]) / h2;
    } else {
        out.v[0] = out.v[n - 1] = out.v[1];
    }
    return out;
}

double integrate(const Field& f, double a, double b) {
    const auto& g = f.grid;
    const double eps = 1e-12 * (g.x_max - g.x_min);
    if (a < g.x_min - eps || b > g.x_max + eps || a > b)
        throw std::out_of_range("integrate: limits outside the grid");
    a = std::max(a, g.x_min);
    b = std::min(b, g.x_max);
    if (a == b) return 0.0;
    // full cells strictly inside, plus partial cells at each end
    double sa = (a - g.x_min) / g.h, sb = (b - g.x_min) / g.h;
    int ia = std::min(static_cast<int>(std::floor(sa)), g.n - 2);
    int ib = std::min(static_cast<int>(std::floor(sb)), g.n - 2);
    auto lerp = [&](double s) {
        int i = std::min(static_cast<int>(std::floor(s)), g.n - 2);
        double w = s - i;
        return (1 - w) * f.v[i] + w * f.v[i + 1];
    };
    if (ia == ib) return 0.5 * (lerp(sa) + lerp(sb)) * (b - a);
    double total = 0.5 * (lerp(sa) + f.v[ia + 1]) * (g.x(ia + 1) - a);
    for (int i = ia + 1; i < ib; ++i) total += 0.5 * (f.v[i] + f.v[i + 1]) * g.h;
    total += 0.5 * (f.v[ib] + lerp(sb)) * (b - g.x(ib));
    return total;
}

double integrate(const Field& f) {
    double s = 0.5 * (f.v.front() + f.v.back());
    for (int i = 1; i < f.size() - 1; ++i) s += f.v[i];
    return s * f.grid.h;
}

TailIntegral tail_integral_checked(const Field& f, double tol) {
    TailIntegral r{Field(f.grid), std::abs(f.v.back()) > tol};
    const double h = f.grid.h;
    for (int i = f.size() - 2; i >= 0; --i) r.F.v[i] = r.F.v[i + 1] + 0.5 * h * (f.v[i] + f.v[i + 1]);
    return r;
}

Field tail_integral(const Field& f, double tol) { return tail_integral_checked(f, tol).F; }

Field cumulative_integral(const Field& f) {
    Field F(f.grid);
    const double h = f.grid.h;
    for (int i = 1; i < f.size(); ++i) F.v[i] = F.v[i - 1] + 0.5 * h * (f.v[i] + f.v[i - 1]);
    return F;
}

double level_crossing(const Field& f, double level) {
    const int n = f.size();
    if (!(f.v.front() > level && f.v.back() < level))
        throw std::domain_error("level_crossing: level not bracketed");
    // first node at or below level; for monotone data this is the unique bracket
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (f.v[mid] > level) lo = mid; else hi = mid;
    }
    double a = f.v[lo], b = f.v[hi];
    double w = (a - level) / (a - b);
    return f.x(lo) + w * f.grid.h;
}

void write_csv(const Field& f, std::ostream& os) {
    os << std::setprecision(17);
    os << "# grid x_min=" << f.grid.x_min << " x_max=" << f.grid.x_max << " n=" << f.grid.n << "\n";
    for (int i = 0; i < f.size(); ++i) os << f.x(i) << "," << f.v[i] << "\n";
}

void write_csv(const Field& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_csv(f, os);
}

Field read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
    double xmin = 0, xmax = 0;
    int n = 0;
    if (std::sscanf(line.c_str(), "# grid x_min=%lf x_max=%lf n=%d", &xmin, &xmax, &n) != 3)
        throw std::runtime_error("read_csv: bad header: " + line);
    Grid1D g(xmin, xmax, n);
    std::vector<double> vals;
    vals.reserve(n);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("read_csv: bad row: " + line);
        vals.push_back(std::stod(line.substr(comma + 1)));
    }
    return Field(g, std::move(vals));
}

Field read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    return read_csv(is);
}

}  // namespace bfk
