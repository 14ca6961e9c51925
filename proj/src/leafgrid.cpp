#include "leafflow/leafgrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace leafflow {

namespace {

void check_resolution(int n, const char* what) {
    if (n < 8)
        throw std::invalid_argument(std::string(what) + ": resolution must be >= 8, got " +
                                    std::to_string(n));
}

void check_length(double l, const char* what) {
    if (!(l > 0.0))
        throw std::invalid_argument(std::string(what) + ": length must be positive, got " +
                                    std::to_string(l));
}

}  // namespace

std::shared_ptr<const LeafGrid> LeafGrid::circle(double length, int n) {
    check_length(length, "circle");
    check_resolution(n, "circle");
    auto g = std::shared_ptr<LeafGrid>(new LeafGrid());
    g->topology_ = Topology::Circle;
    g->nx_ = n;
    g->ny_ = 1;
    g->lx_ = length;
    g->ly_ = 0.0;
    g->hx_ = length / n;
    g->hy_ = 0.0;
    return g;
}

std::shared_ptr<const LeafGrid> LeafGrid::torus(double length_x, double length_y, int nx,
                                                int ny) {
    check_length(length_x, "torus");
    check_length(length_y, "torus");
    check_resolution(nx, "torus");
    check_resolution(ny, "torus");
    auto g = std::shared_ptr<LeafGrid>(new LeafGrid());
    g->topology_ = Topology::Torus2;
    g->nx_ = nx;
    g->ny_ = ny;
    g->lx_ = length_x;
    g->ly_ = length_y;
    g->hx_ = length_x / nx;
    g->hy_ = length_y / ny;
    return g;
}

std::shared_ptr<const LeafGrid> LeafGrid::interval(double length, int n, double boundary_lo,
                                                   double boundary_hi) {
    check_length(length, "interval");
    check_resolution(n, "interval");
    auto g = std::shared_ptr<LeafGrid>(new LeafGrid());
    g->topology_ = Topology::Interval;
    g->nx_ = n;
    g->ny_ = 1;
    g->lx_ = length;
    g->hx_ = length / (n - 1);
    g->bc_lo_ = boundary_lo;
    g->bc_hi_ = boundary_hi;
    return g;
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* where) {
    if (!a.grid() || !b.grid() || !a.grid()->same_grid(*b.grid()))
        throw std::invalid_argument(std::string(where) + ": fields live on different grids");
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("ScalarField: null grid");
    if (static_cast<int>(values_.size()) != grid_->point_count())
        throw std::invalid_argument("ScalarField: value count does not match grid");
    if (!all_finite(values_)) throw std::invalid_argument("ScalarField: non-finite value");
}

ScalarField::ScalarField(GridPtr grid, double constant)
    : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("ScalarField: null grid");
    if (!std::isfinite(constant)) throw std::invalid_argument("ScalarField: non-finite value");
    values_.assign(grid_->point_count(), constant);
}

ScalarField ScalarField::from_function(const GridPtr& grid,
                                       const std::function<double(double, double)>& f) {
    std::vector<double> v(grid->point_count());
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i) v[grid->index(i, j)] = f(grid->x(i), grid->y(j));
    return ScalarField(grid, std::move(v));
}

VectorField::VectorField(GridPtr grid, std::vector<std::vector<double>> components)
    : grid_(std::move(grid)), comps_(std::move(components)) {
    if (!grid_) throw std::invalid_argument("VectorField: null grid");
    if (static_cast<int>(comps_.size()) != grid_->leaf_dim())
        throw std::invalid_argument("VectorField: component count does not match leaf dim");
    for (const auto& c : comps_) {
        if (static_cast<int>(c.size()) != grid_->point_count())
            throw std::invalid_argument("VectorField: component size does not match grid");
        if (!all_finite(c)) throw std::invalid_argument("VectorField: non-finite value");
    }
}

VectorField::VectorField(GridPtr grid) : grid_(std::move(grid)) {
    comps_.assign(grid_->leaf_dim(), std::vector<double>(grid_->point_count(), 0.0));
}

ScalarField laplacian(const ScalarField& f) {
    const LeafGrid& g = *f.grid();
    std::vector<double> out(g.point_count(), 0.0);
    const auto& v = f.values();
    switch (g.topology()) {
        case Topology::Circle: {
            const int n = g.nx();
            const double ih2 = 1.0 / (g.hx() * g.hx());
            for (int i = 0; i < n; ++i) {
                const int ip = (i + 1 == n) ? 0 : i + 1;
                const int im = (i == 0) ? n - 1 : i - 1;
                out[i] = (v[ip] - 2.0 * v[i] + v[im]) * ih2;
            }
            break;
        }
        case Topology::Torus2: {
            const int nx = g.nx(), ny = g.ny();
            const double ihx2 = 1.0 / (g.hx() * g.hx());
            const double ihy2 = 1.0 / (g.hy() * g.hy());
            for (int j = 0; j < ny; ++j) {
                const int jp = (j + 1 == ny) ? 0 : j + 1;
                const int jm = (j == 0) ? ny - 1 : j - 1;
                for (int i = 0; i < nx; ++i) {
                    const int ip = (i + 1 == nx) ? 0 : i + 1;
                    const int im = (i == 0) ? nx - 1 : i - 1;
                    const int c = g.index(i, j);
                    out[c] = (v[g.index(ip, j)] - 2.0 * v[c] + v[g.index(im, j)]) * ihx2 +
                             (v[g.index(i, jp)] - 2.0 * v[c] + v[g.index(i, jm)]) * ihy2;
                }
            }
            break;
        }
        case Topology::Interval: {
            // Boundary entries hold Dirichlet data and are not evolved;
            // their laplacian slots stay zero.
            const int n = g.nx();
            const double ih2 = 1.0 / (g.hx() * g.hx());
            for (int i = 1; i + 1 < n; ++i)
                out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * ih2;
            break;
        }
    }
    return ScalarField(f.grid(), std::move(out));
}

VectorField leaf_gradient(const ScalarField& f) {
    const LeafGrid& g = *f.grid();
    VectorField out(f.grid());
    const auto& v = f.values();
    switch (g.topology()) {
        case Topology::Circle: {
            const int n = g.nx();
            const double ih = 1.0 / g.hx();
            auto& c0 = out.comp(0);
            for (int i = 0; i < n; ++i) {
                const int ip = (i + 1 == n) ? 0 : i + 1;
                c0[i] = (v[ip] - v[i]) * ih;
            }
            break;
        }
        case Topology::Torus2: {
            const int nx = g.nx(), ny = g.ny();
            const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
            auto& cx = out.comp(0);
            auto& cy = out.comp(1);
            for (int j = 0; j < ny; ++j) {
                const int jp = (j + 1 == ny) ? 0 : j + 1;
                for (int i = 0; i < nx; ++i) {
                    const int ip = (i + 1 == nx) ? 0 : i + 1;
                    const int c = g.index(i, j);
                    cx[c] = (v[g.index(ip, j)] - v[c]) * ihx;
                    cy[c] = (v[g.index(i, jp)] - v[c]) * ihy;
                }
            }
            break;
        }
        case Topology::Interval: {
            const int n = g.nx();
            const double ih = 1.0 / g.hx();
            auto& c0 = out.comp(0);
            for (int i = 0; i + 1 < n; ++i) c0[i] = (v[i + 1] - v[i]) * ih;
            c0[n - 1] = 0.0;  // padding, no wrap
            break;
        }
    }
    return out;
}

ScalarField leaf_divergence(const VectorField& x) {
    const LeafGrid& g = *x.grid();
    std::vector<double> out(g.point_count(), 0.0);
    switch (g.topology()) {
        case Topology::Circle: {
            const int n = g.nx();
            const double ih = 1.0 / g.hx();
            const auto& c0 = x.comp(0);
            for (int i = 0; i < n; ++i) {
                const int im = (i == 0) ? n - 1 : i - 1;
                out[i] = (c0[i] - c0[im]) * ih;
            }
            break;
        }
        case Topology::Torus2: {
            const int nx = g.nx(), ny = g.ny();
            const double ihx = 1.0 / g.hx(), ihy = 1.0 / g.hy();
            const auto& cx = x.comp(0);
            const auto& cy = x.comp(1);
            for (int j = 0; j < ny; ++j) {
                const int jm = (j == 0) ? ny - 1 : j - 1;
                for (int i = 0; i < nx; ++i) {
                    const int im = (i == 0) ? nx - 1 : i - 1;
                    out[g.index(i, j)] = (cx[g.index(i, j)] - cx[g.index(im, j)]) * ihx +
                                         (cy[g.index(i, j)] - cy[g.index(i, jm)]) * ihy;
                }
            }
            break;
        }
        case Topology::Interval: {
            const int n = g.nx();
            const double ih = 1.0 / g.hx();
            const auto& c0 = x.comp(0);
            for (int i = 1; i + 1 < n; ++i) out[i] = (c0[i] - c0[i - 1]) * ih;
            break;
        }
    }
    return ScalarField(x.grid(), std::move(out));
}

double inner_product_l2(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f, g, "inner_product_l2");
    const LeafGrid& grid = *f.grid();
    const auto& a = f.values();
    const auto& b = g.values();
    double sum = 0.0;
    if (grid.periodic()) {
        for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
        return sum * grid.cell_measure();
    }
    // trapezoid rule on the interval
    const int n = grid.nx();
    sum = 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
    for (int i = 1; i + 1 < n; ++i) sum += a[i] * b[i];
    return sum * grid.hx();
}

double norm_l2(const ScalarField& f) { return std::sqrt(inner_product_l2(f, f)); }

double norm_inf(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

std::pair<double, double> field_extrema(const ScalarField& f) {
    auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
    return {*lo, *hi};
}

double leaf_volume(const LeafGrid& g) {
    if (g.topology() == Topology::Torus2) return g.length_x() * g.length_y();
    return g.length_x();
}

double field_mean(const ScalarField& f) {
    return inner_product_l2(f, ScalarField(f.grid(), 1.0)) / leaf_volume(*f.grid());
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "operator+");
    std::vector<double> v(a.values());
    for (size_t i = 0; i < v.size(); ++i) v[i] += b[i];
    return ScalarField(a.grid(), std::move(v));
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "operator-");
    std::vector<double> v(a.values());
    for (size_t i = 0; i < v.size(); ++i) v[i] -= b[i];
    return ScalarField(a.grid(), std::move(v));
}

ScalarField operator*(double s, const ScalarField& a) {
    std::vector<double> v(a.values());
    for (double& x : v) x *= s;
    return ScalarField(a.grid(), std::move(v));
}

ScalarField pointwise_multiply(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "pointwise_multiply");
    std::vector<double> v(a.values());
    for (size_t i = 0; i < v.size(); ++i) v[i] *= b[i];
    return ScalarField(a.grid(), std::move(v));
}

ScalarField pointwise_divide(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "pointwise_divide");
    std::vector<double> v(a.values());
    for (size_t i = 0; i < v.size(); ++i) v[i] /= b[i];
    return ScalarField(a.grid(), std::move(v));
}

ScalarField map_field(const ScalarField& a, const std::function<double(double)>& f) {
    std::vector<double> v(a.values());
    for (double& x : v) x = f(x);
    return ScalarField(a.grid(), std::move(v));
}

}  // namespace leafflow
