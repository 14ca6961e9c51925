#ifndef LEAFFLOW_LEAFGRID_HPP
#define LEAFFLOW_LEAFGRID_HPP

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace leafflow {

enum class Topology { Circle, Torus2, Interval };

/// Uniform discretization of a model leaf: a circle of length L, a flat
/// 2-torus, or an interval with fixed Dirichlet boundary data.  Periodic
/// topologies carry no boundary points; the interval stores its two
/// boundary values as part of the grid.
class LeafGrid {
public:
    static std::shared_ptr<const LeafGrid> circle(double length, int n);
    static std::shared_ptr<const LeafGrid> torus(double length_x, double length_y,
                                                 int nx, int ny);
    static std::shared_ptr<const LeafGrid> interval(double length, int n,
                                                    double boundary_lo, double boundary_hi);

    Topology topology() const { return topology_; }
    bool periodic() const { return topology_ != Topology::Interval; }
    int leaf_dim() const { return topology_ == Topology::Torus2 ? 2 : 1; }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int point_count() const { return nx_ * ny_; }

    double length_x() const { return lx_; }
    double length_y() const { return ly_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }

    // Quadrature weight of one cell, h (1D) or hx*hy (2D).
    double cell_measure() const { return leaf_dim() == 2 ? hx_ * hy_ : hx_; }

    double boundary_lo() const { return bc_lo_; }
    double boundary_hi() const { return bc_hi_; }

    double x(int i) const { return i * hx_; }
    double y(int j) const { return j * hy_; }
    int index(int i, int j) const { return j * nx_ + i; }

    bool same_grid(const LeafGrid& other) const { return this == &other; }

private:
    LeafGrid() = default;
    Topology topology_ = Topology::Circle;
    int nx_ = 0, ny_ = 1;
    double lx_ = 0.0, ly_ = 0.0;
    double hx_ = 0.0, hy_ = 0.0;
    double bc_lo_ = 0.0, bc_hi_ = 0.0;
};

using GridPtr = std::shared_ptr<const LeafGrid>;

/// One real value per grid point.  Immutable by convention: operations
/// return new fields.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(GridPtr grid, std::vector<double> values);
    ScalarField(GridPtr grid, double constant);

    static ScalarField from_function(const GridPtr& grid,
                                     const std::function<double(double, double)>& f);

    const GridPtr& grid() const { return grid_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[i]; }
    double& operator[](int i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// One value per grid point per leaf dimension, at staggered (half-point)
/// locations: component d, entry i lives halfway between point i and its
/// +1 neighbour along axis d.  On the interval the last slot along x is
/// unused padding (no wrap).
class VectorField {
public:
    VectorField() = default;
    VectorField(GridPtr grid, std::vector<std::vector<double>> components);
    explicit VectorField(GridPtr grid);  // zero field

    const GridPtr& grid() const { return grid_; }
    int components() const { return static_cast<int>(comps_.size()); }
    const std::vector<double>& comp(int d) const { return comps_[d]; }
    std::vector<double>& comp(int d) { return comps_[d]; }

private:
    GridPtr grid_;
    std::vector<std::vector<double>> comps_;
};

// Leaf-wise calculus.  The gradient takes forward differences onto the
// staggered points, the divergence takes the adjoint (backward) difference
// back, so leaf_divergence(leaf_gradient(f)) reproduces laplacian(f)
// exactly on periodic grids and both are second order at their native
// locations.
ScalarField laplacian(const ScalarField& f);
VectorField leaf_gradient(const ScalarField& f);
ScalarField leaf_divergence(const VectorField& x);

double inner_product_l2(const ScalarField& f, const ScalarField& g);
double norm_l2(const ScalarField& f);
double norm_inf(const ScalarField& f);
std::pair<double, double> field_extrema(const ScalarField& f);
double leaf_volume(const LeafGrid& g);
double field_mean(const ScalarField& f);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
ScalarField pointwise_multiply(const ScalarField& a, const ScalarField& b);
ScalarField pointwise_divide(const ScalarField& a, const ScalarField& b);
ScalarField map_field(const ScalarField& a, const std::function<double(double)>& f);

bool all_finite(const std::vector<double>& v);
void require_same_grid(const ScalarField& a, const ScalarField& b, const char* where);

}  // namespace leafflow

#endif
