#ifndef LEAFFLOW_SCHRODINGER_HPP
#define LEAFFLOW_SCHRODINGER_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "leafflow/leafgrid.hpp"

namespace leafflow {

/// Dense symmetric matrix of -laplacian - beta on a periodic grid.
struct SchrodingerOperator {
    GridPtr grid;
    ScalarField beta;
    Eigen::MatrixXd matrix;

    ScalarField apply(const ScalarField& f) const;
};

SchrodingerOperator assemble(const GridPtr& grid, const ScalarField& beta);

/// First k eigenpairs of a SchrodingerOperator, ascending, orthonormal in
/// the L2 quadrature inner product.  The ground state is sign-normalized
/// positive.
class SpectralData {
public:
    SpectralData() = default;
    SpectralData(GridPtr grid, std::vector<double> eigenvalues,
                 std::vector<ScalarField> eigenfunctions);

    int count() const { return static_cast<int>(eigenvalues_.size()); }
    double eigenvalue(int j) const { return eigenvalues_[j]; }
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    const ScalarField& eigenfunction(int j) const { return eigenfunctions_[j]; }
    const ScalarField& ground_state() const { return eigenfunctions_[0]; }
    double lambda0() const { return eigenvalues_[0]; }
    double gap() const { return eigenvalues_[1] - eigenvalues_[0]; }
    const GridPtr& grid() const { return grid_; }

private:
    GridPtr grid_;
    std::vector<double> eigenvalues_;
    std::vector<ScalarField> eigenfunctions_;
};

SpectralData eigensolve(const SchrodingerOperator& op, int k);
double fundamental_gap(const SpectralData& spec);

std::vector<double> project(const ScalarField& f, const SpectralData& spec);
ScalarField reconstruct(const std::vector<double>& coeff, const SpectralData& spec);

/// Exact solution of du/dt = laplacian(u) + beta*u in the discretized
/// system: u(t) = sum_j c_j exp(-lambda_j t) e_j over the full spectrum.
ScalarField linear_heat_evolve(const ScalarField& u0, const ScalarField& beta, double t);
ScalarField linear_heat_evolve(const ScalarField& u0, const SpectralData& full_spec, double t);

/// Solves dv/dt = laplacian(v) + (beta + lambda0) v + Q(x,t) spectrally,
/// with the forcing integral approximated by the composite trapezoid rule
/// with step quad_dt.
ScalarField duhamel_solve(const ScalarField& u0, const SpectralData& full_spec,
                          const std::function<ScalarField(double)>& forcing, double t_end,
                          double quad_dt);

struct TildeU00 {
    double value = 0.0;       // u0^0 + integral of q0 plus tail estimate
    double tail = 0.0;        // fitted-exponential tail beyond the record
    double fitted_rate = 0.0; // decay rate of |q0| on the last decade
    bool tail_warning = false;
};

/// Limiting ground-state coefficient from a recorded series q0(t) of
/// ground-state projections of the forcing.  The record should extend
/// until |q0| has decayed well below its initial size; the remainder is
/// estimated from an exponential fit over the trailing window and flagged
/// when it exceeds 1% of the result.
TildeU00 tilde_u00(double u0_coeff, const std::vector<double>& times,
                   const std::vector<double>& q0_series);

}  // namespace leafflow

#endif
