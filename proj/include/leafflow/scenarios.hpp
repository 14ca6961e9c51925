#ifndef LEAFFLOW_SCENARIOS_HPP
#define LEAFFLOW_SCENARIOS_HPP

#include <array>
#include <vector>

#include "leafflow/heatflow.hpp"
#include "leafflow/leafgrid.hpp"

namespace leafflow {

/// Hopf-circle reduction: n = 2m, Phi = 2m, T2 = 2m, everything else
/// trivial.  u0 = 1 is an exact fixed point of the flow.
FoliationScenario hopf_scenario(int m, const GridPtr& grid);

/// Flat-torus scenario with conservative initial curvature k = d/dx psi0:
/// u0 = exp(-psi0), no potential and no reaction, Phi = 0.  The mean
/// curvature obeys the homogeneous Burgers equation and decays to zero at
/// the spectral gap rate.
FoliationScenario torus_burgers_scenario(const ScalarField& psi0);

/// Twisted-product scenario: u0 = f0 > 0, no potential, no reaction.
/// exp(-Phi t / n) u then obeys the plain heat equation in flow time.
FoliationScenario twisted_product_scenario(const ScalarField& f0, int n, double Phi);

/// Profile of a surface of revolution, r = [rho cos theta, rho sin theta, h]
/// with arc-length parameter x along the profile, |d rho / dx| < 1.
struct RevolutionProfile {
    GridPtr grid;     // Interval topology; boundary values are rho(0), rho(l)
    ScalarField rho;  // endpoint entries pinned to the grid boundary data
    double Phi = 0.0;
    double h0 = 0.0;  // height offset h(0)

    void validate() const;
};

struct RevolutionTrajectory {
    std::vector<double> times;
    std::vector<ScalarField> rho;
    std::vector<double> max_slope;   // max |rho_x| over staggered points, per save
    bool slope_ok = true;            // |rho_x| < 1 held at every accepted step
    double first_violation_time = -1.0;
};

/// Implicit-Euler evolution of rho_t = rho_xx - Phi rho with fixed
/// Dirichlet ends.  The slope bound |rho_x| < 1 is monitored each step;
/// reconstruction is marked invalid from the first violation onward.
RevolutionTrajectory revolution_evolve(const RevolutionProfile& profile, double t_end,
                                       double dt, int save_every = 1);

struct ReconstructedProfile {
    ScalarField h;                              // height at grid points, h(0) = h0
    std::vector<std::array<double, 3>> points;  // ring-major embedding samples
    int theta_samples = 64;
};

/// Height from the arc-length relation h' = sqrt(1 - rho_x^2), midpoint
/// rule over the staggered slopes (exactly preserves the profile length).
ReconstructedProfile reconstruct_profile(const ScalarField& rho, double h0 = 0.0,
                                         int theta_samples = 64);

/// K = -rho_xx / rho at interior points (endpoint slots copy the nearest
/// interior value).
ScalarField gaussian_curvature(const ScalarField& rho);

}  // namespace leafflow

#endif
