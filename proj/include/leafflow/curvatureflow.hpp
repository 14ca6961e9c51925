#ifndef LEAFFLOW_CURVATUREFLOW_HPP
#define LEAFFLOW_CURVATUREFLOW_HPP

#include <vector>

#include "leafflow/heatflow.hpp"
#include "leafflow/leafgrid.hpp"

namespace leafflow {

/// Observables of the evolving metric at one saved time, reconstructed
/// from the scalar solution.  phi is the conformal exponent of the
/// orthogonal metric, g_t = exp(2 phi) g_0 on the orthogonal bundle.
struct GeometricState {
    double t_scaled = 0.0;
    double t_flow = 0.0;
    VectorField H;
    ScalarField sc_mix;
    ScalarField phi;
    ScalarField T2_t;
    ScalarField hF2_t;
    ScalarField vol_scale;
};

/// H = -n * grad(log u), on the staggered points.
VectorField mean_curvature_potential(const ScalarField& u, int n);

/// Mixed scalar curvature from the potential:
///   sc = -n lap(u)/u - n beta_D + psi2F u^-4 - psi1F u^-2.
ScalarField mixed_scalar_curvature(const ScalarField& u, const FoliationScenario& scenario);

/// Independent evaluation through the mean-curvature route:
///   sc = div(H) - |H|^2/n + psi2F u^-4 - psi1F u^-2 - n beta_D
/// with H = -n grad(log u).  Agrees with mixed_scalar_curvature up to
/// O(h^2); the difference is a cross-check on conventions and factors.
ScalarField mixed_scalar_curvature_via_H(const ScalarField& u,
                                         const FoliationScenario& scenario);

/// |X|^2 averaged back to the grid points from the staggered components.
ScalarField vector_norm2_at_points(const VectorField& x);

/// Conformal exponent per snapshot by composite trapezoid of
/// -(sc_mix - Phi) in flow time over the saved snapshots.  Warns through
/// the return flag when the save spacing is too coarse for the quadrature.
struct ConformalAccumulation {
    std::vector<ScalarField> phi;
    bool spacing_warning = false;
    double estimated_error = 0.0;
};
ConformalAccumulation accumulate_conformal_factor(const FlowTrajectory& traj,
                                                  const FoliationScenario& scenario);

struct ExtrinsicNorms {
    ScalarField T2_t;       // T2_0 * exp(-4 phi)
    ScalarField hF2_t;      // hF2_0 * exp(-2 phi)
    ScalarField vol_scale;  // exp(n phi)
};
ExtrinsicNorms evolve_extrinsic_norms(const ScalarField& phi,
                                      const FoliationScenario& scenario);

std::vector<GeometricState> reconstruct_states(const FlowTrajectory& traj,
                                               const FoliationScenario& scenario);

struct ConservationReport {
    // Relative drift of hF2/sqrt(T2) on the set U where psi1*psi2 != 0,
    // evaluated through the potential route.
    double ratio_drift = 0.0;
    bool ratio_checked = false;   // false when U is empty
    // max |u - u0 exp(phi)| over saved snapshots.
    double potential_drift = 0.0;
    // sup difference of the two curvature evaluation routes.
    double curvature_route_gap = 0.0;
    std::vector<double> per_time_potential_drift;
};

ConservationReport conservation_report(const FlowTrajectory& traj,
                                       const FoliationScenario& scenario);

/// Pointwise residual of the forced Burgers equation for H in flow time,
///   dH/dt + grad|H|^2 - n grad(div H) - n grad(T2_t - hF2_t - n beta_D),
/// with dH/dt by central differences over saved snapshots.  Endpoint
/// snapshots are excluded from the reported maximum.
struct BurgersResidual {
    std::vector<double> times;        // interior snapshot times (scaled)
    std::vector<double> max_residual; // sup norm per interior snapshot
    double overall_max = 0.0;
};
BurgersResidual burgers_residual(const FlowTrajectory& traj,
                                 const FoliationScenario& scenario);

enum class SignVerdict { PositiveEverywhere, NegativeEverywhere, Mixed };

struct LimitCurvature {
    ScalarField xi;          // u0 / (u00_tilde e0)
    ScalarField sc_limit;    // n lambda0F + xi^4 T2_0 - xi^2 hF2_0
    SignVerdict verdict = SignVerdict::Mixed;
    bool positivity_hypothesis = false;  // xi^2 hF2 < xi^4 T2 + d^-4 max T2
    double sc_gt_asymptote = 0.0;        // n lambda0F, the limit of sc_mix(g_t)
};

LimitCurvature limit_metric_curvature(const FoliationScenario& scenario,
                                      const SpectralData& spec_scaled, double u00_tilde);

/// min(u0/e0) / max(u0/e0), in (0, 1].
double d_ratio(const ScalarField& u0, const ScalarField& e0);

/// Largeness condition on Phi for global existence:
///   Phi >= n lambda0F + d^-4 max(T2_0).
struct PhiCondition {
    bool satisfied = false;
    double lhs = 0.0;   // Phi
    double rhs = 0.0;   // n lambda0F + d^-4 max T2_0
    double margin = 0.0;
};
PhiCondition check_phi_condition(const FoliationScenario& scenario, double lambda0_unscaled);

}  // namespace leafflow

#endif
