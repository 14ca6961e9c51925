#include "leafflow/curvatureflow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leafflow {

namespace {

ScalarField reaction_terms(const ScalarField& u, const FoliationScenario& scenario) {
    // psi2F u^-4 - psi1F u^-2 - n beta_D, shared by both curvature routes
    ScalarField p1 = scenario.psi1F();
    ScalarField p2 = scenario.psi2F();
    std::vector<double> v(u.size());
    for (int i = 0; i < u.size(); ++i) {
        const double inv2 = 1.0 / (u[i] * u[i]);
        v[i] = p2[i] * inv2 * inv2 - p1[i] * inv2 - scenario.n * scenario.beta_D[i];
    }
    return ScalarField(u.grid(), std::move(v));
}

}  // namespace

VectorField mean_curvature_potential(const ScalarField& u, int n) {
    for (double v : u.values())
        if (!(v > 0.0))
            throw std::invalid_argument("mean_curvature_potential: u must be positive");
    ScalarField logu = map_field(u, [](double x) { return std::log(x); });
    VectorField h = leaf_gradient(logu);
    for (int d = 0; d < h.components(); ++d)
        for (double& x : h.comp(d)) x *= -static_cast<double>(n);
    return h;
}

ScalarField mixed_scalar_curvature(const ScalarField& u, const FoliationScenario& scenario) {
    ScalarField lap = laplacian(u);
    ScalarField rest = reaction_terms(u, scenario);
    std::vector<double> v(u.size());
    for (int i = 0; i < u.size(); ++i)
        v[i] = -scenario.n * lap[i] / u[i] + rest[i];
    return ScalarField(u.grid(), std::move(v));
}

ScalarField vector_norm2_at_points(const VectorField& x) {
    const LeafGrid& g = *x.grid();
    std::vector<double> out(g.point_count(), 0.0);
    if (g.topology() == Topology::Circle) {
        const int n = g.nx();
        const auto& c = x.comp(0);
        for (int i = 0; i < n; ++i) {
            const int im = (i == 0) ? n - 1 : i - 1;
            out[i] = 0.5 * (c[i] * c[i] + c[im] * c[im]);
        }
    } else if (g.topology() == Topology::Torus2) {
        const int nx = g.nx(), ny = g.ny();
        const auto& cx = x.comp(0);
        const auto& cy = x.comp(1);
        for (int j = 0; j < ny; ++j) {
            const int jm = (j == 0) ? ny - 1 : j - 1;
            for (int i = 0; i < nx; ++i) {
                const int im = (i == 0) ? nx - 1 : i - 1;
                const int c = g.index(i, j);
                out[c] = 0.5 * (cx[c] * cx[c] + cx[g.index(im, j)] * cx[g.index(im, j)]) +
                         0.5 * (cy[c] * cy[c] + cy[g.index(i, jm)] * cy[g.index(i, jm)]);
            }
        }
    } else {
        const int n = g.nx();
        const auto& c = x.comp(0);
        for (int i = 1; i + 1 < n; ++i)
            out[i] = 0.5 * (c[i] * c[i] + c[i - 1] * c[i - 1]);
    }
    return ScalarField(x.grid(), std::move(out));
}

ScalarField mixed_scalar_curvature_via_H(const ScalarField& u,
                                         const FoliationScenario& scenario) {
    VectorField h = mean_curvature_potential(u, scenario.n);
    ScalarField div_h = leaf_divergence(h);
    ScalarField h2 = vector_norm2_at_points(h);
    ScalarField rest = reaction_terms(u, scenario);
    std::vector<double> v(u.size());
    for (int i = 0; i < u.size(); ++i)
        v[i] = div_h[i] - h2[i] / scenario.n + rest[i];
    return ScalarField(u.grid(), std::move(v));
}

ConformalAccumulation accumulate_conformal_factor(const FlowTrajectory& traj,
                                                  const FoliationScenario& scenario) {
    if (traj.times.size() < 2)
        throw std::invalid_argument("accumulate_conformal_factor: need >= 2 snapshots");
    ConformalAccumulation out;
    const GridPtr grid = traj.snapshots.front().grid();
    const int npts = grid->point_count();

    std::vector<ScalarField> sc;
    sc.reserve(traj.times.size());
    for (const auto& u : traj.snapshots) sc.push_back(mixed_scalar_curvature(u, scenario));

    std::vector<double> phi(npts, 0.0);
    out.phi.emplace_back(grid, phi);
    for (size_t k = 1; k < traj.times.size(); ++k) {
        const double dtf = (traj.times[k] - traj.times[k - 1]) / scenario.n;
        for (int i = 0; i < npts; ++i)
            phi[i] -= 0.5 * dtf * ((sc[k - 1][i] - scenario.Phi) + (sc[k][i] - scenario.Phi));
        out.phi.emplace_back(grid, phi);
    }

    // Trapezoid error estimate from second differences of the integrand.
    double err = 0.0;
    for (size_t k = 1; k + 1 < traj.times.size(); ++k) {
        const double dtf = (traj.times[k + 1] - traj.times[k - 1]) / (2.0 * scenario.n);
        double second = 0.0;
        for (int i = 0; i < npts; ++i)
            second = std::max(second,
                              std::abs(sc[k + 1][i] - 2.0 * sc[k][i] + sc[k - 1][i]));
        err += dtf * second / 12.0;
    }
    out.estimated_error = err;
    double range = 0.0;
    for (const auto& p : out.phi) {
        auto [lo, hi] = field_extrema(p);
        range = std::max(range, hi - lo);
        range = std::max(range, std::abs(hi));
    }
    out.spacing_warning = range > 0.0 && err > 1e-4 * range;
    return out;
}

ExtrinsicNorms evolve_extrinsic_norms(const ScalarField& phi,
                                      const FoliationScenario& scenario) {
    ExtrinsicNorms out;
    out.T2_t = pointwise_multiply(scenario.T2_0,
                                  map_field(phi, [](double p) { return std::exp(-4.0 * p); }));
    out.hF2_t = pointwise_multiply(scenario.hF2_0,
                                   map_field(phi, [](double p) { return std::exp(-2.0 * p); }));
    const double n = scenario.n;
    out.vol_scale = map_field(phi, [n](double p) { return std::exp(n * p); });
    return out;
}

std::vector<GeometricState> reconstruct_states(const FlowTrajectory& traj,
                                               const FoliationScenario& scenario) {
    std::vector<ScalarField> phi = traj.phi;
    if (phi.size() != traj.times.size())
        phi = accumulate_conformal_factor(traj, scenario).phi;

    std::vector<GeometricState> states;
    states.reserve(traj.times.size());
    for (size_t k = 0; k < traj.times.size(); ++k) {
        GeometricState s;
        s.t_scaled = traj.times[k];
        s.t_flow = traj.times[k] / scenario.n;
        s.H = mean_curvature_potential(traj.snapshots[k], scenario.n);
        s.sc_mix = mixed_scalar_curvature(traj.snapshots[k], scenario);
        s.phi = phi[k];
        ExtrinsicNorms norms = evolve_extrinsic_norms(phi[k], scenario);
        s.T2_t = std::move(norms.T2_t);
        s.hF2_t = std::move(norms.hF2_t);
        s.vol_scale = std::move(norms.vol_scale);
        states.push_back(std::move(s));
    }
    return states;
}

ConservationReport conservation_report(const FlowTrajectory& traj,
                                       const FoliationScenario& scenario) {
    ConservationReport rep;
    const ScalarField p1 = scenario.psi1F();
    const ScalarField p2 = scenario.psi2F();
    const int npts = p1.size();

    std::vector<int> domain_u;
    for (int i = 0; i < npts; ++i)
        if (p1[i] * p2[i] > 1e-14) domain_u.push_back(i);
    rep.ratio_checked = !domain_u.empty();

    // hF2/sqrt(T2) through the potential route, against its t = 0 value.
    if (rep.ratio_checked) {
        std::vector<double> ratio0(domain_u.size());
        const ScalarField& u0 = traj.snapshots.front();
        for (size_t m = 0; m < domain_u.size(); ++m) {
            const int i = domain_u[m];
            const double inv2 = 1.0 / (u0[i] * u0[i]);
            ratio0[m] = p1[i] * inv2 / std::sqrt(p2[i] * inv2 * inv2);
        }
        for (const auto& u : traj.snapshots) {
            for (size_t m = 0; m < domain_u.size(); ++m) {
                const int i = domain_u[m];
                const double inv2 = 1.0 / (u[i] * u[i]);
                const double r = p1[i] * inv2 / std::sqrt(p2[i] * inv2 * inv2);
                rep.ratio_drift = std::max(rep.ratio_drift,
                                           std::abs(r - ratio0[m]) / std::abs(ratio0[m]));
            }
        }
    }

    std::vector<ScalarField> phi = traj.phi;
    if (phi.size() != traj.times.size())
        phi = accumulate_conformal_factor(traj, scenario).phi;
    const ScalarField& u0 = traj.snapshots.front();
    for (size_t k = 0; k < traj.times.size(); ++k) {
        double worst = 0.0;
        const ScalarField& u = traj.snapshots[k];
        const ScalarField& ph = phi[k];
        for (int i = 0; i < npts; ++i)
            worst = std::max(worst, std::abs(u[i] - u0[i] * std::exp(ph[i])));
        rep.per_time_potential_drift.push_back(worst);
        rep.potential_drift = std::max(rep.potential_drift, worst);
    }

    for (const auto& u : traj.snapshots) {
        ScalarField a = mixed_scalar_curvature(u, scenario);
        ScalarField b = mixed_scalar_curvature_via_H(u, scenario);
        rep.curvature_route_gap = std::max(rep.curvature_route_gap, norm_inf(a - b));
    }
    return rep;
}

BurgersResidual burgers_residual(const FlowTrajectory& traj,
                                 const FoliationScenario& scenario) {
    if (traj.times.size() < 3)
        throw std::invalid_argument("burgers_residual: need >= 3 snapshots");
    BurgersResidual out;
    const int n = scenario.n;

    std::vector<VectorField> h;
    h.reserve(traj.times.size());
    for (const auto& u : traj.snapshots) h.push_back(mean_curvature_potential(u, n));

    for (size_t k = 1; k + 1 < traj.times.size(); ++k) {
        const double dtf = (traj.times[k + 1] - traj.times[k - 1]) / scenario.n;
        const ScalarField& u = traj.snapshots[k];

        ScalarField h2 = vector_norm2_at_points(h[k]);
        VectorField grad_h2 = leaf_gradient(h2);
        VectorField grad_div = leaf_gradient(leaf_divergence(h[k]));

        // n * (T2_t - hF2_t - n beta_D) with the norms through the
        // potential route
        ScalarField p1 = scenario.psi1F();
        ScalarField p2 = scenario.psi2F();
        std::vector<double> force(u.size());
        for (int i = 0; i < u.size(); ++i) {
            const double inv2 = 1.0 / (u[i] * u[i]);
            force[i] = n * (p2[i] * inv2 * inv2 - p1[i] * inv2 - n * scenario.beta_D[i]);
        }
        VectorField grad_force = leaf_gradient(ScalarField(u.grid(), std::move(force)));

        double worst = 0.0;
        for (int d = 0; d < h[k].components(); ++d) {
            const auto& hp = h[k + 1].comp(d);
            const auto& hm = h[k - 1].comp(d);
            const auto& g2 = grad_h2.comp(d);
            const auto& gd = grad_div.comp(d);
            const auto& gf = grad_force.comp(d);
            for (size_t i = 0; i < hp.size(); ++i) {
                const double dhdt = (hp[i] - hm[i]) / dtf;
                worst = std::max(worst,
                                 std::abs(dhdt + g2[i] - n * gd[i] - gf[i]));
            }
        }
        out.times.push_back(traj.times[k]);
        out.max_residual.push_back(worst);
        out.overall_max = std::max(out.overall_max, worst);
    }
    return out;
}

LimitCurvature limit_metric_curvature(const FoliationScenario& scenario,
                                      const SpectralData& spec_scaled, double u00_tilde) {
    if (!(u00_tilde > 0.0))
        throw std::invalid_argument("limit_metric_curvature: u00_tilde must be positive");
    LimitCurvature out;
    const ScalarField& e0 = spec_scaled.ground_state();
    const double lam0F = spec_scaled.lambda0() + scenario.Phi / scenario.n;
    out.sc_gt_asymptote = scenario.n * lam0F;

    std::vector<double> xi(e0.size());
    for (int i = 0; i < e0.size(); ++i) xi[i] = scenario.u0[i] / (u00_tilde * e0[i]);
    out.xi = ScalarField(e0.grid(), xi);

    std::vector<double> sc(e0.size());
    bool all_pos = true, all_neg = true;
    for (int i = 0; i < e0.size(); ++i) {
        const double x2 = xi[i] * xi[i];
        sc[i] = scenario.n * lam0F + x2 * x2 * scenario.T2_0[i] - x2 * scenario.hF2_0[i];
        all_pos = all_pos && sc[i] > 0.0;
        all_neg = all_neg && sc[i] < 0.0;
    }
    out.sc_limit = ScalarField(e0.grid(), std::move(sc));
    out.verdict = all_pos   ? SignVerdict::PositiveEverywhere
                  : all_neg ? SignVerdict::NegativeEverywhere
                            : SignVerdict::Mixed;

    const double d = d_ratio(scenario.u0, e0);
    const double t2max = field_extrema(scenario.T2_0).second;
    out.positivity_hypothesis = true;
    for (int i = 0; i < e0.size(); ++i) {
        const double x2 = xi[i] * xi[i];
        if (!(x2 * scenario.hF2_0[i] < x2 * x2 * scenario.T2_0[i] + t2max / std::pow(d, 4))) {
            out.positivity_hypothesis = false;
            break;
        }
    }
    return out;
}

double d_ratio(const ScalarField& u0, const ScalarField& e0) {
    for (int i = 0; i < u0.size(); ++i)
        if (!(u0[i] > 0.0) || !(e0[i] > 0.0))
            throw std::invalid_argument("d_ratio: fields must be positive");
    auto [lo, hi] = field_extrema(pointwise_divide(u0, e0));
    return lo / hi;
}

PhiCondition check_phi_condition(const FoliationScenario& scenario, double lambda0_unscaled) {
    PhiCondition c;
    SchrodingerOperator op = assemble(scenario.beta_D.grid(),
                                      map_field(scenario.beta_D, [&](double b) {
                                          return b + scenario.Phi / scenario.n;
                                      }));
    SpectralData spec = eigensolve(op, 2);
    const double d = d_ratio(scenario.u0, spec.ground_state());
    const double t2max = field_extrema(scenario.T2_0).second;
    c.lhs = scenario.Phi;
    c.rhs = scenario.n * lambda0_unscaled + t2max / std::pow(d, 4);
    c.margin = c.lhs - c.rhs;
    // boundary cases belong to the feasible set
    const double tol = 1e-11 * std::max({1.0, std::abs(c.lhs), std::abs(c.rhs)});
    c.satisfied = c.margin >= -tol;
    return c;
}

}  // namespace leafflow
