#include "leafflow/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace leafflow {

FoliationScenario hopf_scenario(int m, const GridPtr& grid) {
    if (m < 1) throw std::invalid_argument("hopf_scenario: m must be >= 1");
    if (!grid->periodic() || grid->leaf_dim() != 1)
        throw std::invalid_argument("hopf_scenario: needs a circle leaf");
    FoliationScenario s;
    s.n = 2 * m;
    s.Phi = 2.0 * m;
    s.beta_D = ScalarField(grid, 0.0);
    s.hF2_0 = ScalarField(grid, 0.0);
    s.T2_0 = ScalarField(grid, 2.0 * m);
    s.u0 = ScalarField(grid, 1.0);
    return s;
}

FoliationScenario torus_burgers_scenario(const ScalarField& psi0) {
    if (!psi0.grid()->periodic() || psi0.grid()->leaf_dim() != 1)
        throw std::invalid_argument("torus_burgers_scenario: needs a circle leaf");
    FoliationScenario s;
    s.n = 1;
    s.Phi = 0.0;
    s.beta_D = ScalarField(psi0.grid(), 0.0);
    s.T2_0 = ScalarField(psi0.grid(), 0.0);
    s.hF2_0 = ScalarField(psi0.grid(), 0.0);
    s.u0 = map_field(psi0, [](double p) { return std::exp(-p); });
    return s;
}

FoliationScenario twisted_product_scenario(const ScalarField& f0, int n, double Phi) {
    if (!f0.grid()->periodic())
        throw std::invalid_argument("twisted_product_scenario: needs a closed leaf");
    for (double v : f0.values())
        if (!(v > 0.0)) throw std::invalid_argument("twisted_product_scenario: f0 must be > 0");
    FoliationScenario s;
    s.n = n;
    s.Phi = Phi;
    s.beta_D = ScalarField(f0.grid(), 0.0);
    s.T2_0 = ScalarField(f0.grid(), 0.0);
    s.hF2_0 = ScalarField(f0.grid(), 0.0);
    s.u0 = f0;
    return s;
}

namespace {

double max_abs_slope(const ScalarField& rho) {
    const LeafGrid& g = *rho.grid();
    const double ih = 1.0 / g.hx();
    double m = 0.0;
    for (int i = 0; i + 1 < g.nx(); ++i)
        m = std::max(m, std::abs((rho[i + 1] - rho[i]) * ih));
    return m;
}

}  // namespace

void RevolutionProfile::validate() const {
    if (!grid || grid->topology() != Topology::Interval)
        throw std::invalid_argument("RevolutionProfile: needs an Interval grid");
    if (!rho.grid() || !rho.grid()->same_grid(*grid))
        throw std::invalid_argument("RevolutionProfile: rho lives on a different grid");
    for (double v : rho.values())
        if (!(v > 0.0)) throw std::invalid_argument("RevolutionProfile: rho must be > 0");
    if (rho[0] != grid->boundary_lo() || rho[rho.size() - 1] != grid->boundary_hi())
        throw std::invalid_argument("RevolutionProfile: rho endpoints must match the "
                                    "grid boundary data");
    if (!(max_abs_slope(rho) < 1.0))
        throw std::invalid_argument("RevolutionProfile: |rho_x| < 1 required");
}

RevolutionTrajectory revolution_evolve(const RevolutionProfile& profile, double t_end,
                                       double dt, int save_every) {
    profile.validate();
    if (!(t_end > 0.0) || !(dt > 0.0) || save_every < 1)
        throw std::invalid_argument("revolution_evolve: need t_end > 0, dt > 0, "
                                    "save_every >= 1");
    const LeafGrid& g = *profile.grid;
    const int n = g.nx();
    const double ih2 = 1.0 / (g.hx() * g.hx());

    RevolutionTrajectory traj;
    std::vector<double> rho = profile.rho.values();

    auto save = [&](double t) {
        traj.times.push_back(t);
        ScalarField f(profile.grid, rho);
        traj.rho.push_back(f);
        traj.max_slope.push_back(max_abs_slope(f));
    };
    save(0.0);

    // Thomas solve of (1 + dt Phi + 2 dt/h^2) r_i - dt/h^2 (r_{i-1} + r_{i+1}) = rho_i
    // on the interior, Dirichlet ends pinned.
    const int m = n - 2;
    std::vector<double> cp(m), dp(m);
    if (1.0 + dt * profile.Phi <= 0.0)
        throw std::invalid_argument("revolution_evolve: dt * Phi too negative for the "
                                    "implicit solve");

    double t = 0.0;
    long step_count = 0;
    const double t_final = t_end * (1.0 - 1e-14);
    while (t < t_final) {
        const double dt_step = std::min(dt, t_end - t);
        const double d2 = 1.0 + dt_step * profile.Phi + 2.0 * dt_step * ih2;
        const double o2 = -dt_step * ih2;
        // forward sweep
        cp[0] = o2 / d2;
        dp[0] = (rho[1] - o2 * rho[0]) / d2;
        for (int i = 1; i < m; ++i) {
            const double w = d2 - o2 * cp[i - 1];
            cp[i] = o2 / w;
            const double rhs = rho[i + 1] - (i == m - 1 ? o2 * rho[n - 1] : 0.0);
            dp[i] = (rhs - o2 * dp[i - 1]) / w;
        }
        for (int i = m - 1; i >= 0; --i)
            rho[i + 1] = dp[i] - (i + 1 < m ? cp[i] * rho[i + 2] : 0.0);

        t += dt_step;
        ++step_count;
        const double slope = max_abs_slope(ScalarField(profile.grid, rho));
        if (slope >= 1.0 && traj.slope_ok) {
            traj.slope_ok = false;
            traj.first_violation_time = t;
        }
        if (t >= t_final || step_count % save_every == 0) save(t);
    }
    return traj;
}

ReconstructedProfile reconstruct_profile(const ScalarField& rho, double h0,
                                         int theta_samples) {
    const LeafGrid& g = *rho.grid();
    if (g.topology() != Topology::Interval)
        throw std::invalid_argument("reconstruct_profile: needs an Interval grid");
    const int n = g.nx();
    const double h = g.hx();

    ReconstructedProfile out;
    out.theta_samples = theta_samples;
    std::vector<double> height(n);
    height[0] = h0;
    for (int i = 0; i + 1 < n; ++i) {
        const double slope = (rho[i + 1] - rho[i]) / h;
        const double rad = 1.0 - slope * slope;
        if (rad < 0.0)
            throw std::runtime_error("reconstruct_profile: |rho_x| >= 1, embedding "
                                     "does not exist");
        height[i + 1] = height[i] + h * std::sqrt(rad);
    }
    out.h = ScalarField(rho.grid(), std::move(height));

    out.points.reserve(static_cast<size_t>(n) * theta_samples);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < theta_samples; ++k) {
            const double theta = 2.0 * M_PI * k / theta_samples;
            out.points.push_back({rho[i] * std::cos(theta), rho[i] * std::sin(theta),
                                  out.h[i]});
        }
    }
    return out;
}

ScalarField gaussian_curvature(const ScalarField& rho) {
    for (double v : rho.values())
        if (!(v > 0.0)) throw std::invalid_argument("gaussian_curvature: rho must be > 0");
    ScalarField lap = laplacian(rho);
    const int n = rho.size();
    std::vector<double> k(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) k[i] = -lap[i] / rho[i];
    if (n >= 3) {
        k[0] = k[1];
        k[n - 1] = k[n - 2];
    }
    return ScalarField(rho.grid(), std::move(k));
}

}  // namespace leafflow
