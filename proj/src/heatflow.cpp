#include "leafflow/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace leafflow {

namespace {

void require_nonnegative(const ScalarField& f, const char* name) {
    for (double v : f.values())
        if (!(v >= 0.0))
            throw std::invalid_argument(std::string("FoliationScenario: ") + name +
                                        " must be pointwise >= 0");
}

double safe_exp(double x) { return std::exp(std::min(x, 700.0)); }

// y = x - dt * (laplacian x + beta x) on a periodic grid, fused.
struct ImplicitLinear {
    const LeafGrid* g = nullptr;
    const double* beta = nullptr;
    double dt = 0.0;

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        if (g->topology() == Topology::Circle) {
            const int n = g->nx();
            const double ih2 = 1.0 / (g->hx() * g->hx());
            for (int i = 0; i < n; ++i) {
                const int ip = (i + 1 == n) ? 0 : i + 1;
                const int im = (i == 0) ? n - 1 : i - 1;
                const double lap = (x[ip] - 2.0 * x[i] + x[im]) * ih2;
                y[i] = x[i] - dt * (lap + beta[i] * x[i]);
            }
        } else {
            const int nx = g->nx(), ny = g->ny();
            const double ihx2 = 1.0 / (g->hx() * g->hx());
            const double ihy2 = 1.0 / (g->hy() * g->hy());
            for (int j = 0; j < ny; ++j) {
                const int jp = (j + 1 == ny) ? 0 : j + 1;
                const int jm = (j == 0) ? ny - 1 : j - 1;
                for (int i = 0; i < nx; ++i) {
                    const int ip = (i + 1 == nx) ? 0 : i + 1;
                    const int im = (i == 0) ? nx - 1 : i - 1;
                    const int c = g->index(i, j);
                    const double lap =
                        (x[g->index(ip, j)] - 2.0 * x[c] + x[g->index(im, j)]) * ihx2 +
                        (x[g->index(i, jp)] - 2.0 * x[c] + x[g->index(i, jm)]) * ihy2;
                    y[c] = x[c] - dt * (lap + beta[c] * x[c]);
                }
            }
        }
    }
};

// Jacobi-preconditioned conjugate gradients.  The warm start matters: on a
// stationary state the initial residual is exactly zero and the solve is a
// no-op, which keeps exact fixed points exact in floating point.
struct CgWork {
    std::vector<double> r, z, p, ap;
};

void cg_solve(const ImplicitLinear& a, const std::vector<double>& b, std::vector<double>& x,
              CgWork& w, double rel_tol) {
    const size_t n = b.size();
    w.r.resize(n);
    w.z.resize(n);
    w.p.resize(n);
    w.ap.resize(n);

    const double diag_lap = (a.g->topology() == Topology::Circle)
                                ? 2.0 / (a.g->hx() * a.g->hx())
                                : 2.0 / (a.g->hx() * a.g->hx()) + 2.0 / (a.g->hy() * a.g->hy());

    a.apply(x, w.ap);
    double bnorm2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        w.r[i] = b[i] - w.ap[i];
        bnorm2 += b[i] * b[i];
    }
    const double stop2 = rel_tol * rel_tol * bnorm2;

    double rz = 0.0;
    for (size_t i = 0; i < n; ++i) {
        w.z[i] = w.r[i] / (1.0 + a.dt * (diag_lap - a.beta[i]));
        w.p[i] = w.z[i];
        rz += w.r[i] * w.z[i];
    }

    const int maxit = static_cast<int>(20 * n + 50);
    for (int it = 0; it < maxit; ++it) {
        double r2 = 0.0;
        for (size_t i = 0; i < n; ++i) r2 += w.r[i] * w.r[i];
        if (r2 <= stop2 || r2 == 0.0) return;

        a.apply(w.p, w.ap);
        double pap = 0.0;
        for (size_t i = 0; i < n; ++i) pap += w.p[i] * w.ap[i];
        if (!(pap > 0.0))
            throw std::runtime_error("step: implicit system lost positive definiteness "
                                     "(dt too large for the potential)");
        const double alpha = rz / pap;
        for (size_t i = 0; i < n; ++i) {
            x[i] += alpha * w.p[i];
            w.r[i] -= alpha * w.ap[i];
        }
        double rz_new = 0.0;
        for (size_t i = 0; i < n; ++i) {
            w.z[i] = w.r[i] / (1.0 + a.dt * (diag_lap - a.beta[i]));
            rz_new += w.r[i] * w.z[i];
        }
        const double beta_cg = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < n; ++i) w.p[i] = w.z[i] + beta_cg * w.p[i];
    }
    throw std::runtime_error("step: conjugate gradient solve did not converge");
}

struct Stepper {
    const ScaledProblem* prob = nullptr;
    const LeafGrid* g = nullptr;
    CgWork cg;
    std::vector<double> rhs;

    void check_dt(double dt) const {
        double beta_max = 0.0;
        for (double b : prob->beta.values()) beta_max = std::max(beta_max, b);
        if (dt * beta_max > 0.5)
            throw std::invalid_argument("step: dt too large for the potential, need "
                                        "dt * max(beta) <= 0.5");
    }

    // One attempt at a backward-Euler-in-the-linear-part step; returns
    // false when the result leaves the positive cone.
    bool attempt(const std::vector<double>& u, double dt, std::vector<double>& out) {
        const size_t n = u.size();
        rhs.resize(n);
        const auto& p1 = prob->psi1.values();
        const auto& p2 = prob->psi2.values();
        for (size_t i = 0; i < n; ++i) {
            const double inv = 1.0 / u[i];
            rhs[i] = u[i] + dt * (p1[i] * inv - p2[i] * inv * inv * inv);
        }
        out = u;  // warm start
        ImplicitLinear a{g, prob->beta.values().data(), dt};
        cg_solve(a, rhs, out, cg, 1e-14);
        for (size_t i = 0; i < n; ++i)
            if (!(out[i] > 0.0)) return false;
        return true;
    }
};

// One step's contribution to the conformal exponent.  The flow identity
// reads d(log u)/dt = (Phi - sc_mix(u))/n in scaled time; along the
// discrete trajectory the matching quadrature evaluates the curvature at
// the new state, compensates the reaction staggering of the step, and
// divides by the interval midpoint.  The result reproduces the discrete
// log-increment up to O(dt^3) per step whenever the curvature algebra is
// consistent with the dynamics.
void accumulate_phi_step(const ScaledProblem& prob, const ScalarField& u_old,
                         const ScalarField& u_new, double dt, std::vector<double>& phi) {
    ScalarField lap = laplacian(u_new);
    const auto& b = prob.beta.values();
    const auto& p1 = prob.psi1.values();
    const auto& p2 = prob.psi2.values();
    for (int i = 0; i < u_new.size(); ++i) {
        const double a = u_old[i], bb = u_new[i];
        const double inv_b = 1.0 / bb, inv_a = 1.0 / a;
        const double gb = lap[i] * inv_b + b[i] + p1[i] * inv_b * inv_b -
                          p2[i] * inv_b * inv_b * inv_b * inv_b;  // (Phi - sc(u_new))/n
        const double r_b = p1[i] * inv_b - p2[i] * inv_b * inv_b * inv_b;
        const double r_a = p1[i] * inv_a - p2[i] * inv_a * inv_a * inv_a;
        phi[i] += dt * 2.0 * (bb * gb - r_b + r_a) / (a + bb);
    }
}

double q0_projection(const ScaledProblem& prob, const ScalarField& u, double t,
                     double lambda0_eff) {
    const auto& p1 = prob.psi1.values();
    const auto& p2 = prob.psi2.values();
    const double amp = safe_exp(lambda0_eff * t);
    std::vector<double> q(u.size());
    for (int i = 0; i < u.size(); ++i) {
        const double inv = 1.0 / u[i];
        q[i] = amp * (p1[i] * inv - p2[i] * inv * inv * inv);
    }
    return inner_product_l2(ScalarField(u.grid(), std::move(q)), prob.spec.ground_state());
}

}  // namespace

void FoliationScenario::validate() const {
    if (n < 1) throw std::invalid_argument("FoliationScenario: n must be >= 1");
    if (!beta_D.grid() || !T2_0.grid() || !hF2_0.grid() || !u0.grid())
        throw std::invalid_argument("FoliationScenario: missing field");
    require_same_grid(beta_D, T2_0, "FoliationScenario");
    require_same_grid(beta_D, hF2_0, "FoliationScenario");
    require_same_grid(beta_D, u0, "FoliationScenario");
    require_nonnegative(beta_D, "beta_D");
    require_nonnegative(T2_0, "T2_0");
    require_nonnegative(hF2_0, "hF2_0");
    for (double v : u0.values())
        if (!(v > 0.0)) throw std::invalid_argument("FoliationScenario: u0 must be > 0");
    if (!std::isfinite(Phi)) throw std::invalid_argument("FoliationScenario: Phi not finite");
}

ScalarField FoliationScenario::psi1F() const {
    return pointwise_multiply(pointwise_multiply(u0, u0), hF2_0);
}

ScalarField FoliationScenario::psi2F() const {
    ScalarField u2 = pointwise_multiply(u0, u0);
    return pointwise_multiply(pointwise_multiply(u2, u2), T2_0);
}

ScaledProblem scale_problem(const FoliationScenario& scenario) {
    scenario.validate();
    if (!scenario.beta_D.grid()->periodic())
        throw std::invalid_argument("scale_problem: needs a closed leaf (periodic grid)");
    ScaledProblem prob;
    prob.n = scenario.n;
    prob.Phi = scenario.Phi;
    prob.beta_D = scenario.beta_D;
    prob.u0 = scenario.u0;
    const double shift = scenario.Phi / scenario.n;
    prob.beta = map_field(scenario.beta_D, [&](double b) { return b + shift; });
    prob.psi1F = scenario.psi1F();
    prob.psi2F = scenario.psi2F();
    prob.psi1 = (1.0 / scenario.n) * prob.psi1F;
    prob.psi2 = (1.0 / scenario.n) * prob.psi2F;
    SchrodingerOperator op = assemble(scenario.beta_D.grid(), prob.beta);
    prob.spec = eigensolve(op, scenario.beta_D.grid()->point_count());
    return prob;
}

EnvelopeData envelope_data(const ScaledProblem& prob) {
    const ScalarField& e0 = prob.ground_state();
    EnvelopeData d;
    auto [u_lo, u_hi] = field_extrema(pointwise_divide(prob.u0, e0));
    d.u0_minus = u_lo;
    d.u0_plus = u_hi;
    ScalarField e2 = pointwise_multiply(e0, e0);
    d.psi1_plus = field_extrema(pointwise_divide(prob.psi1, e2)).second;
    d.psi2_plus = field_extrema(pointwise_divide(prob.psi2, pointwise_multiply(e2, e2))).second;
    return d;
}

std::string HypothesisReport::describe() const {
    std::ostringstream os;
    switch (verdict) {
        case HypothesisVerdict::Satisfied:
            os << "initial-data condition satisfied, margin " << margin;
            break;
        case HypothesisVerdict::Violated:
            os << "initial-data condition violated, margin " << margin;
            break;
        case HypothesisVerdict::Lambda0NotNegative:
            os << "hypothesis violated: lambda0 < 0 required, got lambda0 = " << lambda0;
            break;
    }
    return os.str();
}

HypothesisReport check_initial_condition(const ScaledProblem& prob) {
    HypothesisReport rep;
    rep.lambda0 = prob.lambda0();
    rep.data = envelope_data(prob);
    if (!(rep.lambda0 < 0.0)) {
        rep.verdict = HypothesisVerdict::Lambda0NotNegative;
        rep.margin = 0.0;
        return rep;
    }
    const double lhs = std::pow(rep.data.u0_minus, 4);
    const double rhs = rep.data.psi2_plus / std::abs(rep.lambda0);
    rep.margin = lhs - rhs;
    // boundary cases (margin zero up to round-off) belong to the feasible set
    const double tol = 1e-11 * std::max({1.0, lhs, rhs});
    rep.verdict = rep.margin >= -tol ? HypothesisVerdict::Satisfied : HypothesisVerdict::Violated;
    return rep;
}

Envelope::Envelope(const EnvelopeData& data, double lambda0)
    : data_(data), lambda0_(lambda0) {
    if (!(lambda0 < 0.0))
        throw std::invalid_argument("Envelope: lambda0 < 0 required");
    const double rad = std::pow(data.u0_minus, 4) - data.psi2_plus / std::abs(lambda0);
    const double tol = 1e-11 * std::max({1.0, std::pow(data.u0_minus, 4),
                                         data.psi2_plus / std::abs(lambda0)});
    if (rad < -tol)
        throw std::invalid_argument("Envelope: initial-data condition violated "
                                    "(negative fourth-root radicand)");
}

double Envelope::w_minus(double t) const {
    const double rad = std::pow(data_.u0_minus, 4) + data_.psi2_plus / lambda0_ -
                       std::exp(4.0 * lambda0_ * t) * data_.psi2_plus / lambda0_;
    return safe_exp(-lambda0_ * t) * std::pow(std::max(rad, 0.0), 0.25);
}

double Envelope::w_plus(double t) const {
    const double rad = std::pow(data_.u0_plus, 2) - data_.psi1_plus / lambda0_ +
                       std::exp(2.0 * lambda0_ * t) * data_.psi1_plus / lambda0_;
    return safe_exp(-lambda0_ * t) * std::sqrt(std::max(rad, 0.0));
}

double Envelope::v_minus() const {
    return std::pow(std::max(std::pow(data_.u0_minus, 4) - data_.psi2_plus / std::abs(lambda0_),
                             0.0),
                    0.25);
}

double Envelope::v_plus() const {
    return std::sqrt(std::pow(data_.u0_plus, 2) + data_.psi1_plus / std::abs(lambda0_));
}

StepOutcome step(const ScaledProblem& prob, const ScalarField& u, double dt, int max_halvings) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    for (double v : u.values())
        if (!(v > 0.0)) throw std::invalid_argument("step: u must be pointwise positive");
    Stepper st;
    st.prob = &prob;
    st.g = u.grid().get();
    st.check_dt(dt);

    std::vector<double> out;
    double dt_cur = dt;
    for (int halved = 0; halved <= max_halvings; ++halved) {
        if (st.attempt(u.values(), dt_cur, out))
            return StepOutcome{ScalarField(u.grid(), std::move(out)), dt_cur, halved};
        dt_cur *= 0.5;
    }
    throw std::runtime_error("step: blow-down, solution left the positive cone after " +
                             std::to_string(max_halvings) + " halvings");
}

FlowTrajectory evolve(const ScaledProblem& prob, const TrajectoryOptions& opts) {
    if (!(opts.t_end > 0.0) || !(opts.dt > 0.0) || opts.save_every < 1)
        throw std::invalid_argument("evolve: need t_end > 0, dt > 0, save_every >= 1");

    HypothesisReport hyp = check_initial_condition(prob);
    if (!hyp.passed() && !opts.allow_hypothesis_violation)
        throw std::runtime_error("evolve: " + hyp.describe() +
                                 " (set allow_hypothesis_violation to run anyway)");

    const GridPtr grid = prob.u0.grid();
    FlowTrajectory traj;
    traj.dt_used = opts.dt;
    traj.n = prob.n;
    traj.Phi = prob.Phi;
    traj.lambda0_eff = std::log1p(opts.dt * prob.lambda0()) / opts.dt;

    Stepper st;
    st.prob = &prob;
    st.g = grid.get();
    st.check_dt(opts.dt);

    ScalarField u = prob.u0;
    std::vector<double> phi(grid->point_count(), 0.0);

    auto save = [&](double t) {
        traj.times.push_back(t);
        traj.snapshots.push_back(u);
        traj.phi.emplace_back(grid, phi);
        auto [lo, hi] = field_extrema(u);
        traj.min_u.push_back(lo);
        traj.max_u.push_back(hi);
        traj.q0.push_back(q0_projection(prob, u, t, traj.lambda0_eff));
    };
    save(0.0);

    double t = 0.0;
    double dt_cur = opts.dt;
    long step_count = 0;
    std::vector<double> out;
    const double t_final = opts.t_end * (1.0 - 1e-14);
    while (t < t_final) {
        double dt_try = std::min(dt_cur, opts.t_end - t);
        int halved = 0;
        while (!st.attempt(u.values(), dt_try, out)) {
            if (++halved > opts.max_halvings)
                throw std::runtime_error(
                    "evolve: blow-down at t = " + std::to_string(t) +
                    ", solution left the positive cone after " +
                    std::to_string(opts.max_halvings) + " halvings");
            dt_try *= 0.5;
            ++traj.rejected_steps;
        }
        ScalarField u_new(grid, out);
        if (opts.accumulate_conformal) accumulate_phi_step(prob, u, u_new, dt_try, phi);
        u = std::move(u_new);
        t += dt_try;
        ++step_count;
        dt_cur = (halved > 0) ? dt_try : std::min(2.0 * dt_try, opts.dt);
        if (t >= t_final || step_count % opts.save_every == 0) save(t);
    }
    return traj;
}

EnvelopeReport verify_envelope(const FlowTrajectory& traj, const Envelope& env,
                               const ScalarField& e0, double tolerance) {
    EnvelopeReport rep;
    rep.tolerance = tolerance;
    rep.violation_per_time.reserve(traj.times.size());
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const double lo = env.w_minus(t);
        const double hi = env.w_plus(t);
        const ScalarField& u = traj.snapshots[k];
        double worst = 0.0;
        int worst_i = -1;
        for (int i = 0; i < u.size(); ++i) {
            const double ratio = u[i] / e0[i];
            const double viol = std::max(lo - ratio, ratio - hi);
            if (viol > worst) {
                worst = viol;
                worst_i = i;
            }
        }
        rep.violation_per_time.push_back(std::max(worst, 0.0));
        if (worst > rep.max_violation) {
            rep.max_violation = worst;
            rep.time_of_max = t;
            rep.point_of_max = worst_i;
        }
    }
    return rep;
}

RescaledLimit rescaled_limit(const FlowTrajectory& traj, const SpectralData& spec) {
    if (traj.times.empty()) throw std::invalid_argument("rescaled_limit: empty trajectory");
    RescaledLimit out;
    // prefer the stepper-effective exponent when the trajectory carries one
    const double lam0 = std::isfinite(traj.lambda0_eff) ? traj.lambda0_eff : spec.lambda0();
    const ScalarField& e0 = spec.ground_state();

    std::vector<ScalarField> v;
    v.reserve(traj.times.size());
    for (size_t k = 0; k < traj.times.size(); ++k) {
        const double amp = safe_exp(lam0 * traj.times[k]);
        v.push_back(amp * traj.snapshots[k]);
    }
    out.limit_field = v.back();
    out.u00_tilde = inner_product_l2(out.limit_field, e0);

    out.times = traj.times;
    out.residual.reserve(v.size());
    for (const auto& vk : v) out.residual.push_back(norm_inf(vk - out.u00_tilde * e0));

    const double peak = *std::max_element(out.residual.begin(), out.residual.end());
    const double last = out.residual.back();
    out.decades_decayed = (last > 0.0) ? std::log10(peak / last)
                                       : std::numeric_limits<double>::infinity();
    out.decay_warning = out.decades_decayed < 2.0;
    return out;
}

double fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values,
                            double t_lo, double t_hi) {
    if (times.size() != values.size())
        throw std::invalid_argument("fit_exponential_rate: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        if (!(values[i] > 0.0))
            throw std::invalid_argument("fit_exponential_rate: non-positive value in window");
        const double x = times[i], y = std::log(values[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m < 2) throw std::invalid_argument("fit_exponential_rate: window holds < 2 samples");
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_exponential_rate: degenerate window");
    return -(m * sxy - sx * sy) / denom;
}

std::pair<double, double> auto_fit_window(const std::vector<double>& times,
                                          const std::vector<double>& values, double rel_hi,
                                          double rel_lo, double floor_mult) {
    if (times.size() != values.size() || times.size() < 4)
        throw std::invalid_argument("auto_fit_window: need >= 4 samples");
    const double peak = *std::max_element(values.begin(), values.end());
    const double lo_cut = std::max(peak * rel_lo, values.back() * floor_mult);
    const double hi_cut = peak * rel_hi;

    double t_lo = times.front(), t_hi = times.back();
    bool started = false;
    int count = 0;
    for (size_t i = 0; i < times.size(); ++i) {
        if (!started && values[i] <= hi_cut && values[i] > lo_cut) {
            t_lo = times[i];
            started = true;
        }
        if (started && values[i] > lo_cut) {
            t_hi = times[i];
            ++count;
        }
    }
    if (!started || count < 4) return {times.front(), times.back()};
    return {t_lo, t_hi};
}

}  // namespace leafflow
