#ifndef LEAFFLOW_HEATFLOW_HPP
#define LEAFFLOW_HEATFLOW_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "leafflow/leafgrid.hpp"
#include "leafflow/schrodinger.hpp"

namespace leafflow {

/// Geometric input data on the model leaf.  n is the rank of the
/// orthogonal distribution, Phi the leaf-wise constant driving the flow,
/// beta_D the non-umbilicity potential, T2_0 and hF2_0 the squared norms
/// of the integrability tensor and of the leaf second fundamental tensor
/// at t = 0, u0 the initial potential of the mean curvature field.
struct FoliationScenario {
    int n = 1;
    double Phi = 0.0;
    ScalarField beta_D;
    ScalarField T2_0;
    ScalarField hF2_0;
    ScalarField u0;

    void validate() const;
    ScalarField psi1F() const;  // u0^2 * hF2_0
    ScalarField psi2F() const;  // u0^4 * T2_0
};

/// Coefficients of the time-scaled scalar problem
///   du/dt = laplacian(u) + beta u + psi1 u^-1 - psi2 u^-3
/// with beta = beta_D + Phi/n and psi_i the scenario reaction weights
/// divided by n.  Scaled time runs n times faster than flow time.
struct ScaledProblem {
    int n = 1;
    double Phi = 0.0;
    ScalarField beta;
    ScalarField psi1;
    ScalarField psi2;
    ScalarField beta_D;
    ScalarField psi1F;
    ScalarField psi2F;
    ScalarField u0;
    SpectralData spec;  // full spectrum of -laplacian - beta

    double lambda0() const { return spec.lambda0(); }
    double lambda1() const { return spec.eigenvalue(1); }
    double gap() const { return spec.gap(); }
    const ScalarField& ground_state() const { return spec.ground_state(); }

    double lambda0_unscaled() const { return spec.lambda0() + Phi / n; }
    double scaled_time(double flow_time) const { return n * flow_time; }
    double flow_time(double scaled_time) const { return scaled_time / n; }
};

ScaledProblem scale_problem(const FoliationScenario& scenario);

/// Extrema entering the a priori envelopes: u0 and the reaction weights
/// measured against powers of the ground state.
struct EnvelopeData {
    double u0_minus = 0.0, u0_plus = 0.0;
    double psi1_plus = 0.0, psi2_plus = 0.0;
};
EnvelopeData envelope_data(const ScaledProblem& prob);

enum class HypothesisVerdict { Satisfied, Violated, Lambda0NotNegative };

struct HypothesisReport {
    HypothesisVerdict verdict = HypothesisVerdict::Violated;
    double margin = 0.0;   // (u0^-)^4 - psi2^+/|lambda0|
    double lambda0 = 0.0;
    EnvelopeData data;
    bool passed() const { return verdict == HypothesisVerdict::Satisfied; }
    std::string describe() const;
};

/// Initial-data condition (u0^-)^4 >= psi2^+ / |lambda0| that guarantees
/// global existence; requires lambda0 < 0.
HypothesisReport check_initial_condition(const ScaledProblem& prob);

/// Closed-form sub/super solutions bracketing u/e0 for all time.
class Envelope {
public:
    Envelope(const EnvelopeData& data, double lambda0);

    double w_minus(double t) const;
    double w_plus(double t) const;
    // Rescaled limits of exp(lambda0 t) * w_-/+ as t -> infinity.
    double v_minus() const;
    double v_plus() const;
    const EnvelopeData& data() const { return data_; }

private:
    EnvelopeData data_;
    double lambda0_;
};

struct TrajectoryOptions {
    double t_end = 1.0;
    double dt = 1e-3;
    int save_every = 1;
    bool allow_hypothesis_violation = false;
    bool accumulate_conformal = true;
    int max_halvings = 20;
};

struct FlowTrajectory {
    std::vector<double> times;            // scaled time, strictly increasing from 0
    std::vector<ScalarField> snapshots;   // u at saved times, strictly positive
    std::vector<ScalarField> phi;         // conformal exponent at saved times
    std::vector<double> min_u, max_u;     // per saved time
    std::vector<double> q0;               // ground-state projection of the
                                          // rescaled forcing at saved times
    double dt_used = 0.0;
    int rejected_steps = 0;
    int n = 1;
    double Phi = 0.0;
    // Effective ground eigenvalue of the discrete-in-time stepper,
    // log(1 + dt lambda0)/dt; the right exponent for rescaling numerical
    // trajectories (it converges to lambda0 as dt -> 0).
    double lambda0_eff = std::numeric_limits<double>::quiet_NaN();

    double flow_time(double scaled_time) const { return scaled_time / n; }
};

struct StepOutcome {
    ScalarField u;
    double dt_used = 0.0;
    int halvings = 0;
};

/// One IMEX step: the linear part (laplacian + beta) is treated with
/// backward Euler, the reaction psi1 u^-1 - psi2 u^-3 explicitly at the
/// current value.  A step that loses positivity is rejected and retried
/// with dt halved, up to max_halvings, then fails hard.
StepOutcome step(const ScaledProblem& prob, const ScalarField& u, double dt,
                 int max_halvings = 20);

FlowTrajectory evolve(const ScaledProblem& prob, const TrajectoryOptions& opts);

struct EnvelopeReport {
    double max_violation = 0.0;
    double time_of_max = 0.0;
    int point_of_max = -1;
    std::vector<double> violation_per_time;
    double tolerance = 0.0;
    bool within(double extra_slack = 0.0) const {
        return max_violation <= tolerance + extra_slack;
    }
};

/// Worst violation of w_-(t) - tol <= u/e0 <= w_+(t) + tol over the
/// trajectory.  Report-only; tolerance is recorded, not enforced.
EnvelopeReport verify_envelope(const FlowTrajectory& traj, const Envelope& env,
                               const ScalarField& e0, double tolerance);

struct RescaledLimit {
    ScalarField limit_field;          // v = exp(lambda0 t) u at the final time
    double u00_tilde = 0.0;           // (v_final, e0)
    std::vector<double> times;
    std::vector<double> residual;     // |v(t) - u00_tilde e0|_inf
    double decades_decayed = 0.0;
    bool decay_warning = false;       // residual decayed less than two decades
};

RescaledLimit rescaled_limit(const FlowTrajectory& traj, const SpectralData& spec);

/// Least-squares slope of log(value) against t over [t_lo, t_hi],
/// sign-flipped so that decay comes out positive.
double fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values,
                            double t_lo, double t_hi);

/// Fitting window on the clean part of a decaying positive series: below
/// rel_hi times the peak and above rel_lo times the peak, and above
/// floor_mult times the final value.
std::pair<double, double> auto_fit_window(const std::vector<double>& times,
                                          const std::vector<double>& values,
                                          double rel_hi = 1e-1, double rel_lo = 1e-7,
                                          double floor_mult = 30.0);

}  // namespace leafflow

#endif
