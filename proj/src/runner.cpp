#include "leafflow/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <sstream>

#include "leafflow/csvio.hpp"
#include "leafflow/curvatureflow.hpp"
#include "leafflow/expr.hpp"
#include "leafflow/scenarios.hpp"
#include "leafflow/svgplot.hpp"
#include "leafflow/tolerances.hpp"

namespace leafflow {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& msg)
        : std::runtime_error("stage \"" + stage + "\": " + msg) {}
};

template <typename F>
auto stage(const std::string& name, F&& body) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

GridPtr build_grid(const RunConfig& cfg) {
    switch (cfg.grid.topology) {
        case Topology::Circle:
            return LeafGrid::circle(cfg.grid.length_x, cfg.grid.points_x);
        case Topology::Torus2:
            return LeafGrid::torus(cfg.grid.length_x, cfg.grid.length_y, cfg.grid.points_x,
                                   cfg.grid.points_y);
        case Topology::Interval:
            return LeafGrid::interval(cfg.grid.length_x, cfg.grid.points_x,
                                      cfg.scenario.rho_left, cfg.scenario.rho_right);
    }
    throw std::logic_error("build_grid: unreachable");
}

FoliationScenario build_scenario(const RunConfig& cfg, const GridPtr& grid) {
    switch (cfg.scenario.kind) {
        case ScenarioKind::Hopf:
            return hopf_scenario(cfg.scenario.m, grid);
        case ScenarioKind::TorusBurgers:
            return torus_burgers_scenario(Expression(cfg.scenario.psi0).evaluate_on(grid));
        case ScenarioKind::Twisted:
            return twisted_product_scenario(Expression(cfg.scenario.f0).evaluate_on(grid),
                                            cfg.scenario.n, cfg.scenario.Phi);
        case ScenarioKind::Custom: {
            FoliationScenario s;
            s.n = cfg.scenario.n;
            s.Phi = cfg.scenario.Phi;
            s.beta_D = Expression(cfg.scenario.beta_D).evaluate_on(grid);
            s.T2_0 = Expression(cfg.scenario.T2).evaluate_on(grid);
            s.hF2_0 = Expression(cfg.scenario.hF2).evaluate_on(grid);
            s.u0 = Expression(cfg.scenario.u0).evaluate_on(grid);
            s.validate();
            return s;
        }
        case ScenarioKind::Revolution:
            throw std::logic_error("build_scenario: revolution handled separately");
    }
    throw std::logic_error("build_scenario: unreachable");
}

std::string coord_label(const LeafGrid& g, int i, int j, double x_shift = 0.0,
                        double y_shift = 0.0) {
    if (g.leaf_dim() == 1) return format_double(g.x(i) + x_shift);
    return format_double(g.x(i) + x_shift) + "@" + format_double(g.y(j) + y_shift);
}

CsvTable field_table(const std::vector<double>& times, const std::vector<ScalarField>& fields,
                     double x_shift = 0.0, double y_shift = 0.0) {
    CsvTable t;
    const LeafGrid& g = *fields.front().grid();
    t.header.push_back("t");
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            t.header.push_back(coord_label(g, i, j, x_shift, y_shift));
    for (size_t k = 0; k < times.size(); ++k) {
        std::vector<double> row;
        row.reserve(1 + fields[k].size());
        row.push_back(times[k]);
        for (int i = 0; i < fields[k].size(); ++i) row.push_back(fields[k][i]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

VerdictEntry make_verdict(const std::string& name, bool pass, double metric, double threshold,
                          const std::string& detail = "") {
    return VerdictEntry{name, pass ? "pass" : "fail", metric, threshold, detail};
}

VerdictEntry not_met(const std::string& name, const std::string& detail) {
    return VerdictEntry{name, "hypotheses-not-met", kNan, kNan, detail};
}

// ----- revolution pipeline ---------------------------------------------

RunReport run_revolution(const RunConfig& cfg, const std::string& out_dir) {
    RunReport rep;
    rep.config_echo = cfg.echo;

    GridPtr grid = stage("grid", [&] { return build_grid(cfg); });
    RevolutionProfile prof;
    prof.grid = grid;
    prof.Phi = cfg.scenario.Phi;
    stage("scenario", [&] {
        ScalarField rho0 = Expression(cfg.scenario.rho0).evaluate_on(grid);
        rho0[0] = grid->boundary_lo();
        rho0[rho0.size() - 1] = grid->boundary_hi();
        prof.rho = rho0;
        prof.validate();
        return 0;
    });

    RevolutionTrajectory traj = stage("evolve", [&] {
        return revolution_evolve(prof, cfg.t_end, cfg.dt, cfg.save_every);
    });

    return stage("postprocess", [&] {
        const ScalarField& rho_end = traj.rho.back();
        ScalarField k_end = gaussian_curvature(rho_end);
        ReconstructedProfile rec = reconstruct_profile(rho_end, 0.0);

        // distance to the straight profile between the boundary values
        const LeafGrid& g = *grid;
        const double l = g.length_x();
        double dist = 0.0;
        for (int i = 0; i < rho_end.size(); ++i) {
            const double lin = g.boundary_lo() +
                               g.x(i) * (g.boundary_hi() - g.boundary_lo()) / l;
            dist = std::max(dist, std::abs(rho_end[i] - lin));
        }
        double k_inf = 0.0;
        for (int i = 1; i + 1 < k_end.size(); ++i) k_inf = std::max(k_inf, std::abs(k_end[i]));

        const double dr = g.boundary_hi() - g.boundary_lo();
        const double dh = rec.h[rec.h.size() - 1] - rec.h[0];
        const double arc_defect = std::abs(dr * dr + dh * dh - l * l);

        rep.verdicts.push_back(make_verdict("slope_bound", traj.slope_ok,
                                            traj.max_slope.back(), 1.0,
                                            "max |rho_x| over the run"));
        rep.verdicts.push_back(make_verdict("profile_limit", dist <= 1e-4, dist, 1e-4,
                                            "sup distance to the straight profile"));
        rep.verdicts.push_back(make_verdict("curvature_flat", k_inf <= 1e-4, k_inf, 1e-4,
                                            "sup |K| at the final time"));
        rep.verdicts.push_back(make_verdict("arclength_identity", arc_defect <= 1e-8,
                                            arc_defect, 1e-8,
                                            "(rho2-rho1)^2 + (h2-h1)^2 - l^2"));

        // artifacts
        write_csv(out_dir + "/rho.csv", field_table(traj.times, traj.rho));
        {
            std::vector<ScalarField> ks;
            ks.reserve(traj.rho.size());
            for (const auto& r : traj.rho) ks.push_back(gaussian_curvature(r));
            write_csv(out_dir + "/curvature.csv", field_table(traj.times, ks));
        }
        {
            CsvTable t;
            t.header = {"x", "rho", "h", "K"};
            for (int i = 0; i < rho_end.size(); ++i)
                t.rows.push_back({g.x(i), rho_end[i], rec.h[i], k_end[i]});
            write_csv(out_dir + "/profile_final.csv", t);
        }
        {
            CsvTable t;
            t.header = {"t", "max_slope", "k_inf", "dist_to_straight"};
            for (size_t k = 0; k < traj.times.size(); ++k) {
                ScalarField kk = gaussian_curvature(traj.rho[k]);
                double ki = 0.0;
                for (int i = 1; i + 1 < kk.size(); ++i) ki = std::max(ki, std::abs(kk[i]));
                double dd = 0.0;
                for (int i = 0; i < traj.rho[k].size(); ++i) {
                    const double lin = g.boundary_lo() +
                                       g.x(i) * (g.boundary_hi() - g.boundary_lo()) / l;
                    dd = std::max(dd, std::abs(traj.rho[k][i] - lin));
                }
                t.rows.push_back({traj.times[k], traj.max_slope[k], ki, dd});
            }
            write_csv(out_dir + "/summary_revolution.csv", t);
        }
        {
            std::ostringstream mesh;
            for (const auto& p : rec.points)
                mesh << format_double(p[0]) << ' ' << format_double(p[1]) << ' '
                     << format_double(p[2]) << '\n';
            write_text_file(out_dir + "/embedding.txt", mesh.str());
        }
        if (cfg.plots) {
            SvgPlot plot("profile snapshots", "x", "rho");
            std::vector<double> xs(g.nx());
            for (int i = 0; i < g.nx(); ++i) xs[i] = g.x(i);
            const size_t count = traj.times.size();
            for (size_t k = 0; k < count; k += std::max<size_t>(1, count / 5))
                plot.add_series("t=" + format_double(traj.times[k]), xs,
                                traj.rho[k].values());
            plot.add_series("t=" + format_double(traj.times.back()), xs,
                            traj.rho.back().values());
            plot.save(out_dir + "/profiles.svg");
        }
        return rep;
    });
}

// ----- closed-leaf pipeline ---------------------------------------------

struct PipelineArtifacts {
    ScalarField limit_field;
    bool has_limit = false;
};

RunReport run_spectral(const RunConfig& cfg, const std::string& out_dir,
                       PipelineArtifacts* artifacts) {
    RunReport rep;
    rep.config_echo = cfg.echo;

    GridPtr grid = stage("grid", [&] { return build_grid(cfg); });
    FoliationScenario scenario = stage("scenario", [&] { return build_scenario(cfg, grid); });
    ScaledProblem prob = stage("eigensolve", [&] { return scale_problem(scenario); });

    rep.lambda0 = prob.lambda0();
    rep.lambda1 = prob.lambda1();
    rep.gap = prob.gap();
    rep.d_u0_e0 = d_ratio(scenario.u0, prob.ground_state());

    HypothesisReport hyp = stage("hypothesis", [&] { return check_initial_condition(prob); });
    rep.econd_u = hyp.passed() ? "satisfied"
                  : hyp.verdict == HypothesisVerdict::Violated ? "violated"
                                                               : "lambda0-not-negative";
    rep.econd_u_margin = hyp.margin;
    PhiCondition phi_cond = stage("hypothesis", [&] {
        return check_phi_condition(scenario, prob.lambda0_unscaled());
    });
    rep.econd1_satisfied = phi_cond.satisfied;
    rep.econd1_margin = phi_cond.margin;

    const bool linear = field_extrema(prob.psi1).second <= 0.0 &&
                        field_extrema(prob.psi2).second <= 0.0;
    const bool asymptotics_ok = hyp.passed() || (linear && prob.lambda0() <= 1e-12);
    const bool can_run = asymptotics_ok || cfg.override_hypotheses;

    const ReportToggles& want = cfg.reports;
    if (!can_run) {
        const std::string why = hyp.describe();
        if (want.envelope) rep.verdicts.push_back(not_met("envelope", why));
        if (want.rate) rep.verdicts.push_back(not_met("rate", why));
        if (want.limit_curvature) rep.verdicts.push_back(not_met("limit_curvature", why));
        if (want.conservation) rep.verdicts.push_back(not_met("conservation", why));
        if (want.burgers) rep.verdicts.push_back(not_met("burgers", why));
        if (want.stationarity) rep.verdicts.push_back(not_met("stationarity", why));
        rep.config_echo["note"] =
            "run skipped: " + why + " (pass --override-hypotheses to run anyway)";
        nlohmann::json j = rep.to_json();
        write_text_file(out_dir + "/report.json", j.dump(2) + "\n");
        return rep;
    }

    TrajectoryOptions opts;
    opts.t_end = cfg.t_end;
    opts.dt = cfg.dt;
    opts.save_every = cfg.save_every;
    opts.allow_hypothesis_violation = true;  // gated above
    FlowTrajectory traj = stage("evolve", [&] { return evolve(prob, opts); });

    return stage("postprocess", [&] {
        const ScalarField& e0 = prob.ground_state();
        const bool theory_marked = asymptotics_ok ? false : true;
        const std::string hyp_note = theory_marked ? " [hypotheses not satisfied]" : "";

        std::vector<GeometricState> states = reconstruct_states(traj, scenario);
        RescaledLimit rescaled = rescaled_limit(traj, prob.spec);
        if (artifacts) {
            artifacts->limit_field = rescaled.limit_field;
            artifacts->has_limit = true;
        }

        // fitted decay rate of the rescaled residual
        double fitted_rate = kNan;
        double theoretical_rate = prob.lambda0() < -1e-12
                                      ? std::min(prob.gap(), 2.0 * std::abs(prob.lambda0()))
                                      : prob.gap();
        bool rate_fit_ok = false;
        try {
            auto [lo, hi] = auto_fit_window(rescaled.times, rescaled.residual);
            fitted_rate = fit_exponential_rate(rescaled.times, rescaled.residual, lo, hi);
            rate_fit_ok = true;
        } catch (const std::exception&) {
            rate_fit_ok = false;
        }

        const double h2 = grid->hx() * grid->hx() +
                          (grid->leaf_dim() == 2 ? grid->hy() * grid->hy() : 0.0);

        if (want.stationarity) {
            double drift_u = 0.0, drift_sc = 0.0;
            const ScalarField sc0 = states.front().sc_mix;
            for (size_t k = 0; k < traj.snapshots.size(); ++k) {
                drift_u = std::max(drift_u, norm_inf(traj.snapshots[k] - traj.snapshots[0]));
                drift_sc = std::max(drift_sc, norm_inf(states[k].sc_mix - sc0));
            }
            const bool pass = drift_u <= 1e-10 && drift_sc <= 1e-8;
            rep.verdicts.push_back(make_verdict("stationarity", pass, drift_u, 1e-10,
                                                "max |u(t)-u(0)| ; Sc drift " +
                                                    format_double(drift_sc) + hyp_note));
        }

        if (want.envelope) {
            if (!hyp.passed()) {
                rep.verdicts.push_back(not_met("envelope", hyp.describe()));
            } else {
                Envelope env(hyp.data, prob.lambda0());
                const double tol =
                    kEnvelopeAbsTol + kEnvelopeSlackDt * cfg.dt + kEnvelopeSlackH2 * h2;
                EnvelopeReport er = verify_envelope(traj, env, e0, tol);
                rep.verdicts.push_back(make_verdict(
                    "envelope", er.max_violation <= tol, er.max_violation, tol,
                    "worst violation at t=" + format_double(er.time_of_max)));
            }
        }

        if (want.rate) {
            if (!rate_fit_ok) {
                rep.verdicts.push_back(make_verdict("rate", false, kNan, theoretical_rate,
                                                    "residual fit failed (flat or "
                                                    "non-positive residual)"));
            } else {
                const bool pass = fitted_rate >= kRateLowerFactor * theoretical_rate &&
                                  fitted_rate <= kRateUpperFactor * theoretical_rate;
                rep.verdicts.push_back(make_verdict(
                    "rate", pass, fitted_rate, theoretical_rate,
                    "fitted vs min(gap, 2|lambda0|)" + hyp_note));
            }
        }

        ConservationReport cons;
        bool have_cons = false;
        if (want.conservation) {
            cons = conservation_report(traj, scenario);
            have_cons = true;
            const bool pass = cons.potential_drift <= kConservationTol &&
                              (!cons.ratio_checked || cons.ratio_drift <= kConservationTol);
            std::string detail = "max |u - u0 exp(phi)| = " +
                                 format_double(cons.potential_drift);
            detail += cons.ratio_checked
                          ? ", hF2/sqrt(T2) rel drift = " + format_double(cons.ratio_drift)
                          : ", ratio check skipped (U empty)";
            rep.verdicts.push_back(make_verdict("conservation", pass,
                                                std::max(cons.potential_drift,
                                                         cons.ratio_checked ? cons.ratio_drift
                                                                            : 0.0),
                                                kConservationTol, detail + hyp_note));
        }

        if (want.burgers) {
            if (traj.times.size() < 3) {
                rep.verdicts.push_back(make_verdict("burgers", false, kNan, kNan,
                                                    "need at least 3 snapshots"));
            } else {
                BurgersResidual br = burgers_residual(traj, scenario);
                const double save_dt = cfg.dt * cfg.save_every;
                const double tol = kBurgersSlackDt * std::max(cfg.dt, save_dt * save_dt) +
                                   kBurgersSlackH2 * h2;
                rep.verdicts.push_back(make_verdict("burgers", br.overall_max <= tol,
                                                    br.overall_max, tol,
                                                    "max residual over interior snapshots"));
            }
        }

        double sc_mean_end = field_mean(states.back().sc_mix);
        if (want.limit_curvature) {
            try {
                LimitCurvature lim =
                    limit_metric_curvature(scenario, prob.spec, rescaled.u00_tilde);
                const double dev = std::abs(sc_mean_end - lim.sc_gt_asymptote);
                rep.verdicts.push_back(make_verdict(
                    "limit_curvature", dev <= kCurvatureLimitTol, dev, kCurvatureLimitTol,
                    "mean Sc(t_end) vs n*lambda0F = " +
                        format_double(lim.sc_gt_asymptote) + hyp_note));
            } catch (const std::exception& e) {
                rep.verdicts.push_back(
                    make_verdict("limit_curvature", false, kNan, kNan, e.what()));
            }
        }

        // ---- artifacts ----
        write_csv(out_dir + "/u.csv", field_table(traj.times, traj.snapshots));
        {
            std::vector<ScalarField> sc;
            sc.reserve(states.size());
            for (auto& s : states) sc.push_back(s.sc_mix);
            write_csv(out_dir + "/sc_mix.csv", field_table(traj.times, sc));
        }
        if (!traj.phi.empty())
            write_csv(out_dir + "/phi.csv", field_table(traj.times, traj.phi));
        if (grid->leaf_dim() == 1) {
            std::vector<ScalarField> h_fields;
            h_fields.reserve(states.size());
            for (auto& s : states) h_fields.emplace_back(grid, s.H.comp(0));
            write_csv(out_dir + "/H.csv",
                      field_table(traj.times, h_fields, grid->hx() / 2.0));
        }
        {
            CsvTable t;
            t.header = {"t",       "min_u",      "max_u",    "w_minus",
                        "w_plus",  "residual",   "sc_mix_mean", "rate_window_fit"};
            std::unique_ptr<Envelope> env;
            if (hyp.passed()) env = std::make_unique<Envelope>(hyp.data, prob.lambda0());
            for (size_t k = 0; k < traj.times.size(); ++k) {
                const double t_k = traj.times[k];
                t.rows.push_back({t_k, traj.min_u[k], traj.max_u[k],
                                  env ? env->w_minus(t_k) : kNan,
                                  env ? env->w_plus(t_k) : kNan, rescaled.residual[k],
                                  field_mean(states[k].sc_mix),
                                  rate_fit_ok ? fitted_rate : kNan});
            }
            write_csv(out_dir + "/summary.csv", t);
        }
        if (cfg.plots) {
            {
                SvgPlot plot("ratio extrema and envelopes", "t", "u/e0", true);
                std::vector<double> rlo, rhi;
                for (size_t k = 0; k < traj.times.size(); ++k) {
                    auto [lo2, hi2] = field_extrema(
                        pointwise_divide(traj.snapshots[k], e0));
                    rlo.push_back(lo2);
                    rhi.push_back(hi2);
                }
                plot.add_series("min u/e0", traj.times, rlo);
                plot.add_series("max u/e0", traj.times, rhi);
                if (hyp.passed()) {
                    Envelope env(hyp.data, prob.lambda0());
                    std::vector<double> wm, wp;
                    for (double t_k : traj.times) {
                        wm.push_back(env.w_minus(t_k));
                        wp.push_back(env.w_plus(t_k));
                    }
                    plot.add_series("w_minus", traj.times, wm);
                    plot.add_series("w_plus", traj.times, wp);
                }
                plot.save(out_dir + "/envelope.svg");
            }
            {
                SvgPlot plot("rescaled residual", "t", "|v - u00 e0|_inf", true);
                plot.add_series("residual", rescaled.times, rescaled.residual);
                if (rate_fit_ok) {
                    auto [lo, hi] = auto_fit_window(rescaled.times, rescaled.residual);
                    std::vector<double> ref_t, ref_v;
                    double v0 = kNan;
                    for (size_t k = 0; k < rescaled.times.size(); ++k)
                        if (rescaled.times[k] >= lo && !(v0 == v0)) v0 = rescaled.residual[k];
                    for (double t_k : rescaled.times) {
                        if (t_k < lo) continue;
                        ref_t.push_back(t_k);
                        ref_v.push_back(v0 * std::exp(-fitted_rate * (t_k - lo)));
                    }
                    plot.add_series("fit rate=" + format_double(fitted_rate), ref_t, ref_v);
                }
                plot.save(out_dir + "/residual.svg");
            }
            {
                SvgPlot plot("mean mixed scalar curvature", "t", "mean Sc_mix");
                std::vector<double> sc_mean;
                for (auto& s : states) sc_mean.push_back(field_mean(s.sc_mix));
                plot.add_series("mean Sc_mix", traj.times, sc_mean);
                plot.add_horizontal("n*lambda0F",
                                    scenario.n * prob.lambda0_unscaled());
                plot.save(out_dir + "/curvature.svg");
            }
        }
        (void)have_cons;
        (void)sc_mean_end;

        nlohmann::json j = rep.to_json();
        write_text_file(out_dir + "/report.json", j.dump(2) + "\n");
        return rep;
    });
}

}  // namespace

bool RunReport::all_pass() const {
    if (!stage_failed.empty()) return false;
    for (const auto& v : verdicts)
        if (v.status != "pass") return false;
    return true;
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["config"] = config_echo;
    if (!stage_failed.empty()) j["stage_failed"] = stage_failed;
    j["spectral"] = {{"lambda0", lambda0},
                     {"lambda1", lambda1},
                     {"gap", gap},
                     {"d_u0_e0", d_u0_e0}};
    j["hypotheses"] = {{"initial_condition", econd_u},
                       {"initial_condition_margin", econd_u_margin},
                       {"phi_condition", econd1_satisfied},
                       {"phi_condition_margin", econd1_margin}};
    nlohmann::json vs = nlohmann::json::array();
    for (const auto& v : verdicts) {
        nlohmann::json e = {{"name", v.name},
                            {"status", v.status},
                            {"detail", v.detail}};
        if (std::isfinite(v.metric)) e["metric"] = v.metric;
        if (std::isfinite(v.threshold)) e["threshold"] = v.threshold;
        vs.push_back(e);
    }
    j["verdicts"] = vs;
    j["wall_seconds"] = wall_seconds;
    j["all_pass"] = all_pass();
    return j;
}

std::string RunReport::to_text() const {
    std::ostringstream os;
    os << "spectral: lambda0=" << format_double(lambda0) << " lambda1=" << format_double(lambda1)
       << " gap=" << format_double(gap) << " d(u0,e0)=" << format_double(d_u0_e0) << "\n";
    os << "hypotheses: initial-condition " << econd_u << " (margin "
       << format_double(econd_u_margin) << "), Phi-condition "
       << (econd1_satisfied ? "satisfied" : "violated") << " (margin "
       << format_double(econd1_margin) << ")\n";
    for (const auto& v : verdicts) {
        os << "verdict " << v.name << ": " << v.status;
        if (std::isfinite(v.metric))
            os << " (metric " << format_double(v.metric) << ", threshold "
               << format_double(v.threshold) << ")";
        if (!v.detail.empty()) os << " - " << v.detail;
        os << "\n";
    }
    os << "wall seconds: " << format_double(wall_seconds) << "\n";
    os << (all_pass() ? "ALL PASS" : "NOT PASSING") << "\n";
    return os.str();
}

RunReport run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(cfg.out_dir);
    RunReport rep;
    try {
        if (cfg.scenario.kind == ScenarioKind::Revolution)
            rep = run_revolution(cfg, cfg.out_dir);
        else
            rep = run_spectral(cfg, cfg.out_dir, nullptr);
    } catch (const StageError& e) {
        rep.config_echo = cfg.echo;
        const std::string what = e.what();
        const auto quote = what.find('"');
        rep.stage_failed = what.substr(0, what.find(':'));
        (void)quote;
        nlohmann::json j = rep.to_json();
        j["error"] = what;
        write_text_file(cfg.out_dir + "/report.json", j.dump(2) + "\n");
        throw;
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json j = rep.to_json();
    write_text_file(cfg.out_dir + "/report.json", j.dump(2) + "\n");
    return rep;
}

bool SweepResult::all_pass() const {
    for (const auto& f : failures)
        if (!f.empty()) return false;
    for (const auto& r : reports)
        if (!r.all_pass()) return false;
    return true;
}

SweepResult sweep(const std::string& config_text, const std::string& axis,
                  const std::vector<double>& values, const std::string& out_dir) {
    if (values.empty()) throw std::invalid_argument("sweep: no axis values");
    nlohmann::json base = nlohmann::json::parse(config_text);

    // navigate the dotted axis path
    std::vector<std::string> parts;
    {
        std::stringstream ss(axis);
        std::string p;
        while (std::getline(ss, p, '.')) parts.push_back(p);
    }
    if (parts.empty()) throw std::invalid_argument("sweep: empty axis path");
    {
        nlohmann::json* node = &base;
        for (const auto& p : parts) {
            if (!node->is_object() || !node->contains(p))
                throw std::invalid_argument("sweep: axis path \"" + axis +
                                            "\" not present in the config");
            node = &(*node)[p];
        }
        if (!node->is_number())
            throw std::invalid_argument("sweep: axis \"" + axis + "\" is not a number");
    }

    std::filesystem::create_directories(out_dir);
    SweepResult result;
    result.values = values;
    std::vector<ScalarField> limits;
    std::vector<bool> has_limit;

    for (size_t k = 0; k < values.size(); ++k) {
        nlohmann::json patched = base;
        nlohmann::json* node = &patched;
        for (size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
        (*node)[parts.back()] = values[k];

        const std::string sub = out_dir + "/sweep_" + std::to_string(k);
        std::filesystem::create_directories(sub);
        RunReport rep;
        std::string failure;
        PipelineArtifacts art;
        try {
            RunConfig cfg = parse_config(patched.dump());
            cfg.out_dir = sub;
            if (cfg.scenario.kind == ScenarioKind::Revolution)
                rep = run_revolution(cfg, sub);
            else
                rep = run_spectral(cfg, sub, &art);
            nlohmann::json j = rep.to_json();
            write_text_file(sub + "/report.json", j.dump(2) + "\n");
        } catch (const std::exception& e) {
            failure = e.what();
        }
        result.reports.push_back(std::move(rep));
        result.failures.push_back(failure);
        limits.push_back(art.has_limit ? art.limit_field : ScalarField());
        has_limit.push_back(art.has_limit);
    }

    for (size_t k = 0; k + 1 < limits.size(); ++k) {
        if (!has_limit[k] || !has_limit[k + 1]) continue;
        if (!limits[k].grid() || !limits[k + 1].grid()) continue;
        if (!limits[k].grid()->same_grid(*limits[k + 1].grid())) continue;
        result.continuity_metric =
            std::max(result.continuity_metric, norm_inf(limits[k] - limits[k + 1]));
    }

    // aggregated table
    CsvTable t;
    t.header = {"value", "lambda0", "gap", "all_pass"};
    for (size_t k = 0; k < values.size(); ++k) {
        const RunReport& r = result.reports[k];
        t.rows.push_back({values[k], r.lambda0, r.gap,
                          result.failures[k].empty() && r.all_pass() ? 1.0 : 0.0});
    }
    write_csv(out_dir + "/sweep.csv", t);

    nlohmann::json j;
    j["axis"] = axis;
    j["values"] = values;
    j["continuity_metric"] = result.continuity_metric;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t k = 0; k < values.size(); ++k) {
        nlohmann::json row = result.reports[k].to_json();
        if (!result.failures[k].empty()) row["error"] = result.failures[k];
        rows.push_back(row);
    }
    j["runs"] = rows;
    write_text_file(out_dir + "/sweep_report.json", j.dump(2) + "\n");
    return result;
}

}  // namespace leafflow
