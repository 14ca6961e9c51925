#ifndef LEAFFLOW_RUNNER_HPP
#define LEAFFLOW_RUNNER_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "leafflow/config.hpp"
#include "leafflow/heatflow.hpp"

namespace leafflow {

struct VerdictEntry {
    std::string name;
    std::string status;  // pass | fail | hypotheses-not-met
    double metric = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct RunReport {
    nlohmann::json config_echo;
    std::string stage_failed;  // empty on success

    // spectral summary (periodic pipelines)
    double lambda0 = 0.0, lambda1 = 0.0, gap = 0.0, d_u0_e0 = 0.0;
    std::string econd_u;
    double econd_u_margin = 0.0;
    bool econd1_satisfied = false;
    double econd1_margin = 0.0;

    std::vector<VerdictEntry> verdicts;
    double wall_seconds = 0.0;

    bool all_pass() const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Deterministic pipeline: grid -> scenario -> eigensolve -> scale ->
/// hypothesis check -> evolve -> post-process -> artifacts under
/// cfg.out_dir.  Any stage error surfaces with the stage named.
RunReport run(const RunConfig& cfg);

struct SweepResult {
    std::vector<RunReport> reports;
    std::vector<double> values;
    std::vector<std::string> failures;      // per-run error text, empty = ok
    double continuity_metric = 0.0;         // max adjacent limit-field gap
    bool all_pass() const;
};

/// One run per axis value; the axis is a dotted path into the config JSON
/// (for instance "scenario.Phi").  Individual failures are recorded and
/// the sweep continues.
SweepResult sweep(const std::string& config_text, const std::string& axis,
                  const std::vector<double>& values, const std::string& out_dir);

}  // namespace leafflow

#endif
