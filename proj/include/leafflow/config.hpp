#ifndef LEAFFLOW_CONFIG_HPP
#define LEAFFLOW_CONFIG_HPP

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "leafflow/leafgrid.hpp"

namespace leafflow {

enum class ScenarioKind { Hopf, TorusBurgers, Twisted, Revolution, Custom };

struct GridConfig {
    Topology topology = Topology::Circle;
    double length_x = 2.0 * M_PI;
    double length_y = 2.0 * M_PI;
    int points_x = 128;
    int points_y = 16;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Custom;
    // hopf
    int m = 1;
    // torus_burgers
    std::string psi0;
    // twisted
    std::string f0;
    // custom
    int n = 1;
    double Phi = 0.0;
    std::string beta_D = "0";
    std::string T2 = "0";
    std::string hF2 = "0";
    std::string u0 = "1";
    // revolution
    std::string rho0;
    double rho_left = 1.0;
    double rho_right = 1.0;
};

struct ReportToggles {
    bool envelope = false;
    bool conservation = false;
    bool burgers = false;
    bool rate = false;
    bool limit_curvature = false;
    bool stationarity = false;
};

struct RunConfig {
    GridConfig grid;
    ScenarioConfig scenario;
    double t_end = 1.0;
    double dt = 1e-3;
    int save_every = 1;
    ReportToggles reports;
    std::string out_dir = "out";
    bool plots = true;
    bool override_hypotheses = false;
    bool quiet = false;
    nlohmann::json echo;
};

/// Parses and validates a JSON run configuration.  Unknown keys are hard
/// errors naming the key; parse errors carry line and column.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// The built-in preset configurations, as JSON text.
std::string preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace leafflow

#endif
