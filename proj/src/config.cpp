#include "leafflow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "leafflow/expr.hpp"

namespace leafflow {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& msg) {
    throw std::invalid_argument("config error: " + msg);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            config_fail("unknown key \"" + it.key() + "\" in " + where);
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) config_fail("missing key \"" + key + "\" in " + where);
    if (!obj[key].is_number()) config_fail("key \"" + key + "\" in " + where + " must be a number");
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) config_fail("key \"" + key + "\" must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) config_fail("missing key \"" + key + "\" in " + where);
    if (!obj[key].is_number_integer()) config_fail("key \"" + key + "\" in " + where + " must be an integer");
    return obj[key].get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) config_fail("missing key \"" + key + "\" in " + where);
    if (!obj[key].is_string()) config_fail("key \"" + key + "\" in " + where + " must be a string");
    return obj[key].get<std::string>();
}

bool get_bool_or(const json& obj, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) config_fail("key \"" + key + "\" must be a boolean");
    return obj[key].get<bool>();
}

void validate_expression(const std::string& text, const std::string& key) {
    try {
        Expression expr(text);
    } catch (const std::exception& e) {
        config_fail("key \"" + key + "\": " + e.what());
    }
}

GridConfig parse_grid(const json& g) {
    GridConfig out;
    const std::string topo = get_string(g, "topology", "grid");
    if (topo == "circle") {
        check_keys(g, {"topology", "length", "points"}, "grid");
        out.topology = Topology::Circle;
        out.length_x = get_number(g, "length", "grid");
        out.points_x = get_int(g, "points", "grid");
    } else if (topo == "torus") {
        check_keys(g, {"topology", "length_x", "length_y", "points_x", "points_y"}, "grid");
        out.topology = Topology::Torus2;
        out.length_x = get_number(g, "length_x", "grid");
        out.length_y = get_number(g, "length_y", "grid");
        out.points_x = get_int(g, "points_x", "grid");
        out.points_y = get_int(g, "points_y", "grid");
    } else if (topo == "interval") {
        check_keys(g, {"topology", "length", "points"}, "grid");
        out.topology = Topology::Interval;
        out.length_x = get_number(g, "length", "grid");
        out.points_x = get_int(g, "points", "grid");
    } else {
        config_fail("grid topology must be circle, torus or interval, got \"" + topo + "\"");
    }
    return out;
}

ScenarioConfig parse_scenario(const json& s) {
    ScenarioConfig out;
    if (s.contains("preset")) {
        const std::string preset = get_string(s, "preset", "scenario");
        if (preset == "hopf") {
            check_keys(s, {"preset", "m"}, "scenario (hopf)");
            out.kind = ScenarioKind::Hopf;
            out.m = s.contains("m") ? get_int(s, "m", "scenario") : 1;
            if (out.m < 1) config_fail("hopf preset needs m >= 1");
        } else if (preset == "torus_burgers") {
            check_keys(s, {"preset", "psi0"}, "scenario (torus_burgers)");
            out.kind = ScenarioKind::TorusBurgers;
            out.psi0 = get_string(s, "psi0", "scenario");
            validate_expression(out.psi0, "psi0");
        } else if (preset == "twisted") {
            check_keys(s, {"preset", "f0", "n", "Phi"}, "scenario (twisted)");
            out.kind = ScenarioKind::Twisted;
            out.f0 = get_string(s, "f0", "scenario");
            validate_expression(out.f0, "f0");
            out.n = s.contains("n") ? get_int(s, "n", "scenario") : 1;
            out.Phi = get_number_or(s, "Phi", 0.0);
        } else if (preset == "revolution") {
            check_keys(s, {"preset", "rho0", "rho_left", "rho_right", "Phi"},
                       "scenario (revolution)");
            out.kind = ScenarioKind::Revolution;
            out.rho0 = get_string(s, "rho0", "scenario");
            validate_expression(out.rho0, "rho0");
            out.rho_left = get_number(s, "rho_left", "scenario");
            out.rho_right = get_number(s, "rho_right", "scenario");
            out.Phi = get_number_or(s, "Phi", 0.0);
        } else {
            config_fail("unknown scenario preset \"" + preset + "\"");
        }
        return out;
    }
    check_keys(s, {"n", "Phi", "beta_D", "T2", "hF2", "u0"}, "scenario");
    out.kind = ScenarioKind::Custom;
    out.n = get_int(s, "n", "scenario");
    out.Phi = get_number(s, "Phi", "scenario");
    out.beta_D = get_string(s, "beta_D", "scenario");
    out.T2 = s.contains("T2") ? get_string(s, "T2", "scenario") : "0";
    out.hF2 = s.contains("hF2") ? get_string(s, "hF2", "scenario") : "0";
    out.u0 = get_string(s, "u0", "scenario");
    for (const auto& [key, text] :
         {std::pair<std::string, std::string>{"beta_D", out.beta_D},
          {"T2", out.T2},
          {"hF2", out.hF2},
          {"u0", out.u0}})
        validate_expression(text, key);
    return out;
}

ReportToggles default_reports(ScenarioKind kind) {
    ReportToggles r;
    switch (kind) {
        case ScenarioKind::Hopf:
            r.stationarity = r.envelope = r.conservation = true;
            break;
        case ScenarioKind::TorusBurgers:
            r.rate = r.burgers = true;
            break;
        case ScenarioKind::Twisted:
            r.rate = true;
            break;
        case ScenarioKind::Revolution:
            break;  // the revolution pipeline has its own fixed checks
        case ScenarioKind::Custom:
            r.envelope = r.rate = true;
            break;
    }
    return r;
}

std::pair<int, int> line_and_column(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw std::invalid_argument("config parse error at line " + std::to_string(line) +
                                    ", column " + std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) config_fail("top level must be an object");
    check_keys(root,
               {"grid", "scenario", "time", "reports", "output", "override_hypotheses",
                "quiet"},
               "top level");

    RunConfig cfg;
    cfg.echo = root;
    if (!root.contains("grid")) config_fail("missing \"grid\" section");
    if (!root.contains("scenario")) config_fail("missing \"scenario\" section");
    if (!root.contains("time")) config_fail("missing \"time\" section");

    cfg.grid = parse_grid(root["grid"]);
    cfg.scenario = parse_scenario(root["scenario"]);

    const json& t = root["time"];
    check_keys(t, {"t_end", "dt", "save_every"}, "time");
    cfg.t_end = get_number(t, "t_end", "time");
    cfg.dt = get_number(t, "dt", "time");
    cfg.save_every = t.contains("save_every") ? get_int(t, "save_every", "time") : 1;
    if (!(cfg.t_end > 0.0)) config_fail("time.t_end must be > 0");
    if (!(cfg.dt > 0.0)) config_fail("time.dt must be > 0");
    if (cfg.save_every < 1) config_fail("time.save_every must be >= 1");

    if (root.contains("reports")) {
        const json& r = root["reports"];
        check_keys(r,
                   {"envelope", "conservation", "burgers", "rate", "limit_curvature",
                    "stationarity"},
                   "reports");
        cfg.reports.envelope = get_bool_or(r, "envelope", false);
        cfg.reports.conservation = get_bool_or(r, "conservation", false);
        cfg.reports.burgers = get_bool_or(r, "burgers", false);
        cfg.reports.rate = get_bool_or(r, "rate", false);
        cfg.reports.limit_curvature = get_bool_or(r, "limit_curvature", false);
        cfg.reports.stationarity = get_bool_or(r, "stationarity", false);
    } else {
        cfg.reports = default_reports(cfg.scenario.kind);
    }

    if (root.contains("output")) {
        const json& o = root["output"];
        check_keys(o, {"directory", "plots"}, "output");
        if (o.contains("directory")) cfg.out_dir = get_string(o, "directory", "output");
        cfg.plots = get_bool_or(o, "plots", true);
    }
    cfg.override_hypotheses = get_bool_or(root, "override_hypotheses", false);
    cfg.quiet = get_bool_or(root, "quiet", false);

    if (cfg.scenario.kind == ScenarioKind::Revolution &&
        cfg.grid.topology != Topology::Interval)
        config_fail("revolution scenario needs an interval grid");
    if (cfg.scenario.kind != ScenarioKind::Revolution &&
        cfg.grid.topology == Topology::Interval)
        config_fail("interval grids only drive the revolution scenario");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string preset_config(const std::string& name) {
    if (name == "hopf")
        return R"json({
  "grid": {"topology": "circle", "length": 6.283185307179586, "points": 128},
  "scenario": {"preset": "hopf", "m": 1},
  "time": {"t_end": 10.0, "dt": 1e-3, "save_every": 100}
})json";
    if (name == "torus_burgers")
        return R"json({
  "grid": {"topology": "circle", "length": 6.283185307179586, "points": 128},
  "scenario": {"preset": "torus_burgers", "psi0": "cos(x)"},
  "time": {"t_end": 14.0, "dt": 1e-3, "save_every": 20}
})json";
    if (name == "twisted")
        return R"json({
  "grid": {"topology": "circle", "length": 6.283185307179586, "points": 128},
  "scenario": {"preset": "twisted", "f0": "1+0.5*cos(x)", "n": 1, "Phi": 0.0},
  "time": {"t_end": 14.0, "dt": 1e-3, "save_every": 20}
})json";
    if (name == "revolution")
        return R"json({
  "grid": {"topology": "interval", "length": 2.0, "points": 101},
  "scenario": {"preset": "revolution", "rho0": "1 + 0.25*x + 0.3*sin(pi*x/2)",
               "rho_left": 1.0, "rho_right": 1.5, "Phi": 0.0},
  "time": {"t_end": 20.0, "dt": 1e-3, "save_every": 200}
})json";
    throw std::invalid_argument("unknown preset \"" + name + "\"");
}

std::vector<std::string> preset_names() {
    return {"hopf", "torus_burgers", "twisted", "revolution"};
}

}  // namespace leafflow
