#include "smf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace smf::config {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    double out = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
    return out;
}

long long to_int(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    long long out = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

Vec to_vec(const std::string& key, const std::string& v, int n)
{
    std::vector<double> xs;
    try {
        xs = parse_list(v);
    } catch (const ConfigError& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
    if (static_cast<int>(xs.size()) != n) {
        throw ConfigError("config key '" + key + "': expected " + std::to_string(n) + " values");
    }
    return Eigen::Map<const Vec>(xs.data(), n);
}

Mat to_diag(const std::string& key, const std::string& v, int n)
{
    const Vec d = to_vec(key, v, n);
    if ((d.array() <= 0.0).any()) throw ConfigError("config key '" + key + "': entries must be positive");
    return d.asDiagonal();
}

constexpr const char* kSectionAlias = "scenario_section";

const std::set<std::string> kRadarKeys{"T", "sensor", "q_scale", "R", "x0", "P0", "steps"};
const std::set<std::string> kRobotKeys{"T0", "u_p", "u_r", "landmark", "Q", "R", "x0", "P0", "steps", "sqrt_heading"};

}  // namespace

const char* filter_name(FilterKind f)
{
    switch (f) {
    case FilterKind::dsmf:
        return "dsmf";
    case FilterKind::esmf:
        return "esmf";
    case FilterKind::ukf:
        return "ukf";
    }
    return "?";
}

std::vector<FilterKind> parse_filters(const std::string& list)
{
    std::vector<FilterKind> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        FilterKind f;
        if (tok == "dsmf") f = FilterKind::dsmf;
        else if (tok == "esmf") f = FilterKind::esmf;
        else if (tok == "ukf") f = FilterKind::ukf;
        else throw ConfigError("unknown filter '" + tok + "' (expected dsmf, esmf or ukf)");
        if (std::find(out.begin(), out.end(), f) != out.end()) throw ConfigError("filter '" + tok + "' listed twice");
        out.push_back(f);
    }
    if (out.empty()) throw ConfigError("filter list is empty");
    return out;
}

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_double("list", tok));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

dsmf::SizeCriterion parse_size(const std::string& s)
{
    if (s == "trace") return dsmf::SizeCriterion::trace;
    if (s == "logdet") return dsmf::SizeCriterion::logdet;
    throw ConfigError("size_criterion must be trace or logdet, got '" + s + "'");
}

std::string size_name(dsmf::SizeCriterion s) { return s == dsmf::SizeCriterion::trace ? "trace" : "logdet"; }

SamplingMode parse_sampling(const std::string& s)
{
    if (s == "boundary") return SamplingMode::boundary;
    if (s == "interior") return SamplingMode::interior;
    if (s == "mixed") return SamplingMode::mixed;
    throw ConfigError("sampling must be boundary, interior or mixed, got '" + s + "'");
}

std::string sampling_name(SamplingMode s)
{
    switch (s) {
    case SamplingMode::boundary:
        return "boundary";
    case SamplingMode::interior:
        return "interior";
    case SamplingMode::mixed:
        return "mixed";
    }
    return "?";
}

RunConfig parse_config(std::istream& in)
{
    // A flat `scenario` key and a [scenario] section would collide in the
    // property tree, so the section is renamed before parsing.
    std::ostringstream text;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line) == "[scenario]") line = "[" + std::string(kSectionAlias) + "]";
        text << line << '\n';
    }
    std::istringstream renamed(text.str());
    pt::ptree tree;
    try {
        pt::read_ini(renamed, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig cfg;
    for (const auto& [key, node] : tree) {
        if (!node.empty()) {
            if (key != kSectionAlias) throw ConfigError("unknown config section [" + key + "]");
            for (const auto& [k, v] : node) cfg.scenario_overrides[k] = trim(v.data());
            continue;
        }
        const std::string v = trim(node.data());
        if (key == "scenario") cfg.scenario = v;
        else if (key == "filters") cfg.filters = parse_filters(v);
        else if (key == "runs") cfg.runs = static_cast<int>(to_int(key, v));
        else if (key == "steps") cfg.steps = static_cast<int>(to_int(key, v));
        else if (key == "master_seed") cfg.master_seed = static_cast<std::uint64_t>(to_int(key, v));
        else if (key == "m_samples") cfg.m_samples = static_cast<int>(to_int(key, v));
        else if (key == "tol") cfg.tol = to_double(key, v);
        else if (key == "size_criterion") cfg.size_criterion = parse_size(v);
        else if (key == "sampling") cfg.sampling = parse_sampling(v);
        else if (key == "output") cfg.output = v;
        else if (key == "record_timing") cfg.record_timing = to_bool(key, v);
        else if (key == "ellipse_runs") cfg.ellipse_runs = static_cast<int>(to_int(key, v));
        else if (key == "init_scale") cfg.init_scale = to_double(key, v);
        else if (key == "noise_cov_scale") cfg.noise_cov_scale = to_double(key, v);
        else if (key == "remainder_samples") cfg.remainder_samples = static_cast<int>(to_int(key, v));
        else if (key == "on_empty") {
            if (v == "carry") cfg.on_empty = EmptyPolicy::carry;
            else if (v == "error") cfg.on_empty = EmptyPolicy::error;
            else throw ConfigError("on_empty must be carry or error, got '" + v + "'");
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void validate(const RunConfig& cfg)
{
    if (cfg.scenario != "radar" && cfg.scenario != "robot") {
        throw ConfigError("scenario must be radar or robot, got '" + cfg.scenario + "'");
    }
    if (cfg.filters.empty()) throw ConfigError("filter list is empty");
    if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
    if (cfg.steps < 0) throw ConfigError("steps must be >= 0");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (!(cfg.init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
    if (cfg.noise_cov_scale < 0.0) throw ConfigError("noise_cov_scale must be >= 0");
    if (cfg.remainder_samples < 1) throw ConfigError("remainder_samples must be >= 1");
    if (cfg.ellipse_runs < 0) throw ConfigError("ellipse_runs must be >= 0");
    if (cfg.output.empty()) throw ConfigError("output directory is empty");
    const scenarios::Scenario s = build_scenario(cfg);
    if (cfg.m_samples < s.model.state_dim + 1) {
        throw ConfigError("m_samples must be at least state dimension + 1 = " + std::to_string(s.model.state_dim + 1));
    }
}

scenarios::Scenario build_scenario(const RunConfig& cfg)
{
    const auto& ov = cfg.scenario_overrides;
    try {
        if (cfg.scenario == "radar") {
            scenarios::RadarParams p;
            for (const auto& [k, v] : ov) {
                if (!kRadarKeys.count(k)) throw ConfigError("unknown radar scenario key '" + k + "'");
                if (k == "T") p.T = to_double(k, v);
                else if (k == "sensor") p.sensor = to_vec(k, v, 2);
                else if (k == "q_scale") p.q_scale = to_double(k, v);
                else if (k == "R") p.R = to_diag(k, v, 2);
                else if (k == "x0") p.x0 = to_vec(k, v, 4);
                else if (k == "P0") p.P0 = to_diag(k, v, 4);
                else if (k == "steps") p.steps = static_cast<int>(to_int(k, v));
            }
            if (!(p.T > 0.0)) throw ConfigError("radar T must be positive");
            if (p.q_scale < 0.0) throw ConfigError("radar q_scale must be >= 0");
            return scenarios::radar(p);
        }
        if (cfg.scenario == "robot") {
            scenarios::RobotParams p;
            for (const auto& [k, v] : ov) {
                if (!kRobotKeys.count(k)) throw ConfigError("unknown robot scenario key '" + k + "'");
                if (k == "T0") p.T0 = to_double(k, v);
                else if (k == "u_p") p.u_p = to_double(k, v);
                else if (k == "u_r") p.u_r = to_double(k, v);
                else if (k == "landmark") p.landmark = to_vec(k, v, 2);
                else if (k == "Q") p.Q = to_diag(k, v, 3);
                else if (k == "R") p.R = to_diag(k, v, 2);
                else if (k == "x0") p.x0 = to_vec(k, v, 3);
                else if (k == "P0") p.P0 = to_diag(k, v, 3);
                else if (k == "steps") p.steps = static_cast<int>(to_int(k, v));
                else if (k == "sqrt_heading") p.sqrt_heading = to_bool(k, v);
            }
            if (p.u_r == 0.0) throw ConfigError("robot u_r must be nonzero");
            return scenarios::robot(p);
        }
    } catch (const DimensionError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("scenario must be radar or robot, got '" + cfg.scenario + "'");
}

int effective_steps(const RunConfig& cfg)
{
    return cfg.steps > 0 ? cfg.steps : build_scenario(cfg).steps;
}

}  // namespace smf::config
