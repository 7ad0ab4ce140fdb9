#pragma once

// Run configuration: flat `key = value` pairs plus an optional [scenario]
// section overriding preset constants. Unknown keys are rejected.

#include "smf/dsmf.hpp"
#include "smf/scenarios.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace smf::config {

enum class FilterKind { dsmf, esmf, ukf };

const char* filter_name(FilterKind f);
/// Parses "dsmf,esmf,ukf" (any order, no duplicates). Throws ConfigError.
std::vector<FilterKind> parse_filters(const std::string& list);

enum class EmptyPolicy { carry, error };

struct RunConfig {
    std::string scenario = "radar";
    std::vector<FilterKind> filters{FilterKind::dsmf, FilterKind::esmf, FilterKind::ukf};
    int runs = 50;
    int steps = 0;  // 0 selects the scenario default
    std::uint64_t master_seed = 42;
    int m_samples = 200;
    double tol = 1e-7;
    dsmf::SizeCriterion size_criterion = dsmf::SizeCriterion::trace;
    SamplingMode sampling = SamplingMode::boundary;
    std::string output = "out";
    bool record_timing = false;
    int ellipse_runs = 1;
    double init_scale = 0.25;
    double noise_cov_scale = 0.0;  // 0: 1 / (dim + 2)
    int remainder_samples = 500;
    EmptyPolicy on_empty = EmptyPolicy::carry;
    std::map<std::string, std::string> scenario_overrides;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
/// Throws ConfigError naming the first offending field.
void validate(const RunConfig& cfg);

/// Preset plus [scenario] overrides.
scenarios::Scenario build_scenario(const RunConfig& cfg);
int effective_steps(const RunConfig& cfg);

dsmf::SizeCriterion parse_size(const std::string& s);
std::string size_name(dsmf::SizeCriterion s);
SamplingMode parse_sampling(const std::string& s);
std::string sampling_name(SamplingMode s);

/// Comma-separated doubles.
std::vector<double> parse_list(const std::string& s);

}  // namespace smf::config
