#pragma once

// Monte Carlo engine: simulate ground truth per replicate, run each requested
// filter over the same measurements, and aggregate per-step metrics.

#include "smf/baselines.hpp"
#include "smf/config.hpp"
#include "smf/scenarios.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smf::harness {

using config::FilterKind;

/// Position-projected 2-D ellipse kept for plotting.
struct Outline {
    std::string kind;  // "updated", "predicted" or "measurement"
    Ellipsoid ellipse;
};

struct FilterStep {
    int k = 0;
    Vec estimate;
    double trace = 0.0;
    double logdet = 0.0;
    bool contained = false;
    double time_s = 0.0;
    bool failed = false;  // update skipped, prediction carried
    std::vector<Outline> outlines;
};

struct RunResult {
    int run = 0;
    std::uint64_t seed = 0;
    Vec initial_estimate;
    scenarios::Truth truth;
    std::map<FilterKind, std::vector<FilterStep>> filters;
};

struct MetricRow {
    int k = 0;
    FilterKind filter = FilterKind::dsmf;
    double trace = 0.0;
    double logdet = 0.0;
    double rmse_x = 0.0;
    double rmse_theta = 0.0;  // NaN when the state has no heading
    double contained = 0.0;   // fraction of runs
    double time_s = 0.0;
    int failures = 0;
};

struct Experiment {
    config::RunConfig config;
    int steps = 0;
    int heading_index = -1;
    std::vector<RunResult> runs;
    std::vector<MetricRow> metrics;
};

/// Slack used for set containment of the truth.
inline constexpr double kContainmentSlack = 1e-6;
/// UKF containment is judged on the 3-sigma ellipsoid.
inline constexpr double kUkfSigmaScale = 3.0;

std::uint64_t run_seed(std::uint64_t master, int run);

/// Runs one replicate. Deterministic in (config, run index).
RunResult run_replicate(const config::RunConfig& cfg, const scenarios::Scenario& sc, int run, int steps);

/// Rows ordered by k, then by the configured filter order.
std::vector<MetricRow> aggregate(const std::vector<RunResult>& runs, const std::vector<FilterKind>& filters,
                                 int steps, int heading_index);

/// Validates, runs all replicates (OpenMP across runs), aggregates.
Experiment run_experiment(const config::RunConfig& cfg);

struct FilterSummary {
    double mean_trace_after = 0.0;  // mean over k > kTransient
    double mean_rmse_x = 0.0;
    double mean_rmse_theta = 0.0;
    double containment = 0.0;
    int failures = 0;
};

inline constexpr int kTransient = 10;

FilterSummary summarize(const Experiment& e, FilterKind f);

}  // namespace smf::harness
