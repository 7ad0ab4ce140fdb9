#pragma once

// Stand-alone numerical studies: MVEE solve timings on standard-uniform
// clouds, and the single-update size sweep over the prediction scale sigma.

#include "smf/dsmf.hpp"
#include "smf/kernels.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace smf::studies {

struct AffineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y);

struct BenchOptions {
    std::vector<int> n{2, 6};
    std::vector<int> m{50, 100, 200, 400, 600, 800, 1000};
    int trials = 20;
    double tol = 1e-7;
    std::uint64_t seed = 1;
    kernels::Policy policy = kernels::Policy::automatic;
};

struct BenchRow {
    int n = 0;
    int m = 0;
    int trials = 0;
    double mean_time_s = 0.0;
    double mean_iterations = 0.0;
    double time_per_iteration_s = 0.0;
    int unconverged = 0;
};

/// Mean wall time of fw_solve over `trials` standard-uniform clouds per cell.
std::vector<BenchRow> bench_mvee(const BenchOptions& opts);
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

/// Median per-iteration time of fw_solve at a fixed iteration budget, one
/// entry per m. Cloud generation and setup are amortized over the budget.
std::vector<double> per_iteration_cost(int n, const std::vector<int>& ms, int iterations, int trials,
                                       std::uint64_t seed);

struct SweepOptions {
    std::vector<double> sigmas{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    int replicates = 50;
    int m_samples = 200;
    double tol = 1e-7;
    std::uint64_t seed = 7;
};

struct SweepRow {
    double sigma = 0.0;
    double dsmf_logdet = 0.0;  // mean over successful replicates
    double esmf_logdet = 0.0;
    int dsmf_failures = 0;
    int esmf_failures = 0;
};

/// Two-state polar measurement model with the sensor at the origin and
/// R = diag(10, 1), used by the sweep.
dsmf::SystemModel sweep_model();

/// Single measurement update of the prediction {(10, 20), sigma I} by DSMF
/// and ESMF under the logdet criterion.
std::vector<SweepRow> sweep_sigma(const SweepOptions& opts);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace smf::studies
