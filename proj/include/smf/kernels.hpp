#pragma once

// Data-parallel inner loops of the Frank-Wolfe MVEE solver.
//
// Every kernel has a serial reference in `serial::` and an OpenMP version in
// `parallel::` with identical per-element arithmetic, so both produce
// bit-identical results (argmax/argmin break ties by lowest index). The
// dispatching overloads pick one according to a Policy.

#include "smf/types.hpp"

#include <span>

namespace smf::kernels {

enum class Policy { serial, parallel, automatic };

/// Point count at which `automatic` switches to the OpenMP kernels.
inline constexpr int kParallelThreshold = 8192;

struct Extreme {
    int index = -1;
    double value = 0.0;
};

namespace serial {

/// kappa[i] = lifted_i^T minv lifted_i for every column of `lifted`.
void kappa_from_scratch(const Mat& lifted, const Mat& minv, std::span<double> kappa);

/// kappa[i] = scale * (kappa[i] - coef * (lifted_i^T u)^2)
void kappa_rank_one(const Mat& lifted, const Vec& u, double scale, double coef, std::span<double> kappa);

/// Largest entry.
Extreme argmax(std::span<const double> values);

/// Smallest entry among indices with weight > 0.
Extreme argmin_supported(std::span<const double> values, std::span<const double> weights);

/// sum_i w_i * lifted_i lifted_i^T
Mat weighted_moment(const Mat& lifted, std::span<const double> weights);

}  // namespace serial

namespace parallel {

void kappa_from_scratch(const Mat& lifted, const Mat& minv, std::span<double> kappa);
void kappa_rank_one(const Mat& lifted, const Vec& u, double scale, double coef, std::span<double> kappa);
Extreme argmax(std::span<const double> values);
Extreme argmin_supported(std::span<const double> values, std::span<const double> weights);
Mat weighted_moment(const Mat& lifted, std::span<const double> weights);

}  // namespace parallel

bool use_parallel(Policy policy, int m);

void kappa_from_scratch(Policy policy, const Mat& lifted, const Mat& minv, std::span<double> kappa);
void kappa_rank_one(Policy policy, const Mat& lifted, const Vec& u, double scale, double coef,
                    std::span<double> kappa);
Extreme argmax(Policy policy, std::span<const double> values);
Extreme argmin_supported(Policy policy, std::span<const double> values, std::span<const double> weights);
Mat weighted_moment(Policy policy, const Mat& lifted, std::span<const double> weights);

}  // namespace smf::kernels
