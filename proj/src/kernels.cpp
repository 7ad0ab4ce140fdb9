#include "smf/kernels.hpp"

#include <omp.h>

#include <cmath>

namespace smf::kernels {

namespace {

// Shared per-element arithmetic; keeping it in one place is what makes the
// serial and OpenMP kernels agree bit for bit.
inline double quad(const Mat& lifted, const Mat& minv, Eigen::Index i)
{
    return lifted.col(i).dot(minv * lifted.col(i));
}

inline double rank_one(double kappa, double w, double scale, double coef)
{
    return scale * (kappa - coef * w * w);
}

inline bool better_max(double v, int i, const Extreme& best)
{
    return best.index < 0 || v > best.value || (v == best.value && i < best.index);
}

inline bool better_min(double v, int i, const Extreme& best)
{
    return best.index < 0 || v < best.value || (v == best.value && i < best.index);
}

inline double moment_entry(const Mat& lifted, std::span<const double> w, Eigen::Index r, Eigen::Index c)
{
    double s = 0.0;
    const Eigen::Index m = lifted.cols();
    for (Eigen::Index i = 0; i < m; ++i) {
        s += w[i] * lifted(r, i) * lifted(c, i);
    }
    return s;
}

}  // namespace

namespace serial {

void kappa_from_scratch(const Mat& lifted, const Mat& minv, std::span<double> kappa)
{
    const Eigen::Index m = lifted.cols();
    for (Eigen::Index i = 0; i < m; ++i) {
        kappa[i] = quad(lifted, minv, i);
    }
}

void kappa_rank_one(const Mat& lifted, const Vec& u, double scale, double coef, std::span<double> kappa)
{
    const Eigen::Index m = lifted.cols();
    for (Eigen::Index i = 0; i < m; ++i) {
        kappa[i] = rank_one(kappa[i], lifted.col(i).dot(u), scale, coef);
    }
}

Extreme argmax(std::span<const double> values)
{
    Extreme best;
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
        if (better_max(values[i], i, best)) best = {i, values[i]};
    }
    return best;
}

Extreme argmin_supported(std::span<const double> values, std::span<const double> weights)
{
    Extreme best;
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
        if (weights[i] > 0.0 && better_min(values[i], i, best)) best = {i, values[i]};
    }
    return best;
}

Mat weighted_moment(const Mat& lifted, std::span<const double> weights)
{
    const Eigen::Index d = lifted.rows();
    Mat out(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c <= r; ++c) {
            out(r, c) = out(c, r) = moment_entry(lifted, weights, r, c);
        }
    }
    return out;
}

}  // namespace serial

namespace parallel {

void kappa_from_scratch(const Mat& lifted, const Mat& minv, std::span<double> kappa)
{
    const Eigen::Index m = lifted.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < m; ++i) {
        kappa[i] = quad(lifted, minv, i);
    }
}

void kappa_rank_one(const Mat& lifted, const Vec& u, double scale, double coef, std::span<double> kappa)
{
    const Eigen::Index m = lifted.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < m; ++i) {
        kappa[i] = rank_one(kappa[i], lifted.col(i).dot(u), scale, coef);
    }
}

Extreme argmax(std::span<const double> values)
{
    Extreme best;
    const int m = static_cast<int>(values.size());
#pragma omp parallel
    {
        Extreme local;
#pragma omp for schedule(static) nowait
        for (int i = 0; i < m; ++i) {
            if (better_max(values[i], i, local)) local = {i, values[i]};
        }
#pragma omp critical(smf_argmax)
        {
            if (local.index >= 0 && better_max(local.value, local.index, best)) best = local;
        }
    }
    return best;
}

Extreme argmin_supported(std::span<const double> values, std::span<const double> weights)
{
    Extreme best;
    const int m = static_cast<int>(values.size());
#pragma omp parallel
    {
        Extreme local;
#pragma omp for schedule(static) nowait
        for (int i = 0; i < m; ++i) {
            if (weights[i] > 0.0 && better_min(values[i], i, local)) local = {i, values[i]};
        }
#pragma omp critical(smf_argmin)
        {
            if (local.index >= 0 && better_min(local.value, local.index, best)) best = local;
        }
    }
    return best;
}

Mat weighted_moment(const Mat& lifted, std::span<const double> weights)
{
    // Parallel over the d(d+1)/2 entries; each entry sums in index order.
    const Eigen::Index d = lifted.rows();
    const Eigen::Index entries = d * (d + 1) / 2;
    Mat out(d, d);
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index k = 0; k < entries; ++k) {
        Eigen::Index r = static_cast<Eigen::Index>((std::sqrt(8.0 * k + 1.0) - 1.0) / 2.0);
        while (r * (r + 1) / 2 > k) --r;
        while ((r + 1) * (r + 2) / 2 <= k) ++r;
        const Eigen::Index c = k - r * (r + 1) / 2;
        out(r, c) = out(c, r) = moment_entry(lifted, weights, r, c);
    }
    return out;
}

}  // namespace parallel

bool use_parallel(Policy policy, int m)
{
    switch (policy) {
    case Policy::serial:
        return false;
    case Policy::parallel:
        return true;
    case Policy::automatic:
        return m >= kParallelThreshold && omp_get_max_threads() > 1 && !omp_in_parallel();
    }
    return false;
}

void kappa_from_scratch(Policy policy, const Mat& lifted, const Mat& minv, std::span<double> kappa)
{
    if (use_parallel(policy, static_cast<int>(lifted.cols()))) {
        parallel::kappa_from_scratch(lifted, minv, kappa);
    } else {
        serial::kappa_from_scratch(lifted, minv, kappa);
    }
}

void kappa_rank_one(Policy policy, const Mat& lifted, const Vec& u, double scale, double coef,
                    std::span<double> kappa)
{
    if (use_parallel(policy, static_cast<int>(lifted.cols()))) {
        parallel::kappa_rank_one(lifted, u, scale, coef, kappa);
    } else {
        serial::kappa_rank_one(lifted, u, scale, coef, kappa);
    }
}

Extreme argmax(Policy policy, std::span<const double> values)
{
    return use_parallel(policy, static_cast<int>(values.size())) ? parallel::argmax(values) : serial::argmax(values);
}

Extreme argmin_supported(Policy policy, std::span<const double> values, std::span<const double> weights)
{
    return use_parallel(policy, static_cast<int>(values.size())) ? parallel::argmin_supported(values, weights)
                                                                  : serial::argmin_supported(values, weights);
}

Mat weighted_moment(Policy policy, const Mat& lifted, std::span<const double> weights)
{
    return use_parallel(policy, static_cast<int>(lifted.cols())) ? parallel::weighted_moment(lifted, weights)
                                                                  : serial::weighted_moment(lifted, weights);
}

}  // namespace smf::kernels
