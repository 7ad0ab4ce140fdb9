#include "smf/kernels.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include <vector>

using namespace smf;
using namespace smf::kernels;

namespace {

struct Fixture {
    Mat lifted;
    Mat minv;
    Vec u;
    std::vector<double> weights;
};

Fixture make(int n, int m, unsigned seed)
{
    Rng rng(seed);
    Fixture f;
    f.lifted.resize(n + 1, m);
    f.lifted.topRows(n) = smf::testing::uniform_cloud(n, m, rng);
    f.lifted.row(n).setOnes();
    f.minv = smf::testing::random_spd(n + 1, rng);
    f.u = smf::testing::random_vec(n + 1, rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < m; ++i) f.weights.push_back(i % 7 == 0 ? 0.0 : unif(rng));
    return f;
}

}  // namespace

TEST(Kernels, KappaFromScratchMatchesDirect)
{
    const Fixture f = make(3, 1000, 1);
    std::vector<double> a(1000), b(1000);
    serial::kappa_from_scratch(f.lifted, f.minv, a);
    parallel::kappa_from_scratch(f.lifted, f.minv, b);
    EXPECT_EQ(a, b);
    for (int i = 0; i < 1000; i += 97) {
        EXPECT_NEAR(a[i], f.lifted.col(i).dot(f.minv * f.lifted.col(i)), 1e-12);
    }
}

TEST(Kernels, RankOneUpdateSerialEqualsParallel)
{
    const Fixture f = make(5, 5000, 2);
    std::vector<double> a(5000, 3.0), b(5000, 3.0);
    serial::kappa_rank_one(f.lifted, f.u, 1.25, 0.1, a);
    parallel::kappa_rank_one(f.lifted, f.u, 1.25, 0.1, b);
    EXPECT_EQ(a, b);
    const double w = f.lifted.col(17).dot(f.u);
    EXPECT_NEAR(a[17], 1.25 * (3.0 - 0.1 * w * w), 1e-13);
}

TEST(Kernels, ArgExtremesBreakTiesByLowestIndex)
{
    const std::vector<double> v{1.0, 5.0, 2.0, 5.0, 0.5, 0.5};
    const std::vector<double> w{1.0, 1.0, 1.0, 1.0, 0.0, 1.0};
    EXPECT_EQ(serial::argmax(v).index, 1);
    EXPECT_EQ(parallel::argmax(v).index, 1);
    EXPECT_EQ(serial::argmin_supported(v, w).index, 5);
    EXPECT_EQ(parallel::argmin_supported(v, w).index, 5);
}

TEST(Kernels, ArgExtremesAgreeOnLargeInputs)
{
    const Fixture f = make(2, 20000, 3);
    std::vector<double> k(20000);
    serial::kappa_from_scratch(f.lifted, f.minv, k);
    const Extreme sa = serial::argmax(k), pa = parallel::argmax(k);
    EXPECT_EQ(sa.index, pa.index);
    EXPECT_EQ(sa.value, pa.value);
    const Extreme sm = serial::argmin_supported(k, f.weights), pm = parallel::argmin_supported(k, f.weights);
    EXPECT_EQ(sm.index, pm.index);
    EXPECT_GT(f.weights[sm.index], 0.0);
}

TEST(Kernels, WeightedMomentBitIdentical)
{
    const Fixture f = make(6, 3000, 4);
    const Mat a = serial::weighted_moment(f.lifted, f.weights);
    const Mat b = parallel::weighted_moment(f.lifted, f.weights);
    EXPECT_EQ(a, b);
    const Eigen::Map<const Vec> w(f.weights.data(), static_cast<Eigen::Index>(f.weights.size()));
    const Mat direct = f.lifted * w.asDiagonal() * f.lifted.transpose();
    EXPECT_LT((a - direct).norm(), 1e-10 * direct.norm());
}

TEST(Kernels, PolicyDispatch)
{
    EXPECT_FALSE(use_parallel(Policy::serial, 1 << 20));
    EXPECT_TRUE(use_parallel(Policy::parallel, 10));
    EXPECT_FALSE(use_parallel(Policy::automatic, 10));
    if (omp_get_max_threads() > 1) EXPECT_TRUE(use_parallel(Policy::automatic, kParallelThreshold));
}
