#include "smf/scenarios.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace smf;
using namespace smf::scenarios;

TEST(Radar, TransitionAndNoiseBlocks)
{
    const Mat F = radar_transition(2.0);
    Mat ref(4, 4);
    ref << 1, 0, 2, 0, 0, 1, 0, 2, 0, 0, 1, 0, 0, 0, 0, 1;
    EXPECT_EQ(F, ref);
    const Mat Q = radar_process_noise(1.0, 10.0);
    Mat qref(4, 4);
    qref << 10.0 / 3, 0, 5, 0, 0, 10.0 / 3, 0, 5, 5, 0, 10, 0, 0, 5, 0, 10;
    EXPECT_LT((Q - qref).norm(), 1e-14);
    // The block matrix is positive definite: det of [1/3 1/2; 1/2 1] = 1/12.
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(Q).eigenvalues().minCoeff(), 0.0);
}

TEST(Radar, NoiselessRoundTrip)
{
    const dsmf::SystemModel m = radar_model();
    const Eigen::Vector4d x(100, 200, 5, 5);
    const Vec p = m.h_inv(m.h(x), Vec::Zero(2), {});
    EXPECT_LT((p - m.projection * x).norm(), 1e-12);
    EXPECT_NEAR(p[0], 100.0, 1e-12);
    EXPECT_NEAR(p[1], 200.0, 1e-12);
}

TEST(Radar, SensorAtOriginHandValues)
{
    RadarParams rp;
    rp.sensor = Eigen::Vector2d(0, 0);
    const dsmf::SystemModel m = radar_model(rp);
    const Vec y = m.h(Eigen::Vector4d(10, 20, 0, 0));
    EXPECT_NEAR(y[0], std::sqrt(500.0), 1e-12);
    EXPECT_NEAR(y[1], std::atan2(20.0, 10.0), 1e-15);
}

TEST(Radar, ProjectionOfInitialState)
{
    const Scenario s = radar();
    EXPECT_EQ(Vec(s.model.projection * s.x0), Vec(Eigen::Vector2d(50, 30)));
    EXPECT_EQ(s.steps, 60);
    EXPECT_EQ(s.heading_index, -1);
    EXPECT_NO_THROW(s.model.validate());
}

TEST(Radar, NegativeRangeIsADomainError)
{
    const dsmf::SystemModel m = radar_model();
    EXPECT_THROW(m.h_inv(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(2.0, 0.0), {}), DomainError);
}

TEST(Radar, AnalyticJacobianMatchesDifferences)
{
    const dsmf::SystemModel m = radar_model();
    const Eigen::Vector4d x(50, 30, 5, 5);
    const Mat num = dsmf::numeric_jacobian([&](const Vec& z) { return m.h(z); }, x);
    EXPECT_LT((m.h_jacobian(x) - num).norm(), 1e-7);
}

TEST(Robot, OneMotionStepByHand)
{
    const dsmf::SystemModel m = robot_model();
    const Vec x1 = m.f(Eigen::Vector3d(10, 10, 1), 0);
    const double r = 0.085 / 0.015;
    EXPECT_NEAR(x1[2], 1.015, 1e-15);
    EXPECT_NEAR(x1[0], 10 - r * (std::sin(1.0) - std::sin(1.015)), 1e-13);
    EXPECT_NEAR(x1[1], 10 + r * (std::cos(1.0) - std::cos(1.015)), 1e-13);
    // A turn of 0.015 rad at speed 0.085 covers a chord of about 0.085.
    EXPECT_NEAR((x1.head(2) - Eigen::Vector2d(10, 10)).norm(), 0.085, 1e-5);
}

TEST(Robot, NoiselessHeadingGrowsLinearly)
{
    RobotParams rp;
    rp.Q = 1e-30 * Mat::Identity(3, 3);
    rp.R = 1e-30 * Mat::Identity(2, 2);
    Rng rng(1);
    const Truth t = simulate_truth(robot(rp), 100, rng);
    for (int k = 0; k <= 100; ++k) EXPECT_NEAR(t.states[k][2], 1.0 + 0.015 * k, 1e-12);
}

TEST(Robot, NoiselessInverseRecoversPosition)
{
    const dsmf::SystemModel m = robot_model();
    const Eigen::Vector3d x(31.5, 12.25, 2.3);
    const double aux[] = {x[2]};
    const Vec p = m.h_inv(m.h(x), Vec::Zero(2), aux);
    EXPECT_LT((p - x.head(2)).norm(), 1e-12);
}

TEST(Robot, InverseIsExactWithNoise)
{
    // y = h(x) + v, so h_inv(y, v, theta) must give back the position.
    const dsmf::SystemModel m = robot_model();
    const Eigen::Vector3d x(20, 70, -0.4);
    const Eigen::Vector2d v(0.3, -0.6);
    const double aux[] = {x[2]};
    EXPECT_LT((m.h_inv(m.h(x) + v, v, aux) - x.head(2)).norm(), 1e-12);
}

TEST(Robot, AnalyticJacobiansMatchDifferences)
{
    const dsmf::SystemModel m = robot_model();
    const Eigen::Vector3d x(12, 7, 0.8);
    const Mat jf = dsmf::numeric_jacobian([&](const Vec& z) { return m.f(z, 0); }, x);
    EXPECT_LT((m.f_jacobian(x, 0) - jf).norm(), 1e-8);
    const Mat jh = dsmf::numeric_jacobian([&](const Vec& z) { return m.h(z); }, x);
    EXPECT_LT((m.h_jacobian(x) - jh).norm(), 1e-8);
}

TEST(Robot, HeadingIntervalRawAndSqrt)
{
    const Ellipsoid pred(Eigen::Vector3d(0, 0, 1.5), Eigen::Vector3d(1, 1, 0.04).asDiagonal().toDenseMatrix());
    const auto raw = robot_model().aux_bounds(pred);
    ASSERT_EQ(raw.size(), 1u);
    EXPECT_NEAR(raw[0].lo, 1.46, 1e-15);
    EXPECT_NEAR(raw[0].hi, 1.54, 1e-15);
    RobotParams rp;
    rp.sqrt_heading = true;
    const auto sq = robot_model(rp).aux_bounds(pred);
    EXPECT_NEAR(sq[0].lo, 1.3, 1e-15);
    EXPECT_NEAR(sq[0].hi, 1.7, 1e-15);
}

TEST(Robot, ZeroWidthHeadingAndNoiseIsAPoint)
{
    RobotParams rp;
    rp.R = 1e-24 * Mat::Identity(2, 2);
    const dsmf::SystemModel m = robot_model(rp);
    const Eigen::Vector3d x(30, 20, 0.5);
    const double aux[] = {0.5};
    Rng rng(4);
    const PointCloud vs = sample_boundary(Ellipsoid(Vec::Zero(2), m.R), 50, rng);
    for (int i = 0; i < vs.size(); ++i) {
        EXPECT_LT((m.h_inv(m.h(x), vs.point(i), aux) - x.head(2)).norm(), 1e-9);
    }
}

TEST(Robot, RejectsZeroTurnRate)
{
    RobotParams rp;
    rp.u_r = 0.0;
    EXPECT_THROW(robot_model(rp), DimensionError);
}

TEST(Truth, ZeroNoiseIsDeterministicRollout)
{
    RadarParams rp;
    rp.q_scale = 0.0;
    rp.R = Mat::Zero(2, 2);
    const Scenario s = radar(rp);
    Rng rng(1);
    const Truth t = simulate_truth(s, 10, rng);
    Vec x = s.x0;
    for (int k = 1; k <= 10; ++k) {
        x = radar_transition(1.0) * x;
        EXPECT_LT((t.states[k] - x).norm(), 1e-12);
        EXPECT_LT((t.measurements[k - 1] - s.model.h(x)).norm(), 1e-12);
    }
}

TEST(Truth, NoisesLieInTheirEllipsoids)
{
    for (const Scenario& s : {radar(), robot()}) {
        Rng rng(2);
        const Truth t = simulate_truth(s, 200, rng);
        ASSERT_EQ(t.states.size(), 201u);
        ASSERT_EQ(t.measurements.size(), 200u);
        for (int k = 0; k < 200; ++k) {
            EXPECT_LE(smf::testing::qform(Vec::Zero(s.model.state_dim), s.model.Q, t.process_noise[k]), 1.0 + 1e-9);
            EXPECT_LE(smf::testing::qform(Vec::Zero(s.model.meas_dim), s.model.R, t.meas_noise[k]), 1.0 + 1e-9);
            const Vec x = s.model.f(t.states[k], k) + t.process_noise[k];
            EXPECT_LT((x - t.states[k + 1]).norm(), 1e-12);
            EXPECT_LT((s.model.h(x) + t.meas_noise[k] - t.measurements[k]).norm(), 1e-12);
        }
    }
}

TEST(Truth, SameSeedSameTrajectory)
{
    const Scenario s = radar();
    Rng a(42), b(42);
    const Truth ta = simulate_truth(s, 60, a);
    const Truth tb = simulate_truth(s, 60, b);
    for (int k = 0; k <= 60; ++k) EXPECT_EQ(ta.states[k], tb.states[k]);
    for (int k = 0; k < 60; ++k) EXPECT_EQ(ta.measurements[k], tb.measurements[k]);
}

TEST(Truth, InitialEstimateInsideScaledPrior)
{
    const Scenario s = robot();
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const Vec x = initial_estimate(s, 0.25, rng);
        EXPECT_LE(smf::testing::qform(s.x0, 0.25 * s.P0, x), 1.0 + 1e-12);
    }
    EXPECT_EQ(initial_estimate(s, 0.0, rng), s.x0);
}
