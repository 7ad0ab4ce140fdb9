#include "smf/baselines.hpp"
#include "smf/scenarios.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace smf;
using namespace smf::baselines;
using smf::testing::random_spd;
using smf::testing::random_vec;

namespace {

double rel_frob(const Mat& a, const Mat& ref) { return (a - ref).norm() / ref.norm(); }

dsmf::SystemModel linear_model(const Mat& F, const Mat& H, const Mat& Q, const Mat& R)
{
    dsmf::SystemModel m;
    m.state_dim = static_cast<int>(F.rows());
    m.meas_dim = static_cast<int>(H.rows());
    m.f = [F](const Vec& x, int) -> Vec { return F * x; };
    m.f_jacobian = [F](const Vec&, int) -> Mat { return F; };
    m.h = [H](const Vec& x) -> Vec { return H * x; };
    m.h_jacobian = [H](const Vec&) -> Mat { return H; };
    m.h_inv = [](const Vec& y, const Vec& v, std::span<const double>) -> Vec { return y - v; };
    m.projection = H;
    m.Q = Q;
    m.R = R;
    return m;
}

// Textbook Kalman filter step.
GaussianBelief kalman(const GaussianBelief& b, const Mat& F, const Mat& H, const Mat& Qc, const Mat& Rc, const Vec& y)
{
    const Vec xp = F * b.mean;
    const Mat pp = F * b.covariance * F.transpose() + Qc;
    const Mat S = H * pp * H.transpose() + Rc;
    const Mat K = pp * H.transpose() * S.inverse();
    return {xp + K * (y - H * xp), pp - K * S * K.transpose()};
}

}  // namespace

TEST(Ukf, WeightsSumToOne)
{
    for (const int n : {1, 2, 4, 7}) {
        for (const double alpha : {1.0, 0.5, 1e-1}) {
            UkfOptions o;
            o.alpha = alpha;
            o.kappa = 3.0 - n;
            if (n + o.kappa <= 0) o.kappa = 0.0;
            const SigmaWeights w = sigma_weights(n, o);
            EXPECT_NEAR(w.mean.sum(), 1.0, 1e-12);
            EXPECT_EQ(w.mean.size(), 2 * n + 1);
        }
    }
}

TEST(Ukf, UniformNoiseCovariance)
{
    // Uniform on the unit disk: E[x^2] = 1/4 = 1/(2 + 2).
    const Mat c = noise_covariance(Mat::Identity(2, 2), UkfOptions{});
    EXPECT_NEAR(c(0, 0), 0.25, 1e-15);
    Rng rng(1);
    const PointCloud s = sample_interior(Ellipsoid(Vec::Zero(3), Mat::Identity(3, 3)), 200000, rng);
    const Mat emp = s.points * s.points.transpose() / s.size();
    EXPECT_LT((emp - noise_covariance(Mat::Identity(3, 3), UkfOptions{})).norm(), 0.01);
    UkfOptions o;
    o.noise_cov_scale = 1.0;
    EXPECT_EQ(noise_covariance(Mat::Identity(2, 2), o), Mat::Identity(2, 2));
}

TEST(Ukf, LinearModelMatchesKalmanFilter)
{
    Rng rng(2);
    const Mat F = scenarios::radar_transition(1.0);
    const Mat Q = scenarios::radar_process_noise(1.0, 2.0);
    const Mat H = Mat::Identity(2, 4);
    const Mat R = random_spd(2, rng);
    const dsmf::SystemModel m = linear_model(F, H, Q, R);
    const UkfOptions o;
    GaussianBelief ukf{random_vec(4, rng), random_spd(4, rng)};
    GaussianBelief kf = ukf;
    for (int k = 1; k <= 10; ++k) {
        const Vec y = random_vec(2, rng, -5, 5);
        ukf = ukf_step(ukf, m, y, k, o);
        kf = kalman(kf, F, H, noise_covariance(Q, o), noise_covariance(R, o), y);
        EXPECT_LT((ukf.mean - kf.mean).norm(), 1e-8);
        EXPECT_LT((ukf.covariance - kf.covariance).norm(), 1e-8);
        EXPECT_EQ(ukf.covariance, ukf.covariance.transpose());
    }
}

TEST(Ukf, ZeroInnovationKeepsMean)
{
    const dsmf::SystemModel m = scenarios::radar_model();
    const GaussianBelief b{Eigen::Vector4d(50, 30, 5, 5), 4.0 * Mat::Identity(4, 4)};
    const GaussianBelief pred = ukf_predict(b, m, 0, UkfOptions{});
    // Feeding back the sigma-point measurement mean gives no correction.
    const SigmaWeights w = sigma_weights(4, UkfOptions{});
    const Mat L = pred.covariance.llt().matrixL();
    Vec zhat = w.mean[0] * m.h(pred.mean);
    for (int i = 0; i < 4; ++i) {
        zhat += w.mean[1 + i] * m.h(pred.mean + w.spread * L.col(i));
        zhat += w.mean[5 + i] * m.h(pred.mean - w.spread * L.col(i));
    }
    const GaussianBelief same = ukf_update(pred, m, zhat, UkfOptions{});
    EXPECT_LT((same.mean - pred.mean).norm(), 1e-9);
}

TEST(Ukf, BearingInnovationIsWrapped)
{
    // Target due west of the sensor: bearings near +pi and -pi are the same.
    scenarios::RadarParams rp;
    rp.sensor = Eigen::Vector2d(0, 0);
    const dsmf::SystemModel m = scenarios::radar_model(rp);
    const GaussianBelief b{Eigen::Vector4d(-100, 1e-3, 0, 0), Mat::Identity(4, 4)};
    const Vec y = Eigen::Vector2d(100.0, -3.14159);  // just below -pi side
    const GaussianBelief post = ukf_update(b, m, y, UkfOptions{});
    EXPECT_LT((post.mean - b.mean).norm(), 1.0);
}

TEST(Ukf, MahalanobisByHand)
{
    const GaussianBelief b{Eigen::Vector2d(1, 2), Eigen::Vector2d(4, 9).asDiagonal().toDenseMatrix()};
    EXPECT_NEAR(mahalanobis2(b, Eigen::Vector2d(3, 5)), 1.0 + 1.0, 1e-14);
}

TEST(Esmf, QuadraticScalarRemainder)
{
    // f(x) = x^2 linearized at 0 leaves the remainder x^2, which is 1 on the
    // boundary of [-1, 1]; with safety 1.1 the bound is 1.1^2.
    Rng rng(4);
    auto fn = [](const Vec& x) -> Vec { return Vec::Constant(1, x[0] * x[0]); };
    const Mat b = remainder_bound(fn, Mat::Zero(1, 1), Ellipsoid(Vec::Zero(1), Mat::Identity(1, 1)), EsmfOptions{}, rng);
    EXPECT_NEAR(b(0, 0), 1.21, 1e-12);
}

TEST(Esmf, RemainderZeroForLinearMaps)
{
    Rng rng(5);
    const Mat A = random_spd(3, rng);
    auto fn = [&](const Vec& x) -> Vec { return A * x; };
    const Ellipsoid e(Vec::Zero(3), random_spd(3, rng));
    EXPECT_LT(remainder_bound(fn, A, e, EsmfOptions{}, rng).norm(), 1e-20);
}

TEST(Esmf, RemainderBoundContainsRemainders)
{
    Rng rng(6);
    const dsmf::SystemModel m = scenarios::robot_model();
    const Ellipsoid e(Eigen::Vector3d(10, 10, 1), Eigen::Vector3d(1, 1, 0.5).asDiagonal().toDenseMatrix());
    const Mat J = m.f_jacobian(e.center(), 0);
    auto fn = [&](const Vec& x) { return m.f(x, 0); };
    const Ellipsoid bound(Vec::Zero(3), remainder_bound(fn, J, e, EsmfOptions{}, rng));
    const PointCloud pts = sample_interior(e, 2000, rng);
    for (int i = 0; i < pts.size(); ++i) {
        const Vec d = pts.point(i) - e.center();
        EXPECT_TRUE(contains(bound, fn(pts.point(i)) - fn(e.center()) - J * d, 1e-9));
    }
}

TEST(Esmf, RemainderMonotoneInTheEllipsoid)
{
    Rng rng(7);
    for (int t = 0; t < 10; ++t) {
        // Random quadratic map x -> (x^T A_i x)_i + B x.
        std::vector<Mat> A;
        for (int i = 0; i < 2; ++i) A.push_back(random_spd(3, rng, -1.0, 1.0));
        Mat B(2, 3);
        B << random_vec(3, rng).transpose(), random_vec(3, rng).transpose();
        auto fn = [&](const Vec& x) -> Vec { return Eigen::Vector2d(x.dot(A[0] * x), x.dot(A[1] * x)) + B * x; };
        const Vec c = random_vec(3, rng);
        const Mat J = dsmf::numeric_jacobian(fn, c);
        const Mat P = random_spd(3, rng);
        const std::uint64_t seed = rng();
        Rng r1(seed), r2(seed);
        const Mat small = remainder_bound(fn, J, Ellipsoid(c, P), EsmfOptions{}, r1);
        const Mat big = remainder_bound(fn, J, Ellipsoid(c, 2.0 * P), EsmfOptions{}, r2);
        for (int i = 0; i < 2; ++i) EXPECT_GE(big(i, i), small(i, i) * (1 - 1e-9));
    }
}

TEST(Esmf, CombineNoiseSkipsZeroTerms)
{
    const Mat q = Mat::Identity(2, 2);
    EXPECT_EQ(combine_noise(Mat::Zero(2, 2), q), q);
    EXPECT_EQ(combine_noise(q, Mat::Zero(2, 2)), q);
    EXPECT_LT((combine_noise(q, 4.0 * q) - 9.0 * q).norm(), 1e-14);
}

TEST(Esmf, LinearModelIsTheLinearFilter)
{
    Rng rng(8);
    const Mat F = scenarios::radar_transition(1.0);
    const Mat Q = scenarios::radar_process_noise(1.0, 1.0);
    const Mat H = Mat::Identity(2, 4);
    const Mat R = Eigen::Vector2d(4.0, 2.0).asDiagonal();
    const dsmf::SystemModel m = linear_model(F, H, Q, R);
    const Ellipsoid e0(Eigen::Vector4d(1, 2, 0.5, -0.5), 4.0 * Mat::Identity(4, 4));
    const Vec y = H * (F * e0.center()) + Eigen::Vector2d(0.7, -0.4);
    const EsmfStep s = esmf_step(e0, m, y, 1, EsmfOptions{}, rng);

    const Mat image = F * e0.shape() * F.transpose();
    const double ps = std::sqrt(image.trace() / Q.trace());
    const Mat pp = (1 + 1 / ps) * image + (1 + ps) * Q;
    const Vec xp = F * e0.center();
    EXPECT_LT(rel_frob(s.predicted.shape(), pp), 1e-10);
    EXPECT_LT((s.predicted.center() - xp).norm(), 1e-12);
    EXPECT_LT(rel_frob(s.update.measurement.shape(), R), 1e-10);

    const auto ref = smf::testing::linear_update(xp, pp, y, R, H, s.update.params.rho);
    EXPECT_LT(rel_frob(s.update.updated.shape(), ref.shape), 1e-10);
    EXPECT_LT((s.update.updated.center() - ref.center).norm(), 1e-10);

    auto tr = [&](double rho) {
        const auto u = smf::testing::linear_update(xp, pp, y, R, H, rho);
        return u.delta < 1 ? u.shape.trace() : std::numeric_limits<double>::infinity();
    };
    EXPECT_NEAR(s.update.params.rho, smf::testing::grid_argmin(tr, 1e-6, 1 - 1e-6, 10000).arg, 1e-4);
}

TEST(Esmf, RadarContainmentOverShortRuns)
{
    const scenarios::Scenario sc = scenarios::radar();
    int steps = 0, inside = 0;
    for (int run = 0; run < 5; ++run) {
        Rng rng(200 + run);
        const scenarios::Truth truth = scenarios::simulate_truth(sc, 15, rng);
        Ellipsoid e(sc.x0, sc.P0);
        for (int k = 1; k <= 15; ++k) {
            e = esmf_step(e, sc.model, truth.measurements[k - 1], k, EsmfOptions{}, rng).update.updated;
            ++steps;
            if (contains(e, truth.states[k], 1e-6)) ++inside;
        }
    }
    EXPECT_GE(static_cast<double>(inside) / steps, 0.95);
}
