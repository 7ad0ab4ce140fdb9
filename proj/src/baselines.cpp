#include "smf/baselines.hpp"

#include <cmath>

namespace smf::baselines {

namespace {

Mat sigma_points(const GaussianBelief& b, const SigmaWeights& w)
{
    const int n = static_cast<int>(b.mean.size());
    const Mat L = spd_factor(symmetrize(b.covariance));
    Mat pts(n, 2 * n + 1);
    pts.col(0) = b.mean;
    for (int i = 0; i < n; ++i) {
        pts.col(1 + i) = b.mean + w.spread * L.col(i);
        pts.col(1 + n + i) = b.mean - w.spread * L.col(i);
    }
    return pts;
}

}  // namespace

SigmaWeights sigma_weights(int n, const UkfOptions& opts)
{
    const double lambda = opts.alpha * opts.alpha * (n + opts.kappa) - n;
    const double denom = n + lambda;
    if (!(denom > 0.0)) throw DimensionError("UKF parameters give n + lambda <= 0");
    SigmaWeights w;
    w.mean = Vec::Constant(2 * n + 1, 0.5 / denom);
    w.cov = w.mean;
    w.mean[0] = lambda / denom;
    w.cov[0] = lambda / denom + (1.0 - opts.alpha * opts.alpha + opts.beta);
    w.spread = std::sqrt(denom);
    return w;
}

Mat noise_covariance(const Mat& shape, const UkfOptions& opts)
{
    const double scale = opts.noise_cov_scale > 0.0 ? opts.noise_cov_scale : 1.0 / (shape.rows() + 2.0);
    return scale * shape;
}

GaussianBelief ukf_predict(const GaussianBelief& b, const dsmf::SystemModel& model, int k, const UkfOptions& opts)
{
    const int n = model.state_dim;
    const SigmaWeights w = sigma_weights(n, opts);
    const Mat pts = sigma_points(b, w);
    Mat fx(n, pts.cols());
    for (int i = 0; i < pts.cols(); ++i) fx.col(i) = model.f(pts.col(i), k);
    GaussianBelief out;
    out.mean = fx * w.mean;
    out.covariance = noise_covariance(model.Q, opts);
    for (int i = 0; i < pts.cols(); ++i) {
        const Vec d = fx.col(i) - out.mean;
        out.covariance += w.cov[i] * d * d.transpose();
    }
    out.covariance = symmetrize(out.covariance);
    return out;
}

GaussianBelief ukf_update(const GaussianBelief& b, const dsmf::SystemModel& model, const Vec& y,
                          const UkfOptions& opts)
{
    const int n = model.state_dim, l = model.meas_dim;
    const SigmaWeights w = sigma_weights(n, opts);
    const Mat pts = sigma_points(b, w);
    const Vec h0 = model.h(pts.col(0));
    // Angles are averaged as wrapped offsets from the central point.
    Mat dz(l, pts.cols());
    for (int i = 0; i < pts.cols(); ++i) dz.col(i) = dsmf::wrap_innovation(model, model.h(pts.col(i)) - h0);
    const Vec zoff = dz * w.mean;
    const Vec zhat = h0 + zoff;
    Mat S = noise_covariance(model.R, opts);
    Mat Pxz = Mat::Zero(n, l);
    for (int i = 0; i < pts.cols(); ++i) {
        const Vec dzi = dz.col(i) - zoff;
        S += w.cov[i] * dzi * dzi.transpose();
        Pxz += w.cov[i] * (pts.col(i) - b.mean) * dzi.transpose();
    }
    S = symmetrize(S);
    Eigen::LLT<Mat> llt(S);
    if (llt.info() != Eigen::Success) throw NumericalError("UKF innovation covariance is not positive definite");
    const Mat K = llt.solve(Pxz.transpose()).transpose();
    GaussianBelief out;
    out.mean = b.mean + K * dsmf::wrap_innovation(model, y - zhat);
    out.covariance = symmetrize(b.covariance - K * S * K.transpose());
    spd_factor(out.covariance);
    return out;
}

GaussianBelief ukf_step(const GaussianBelief& b, const dsmf::SystemModel& model, const Vec& y, int k,
                        const UkfOptions& opts)
{
    return ukf_update(ukf_predict(b, model, k - 1, opts), model, y, opts);
}

double mahalanobis2(const GaussianBelief& b, const Vec& x)
{
    const Mat L = spd_factor(symmetrize(b.covariance));
    return L.triangularView<Eigen::Lower>().solve(x - b.mean).squaredNorm();
}

Mat remainder_bound(const std::function<Vec(const Vec&)>& fn, const Mat& jacobian, const Ellipsoid& e,
                    const EsmfOptions& opts, Rng& rng)
{
    const Vec c = e.center();
    const Vec f0 = fn(c);
    const int out = static_cast<int>(f0.size());
    const PointCloud pts = sample(e, opts.remainder_samples, opts.sampling, rng);
    Vec bound = Vec::Zero(out);
    for (int i = 0; i < pts.size(); ++i) {
        const Vec d = pts.point(i) - c;
        const Vec rem = fn(pts.point(i)) - f0 - jacobian * d;
        bound = bound.cwiseMax(rem.cwiseAbs());
    }
    const double top = bound.maxCoeff();
    if (!(top > 0.0)) return Mat::Zero(out, out);
    // The box [-b, b] lies inside the ellipsoid diag(out * b_i^2).
    const Vec axes = (opts.safety * bound).cwiseMax(1e-12 * opts.safety * top);
    return Mat(static_cast<double>(out) * axes.array().square().matrix().asDiagonal());
}

Mat combine_noise(const Mat& a, const Mat& b)
{
    if (!(a.trace() > 0.0)) return b;
    if (!(b.trace() > 0.0)) return a;
    return minkowski_outer_shape(a, b, optimal_p(a, b));
}

Ellipsoid esmf_predict(const Ellipsoid& e, const dsmf::SystemModel& model, int k, const EsmfOptions& opts, Rng& rng)
{
    const Vec& c = e.center();
    const Mat J = dsmf::state_jacobian(model, c, k);
    const auto fk = [&](const Vec& x) { return model.f(x, k); };
    const Mat rem = remainder_bound(fk, J, e, opts, rng);
    const Mat noise = combine_noise(rem, model.Q);
    return Ellipsoid(model.f(c, k), combine_noise(symmetrize(J * e.shape() * J.transpose()), noise));
}

EsmfUpdate esmf_update(const Ellipsoid& pred, const dsmf::SystemModel& model, const Vec& y, const EsmfOptions& opts,
                       Rng& rng)
{
    const Vec& c = pred.center();
    const Vec h0 = model.h(c);
    const Mat H = dsmf::meas_jacobian(model, c);
    const auto rel = [&](const Vec& x) { return dsmf::wrap_innovation(model, model.h(x) - h0); };
    const Mat rem = remainder_bound(rel, H, pred, opts, rng);
    const Ellipsoid meas(H * c + dsmf::wrap_innovation(model, y - h0), combine_noise(model.R, rem));
    const dsmf::FusionParams params = dsmf::optimize_rho(pred, meas, H, opts.size, opts.rho_eps, opts.rho_tol);
    const dsmf::Fused fused = dsmf::fuse(pred, meas, H, params.rho);
    return {Ellipsoid(fused.center, fused.shape), meas, H, params};
}

EsmfStep esmf_step(const Ellipsoid& e, const dsmf::SystemModel& model, const Vec& y, int k, const EsmfOptions& opts,
                   Rng& rng)
{
    Ellipsoid pred = esmf_predict(e, model, k - 1, opts, rng);
    EsmfUpdate upd = esmf_update(pred, model, y, opts, rng);
    return {std::move(pred), std::move(upd)};
}

}  // namespace smf::baselines
