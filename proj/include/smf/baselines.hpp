#pragma once

// Comparison filters: an unscented Kalman filter, and an extended
// set-membership filter that linearizes f and h at the current center and
// bounds the linearization remainder by sampling.

#include "smf/dsmf.hpp"

namespace smf::baselines {

struct GaussianBelief {
    Vec mean;
    Mat covariance;
};

struct UkfOptions {
    double alpha = 1.0;
    double beta = 2.0;
    double kappa = 0.0;
    /// Noise covariance = scale * shape; 0 selects 1 / (dim + 2), the
    /// covariance of a uniform distribution over the ellipsoid.
    double noise_cov_scale = 0.0;
};

struct SigmaWeights {
    Vec mean;
    Vec cov;
    double spread = 0.0;  // sqrt(n + lambda)
};

SigmaWeights sigma_weights(int n, const UkfOptions& opts);

/// Covariance of the uniform distribution over an ellipsoid with this shape
/// (or the scaled shape when a scale is set).
Mat noise_covariance(const Mat& shape, const UkfOptions& opts);

GaussianBelief ukf_predict(const GaussianBelief& b, const dsmf::SystemModel& model, int k, const UkfOptions& opts);
GaussianBelief ukf_update(const GaussianBelief& b, const dsmf::SystemModel& model, const Vec& y,
                          const UkfOptions& opts);
/// Predict with f_{k-1} and update with y_k.
GaussianBelief ukf_step(const GaussianBelief& b, const dsmf::SystemModel& model, const Vec& y, int k,
                        const UkfOptions& opts);

/// (x - mean)^T covariance^{-1} (x - mean)
double mahalanobis2(const GaussianBelief& b, const Vec& x);

struct EsmfOptions {
    int remainder_samples = 500;
    double safety = 1.1;
    SamplingMode sampling = SamplingMode::boundary;
    dsmf::SizeCriterion size = dsmf::SizeCriterion::trace;
    double rho_eps = 1e-6;
    double rho_tol = 1e-6;
};

/// Axis-aligned ellipsoid bounding the sampled remainders
/// fn(x) - fn(c) - J (x - c) over the ellipsoid, inflated by the safety
/// factor. Returns a zero matrix when every remainder vanishes.
Mat remainder_bound(const std::function<Vec(const Vec&)>& fn, const Mat& jacobian, const Ellipsoid& e,
                    const EsmfOptions& opts, Rng& rng);

/// Outer bound of two noise shapes, skipping zero terms.
Mat combine_noise(const Mat& a, const Mat& b);

Ellipsoid esmf_predict(const Ellipsoid& e, const dsmf::SystemModel& model, int k, const EsmfOptions& opts, Rng& rng);

struct EsmfUpdate {
    Ellipsoid updated;
    Ellipsoid measurement;  // in measurement space
    Mat H;
    dsmf::FusionParams params;
};

EsmfUpdate esmf_update(const Ellipsoid& pred, const dsmf::SystemModel& model, const Vec& y, const EsmfOptions& opts,
                       Rng& rng);

struct EsmfStep {
    Ellipsoid predicted;
    EsmfUpdate update;
};

EsmfStep esmf_step(const Ellipsoid& e, const dsmf::SystemModel& model, const Vec& y, int k, const EsmfOptions& opts,
                   Rng& rng);

}  // namespace smf::baselines
