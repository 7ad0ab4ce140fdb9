#pragma once

// Dual set-membership filter. The prediction encloses the sampled image of
// the current ellipsoid under f and inflates it by the process-noise bound;
// the measurement update encloses the inverse-measurement set in the
// projected state space and fuses it with the prediction through the linear
// set-membership update, choosing rho by a one-dimensional search.

#include "smf/ellipsoid.hpp"
#include "smf/mvee.hpp"

#include <functional>
#include <span>
#include <vector>

namespace smf::dsmf {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct SystemModel {
    int state_dim = 0;
    int meas_dim = 0;
    std::function<Vec(const Vec& x, int k)> f;
    std::function<Vec(const Vec& x)> h;
    /// Projected state E_p x consistent with measurement y under noise v.
    /// `aux` carries extra bounded parameters (empty for most models).
    /// Throws DomainError outside the map's domain.
    std::function<Vec(const Vec& y, const Vec& v, std::span<const double> aux)> h_inv;
    Mat projection;  // r x n
    Mat Q;
    Mat R;
    /// Measurement components that are angles (innovations get wrapped).
    std::vector<int> angle_components;
    /// Intervals for the aux parameters of h_inv, given the prediction.
    std::function<std::vector<Interval>(const Ellipsoid& predicted)> aux_bounds;
    /// Optional analytic Jacobians; central differences otherwise.
    std::function<Mat(const Vec& x, int k)> f_jacobian;
    std::function<Mat(const Vec& x)> h_jacobian;

    int proj_dim() const { return static_cast<int>(projection.rows()); }
    /// Throws DimensionError on inconsistent sizes or a rank-deficient E_p.
    void validate() const;
};

/// Wrap to (-pi, pi].
double wrap_angle(double a);
/// Wraps the angle components of a measurement-space difference.
Vec wrap_innovation(const SystemModel& model, Vec d);

/// Central differences with step 1e-6 * max(1, |x_j|).
Mat numeric_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& x);
Mat state_jacobian(const SystemModel& model, const Vec& x, int k);
Mat meas_jacobian(const SystemModel& model, const Vec& x);

enum class SizeCriterion { trace, logdet };

struct Options {
    int m_samples = 200;
    SamplingMode sampling = SamplingMode::boundary;
    mvee::Options solver;
    SizeCriterion size = SizeCriterion::trace;
    double rho_eps = 1e-6;
    double rho_tol = 1e-6;
};

struct FusionParams {
    double rho = 0.5;
    double delta = 0.0;
    double p_star = 1.0;
};

struct Prediction {
    Ellipsoid ellipsoid;
    Ellipsoid image;  // MVEE of the mapped samples, before the noise term
    double p_star = 1.0;
    mvee::SolveStats stats;
};

/// Bounds f_k(e) (+) W. Here k is the time index of the state being mapped.
Prediction predict(const Ellipsoid& e, const SystemModel& model, int k, const Options& opts, Rng& rng);

struct MeasurementSet {
    Ellipsoid ellipsoid;
    mvee::SolveStats stats;
};

/// Encloses {h_inv(y, v, a) : v on the boundary of the noise set, a in aux}.
/// With aux parameters the noise samples and aux values form a product grid
/// of ceil(sqrt(m)) x ceil(sqrt(m)) points.
MeasurementSet measurement_ellipsoid(const Vec& y, const SystemModel& model, std::span<const Interval> aux,
                                     const Options& opts, Rng& rng);

struct Fused {
    Vec center;
    Mat shape;
    double delta = 0.0;
};

/// Linear set-membership update of `pred` with {x : E x in meas}.
/// Throws EmptyIntersection when delta >= 1.
Fused fuse(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& projection, double rho);

/// f(shape(rho)) or +inf when delta >= 1 or the shape is not SPD.
double fused_size(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& projection, double rho,
                  SizeCriterion criterion);

/// Golden-section minimization of fused_size over [eps, 1 - eps], started
/// from the best cell of a coarse scan. p_star is left at its default.
FusionParams optimize_rho(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& projection,
                          SizeCriterion criterion = SizeCriterion::trace, double eps = 1e-6, double tol = 1e-6);

struct StepRecord {
    int k = 0;
    Ellipsoid predicted;
    Ellipsoid measurement;
    Ellipsoid updated;
    FusionParams params;
    mvee::SolveStats predict_stats;
    mvee::SolveStats measurement_stats;
    double elapsed = 0.0;
    bool contained = false;
};

/// One full recursion step from E_{k-1} and y_k: predict, measurement set,
/// rho search, fusion.
/// Errors are rethrown with the step index prepended (same exception type).
StepRecord step(const Ellipsoid& e, const SystemModel& model, const Vec& y, int k, const Options& opts, Rng& rng);

}  // namespace smf::dsmf
