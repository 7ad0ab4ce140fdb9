#pragma once

#include "smf/types.hpp"

namespace smf {

/// Ellipsoid {x : (x - c)^T P^{-1} (x - c) <= 1} with an SPD shape matrix P.
///
/// The shape is symmetrized on construction and factorized once; if the
/// Cholesky factorization fails, 1e-12 * tr(P)/n * I is added and the
/// factorization retried. A second failure throws NumericalError.
class Ellipsoid {
public:
    Ellipsoid(Vec center, Mat shape);

    /// Ball of the given radius (shape = radius^2 * I).
    static Ellipsoid ball(Vec center, double radius);

    const Vec& center() const { return center_; }
    const Mat& shape() const { return shape_; }
    /// Lower-triangular E with E * E^T = shape.
    const Mat& factor() const { return factor_; }
    int dim() const { return static_cast<int>(center_.size()); }

    /// (x - c)^T P^{-1} (x - c)
    double quadratic_form(const Vec& x) const;
    double trace() const { return shape_.trace(); }
    double logdet() const;
    /// True when the jitter policy had to modify the supplied shape.
    bool jittered() const { return jittered_; }

private:
    Vec center_;
    Mat shape_;
    Mat factor_;
    bool jittered_ = false;
};

enum class Provenance { boundary, interior, image };

/// m points of a common dimension, stored one point per column.
struct PointCloud {
    Mat points;
    Provenance provenance = Provenance::image;

    PointCloud() = default;
    PointCloud(Mat pts, Provenance prov);

    int dim() const { return static_cast<int>(points.rows()); }
    int size() const { return static_cast<int>(points.cols()); }
    auto point(int i) const { return points.col(i); }
};

/// How sample points are drawn from an ellipsoid.
enum class SamplingMode { boundary, interior, mixed };

/// Cholesky factor with the shared jitter policy; throws NumericalError.
Mat spd_factor(const Mat& shape, bool* jittered = nullptr);

bool contains(const Ellipsoid& e, const Vec& x, double slack = 0.0);

/// Uniform direction on the unit sphere S^{n-1}.
Vec sample_unit_sphere(int n, Rng& rng);

PointCloud sample_boundary(const Ellipsoid& e, int m, Rng& rng);
/// Uniform over the volume (radius drawn as r^(1/n)).
PointCloud sample_interior(const Ellipsoid& e, int m, Rng& rng);
/// Dispatches on mode; `mixed` draws half the points from each.
PointCloud sample(const Ellipsoid& e, int m, SamplingMode mode, Rng& rng);

/// (1 + 1/p) A + (1 + p) B for PSD A, B. Throws DimensionError if p <= 0.
Mat minkowski_outer_shape(const Mat& a, const Mat& b, double p);

/// Outer ellipsoid of ef (+) {w : w^T Q^{-1} w <= 1}, centered at ef's center.
Ellipsoid minkowski_outer(const Ellipsoid& ef, const Mat& q, double p);

/// Trace-minimizing parameter sqrt(tr(Pf) / tr(Q)).
double optimal_p(const Mat& pf, const Mat& q);

/// {E c, E P E^T}
Ellipsoid project(const Ellipsoid& e, const Mat& projection);

/// Closed polyline of a 2-D ellipse: `points` columns c + E (cos t, sin t).
Mat ellipse_outline(const Ellipsoid& e, int points);

}  // namespace smf
