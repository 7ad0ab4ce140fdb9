#include "smf/ellipsoid.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace smf {

namespace {

constexpr double kAsymmetryLimit = 1e-6;
constexpr double kJitterScale = 1e-12;

void check_square(const Mat& a, const char* what)
{
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + " must be square");
    }
}

}  // namespace

Mat spd_factor(const Mat& shape, bool* jittered)
{
    check_square(shape, "shape");
    if (jittered) *jittered = false;
    if (!shape.allFinite()) {
        throw NumericalError("shape matrix has non-finite entries");
    }
    Eigen::LLT<Mat> llt(shape);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    const auto n = shape.rows();
    const double jitter = kJitterScale * std::abs(shape.trace()) / static_cast<double>(n);
    Mat retry = shape + jitter * Mat::Identity(n, n);
    llt.compute(retry);
    if (llt.info() != Eigen::Success || jitter <= 0.0) {
        throw NumericalError("shape matrix is not positive definite (jitter retry failed)");
    }
    if (jittered) *jittered = true;
    return llt.matrixL();
}

Ellipsoid::Ellipsoid(Vec center, Mat shape) : center_(std::move(center))
{
    check_square(shape, "shape");
    if (shape.rows() != center_.size()) {
        throw DimensionError("ellipsoid center/shape dimension mismatch: " + std::to_string(center_.size()) +
                             " vs " + std::to_string(shape.rows()));
    }
    if (center_.size() == 0) throw DimensionError("ellipsoid dimension must be positive");
    const double scale = std::max(shape.norm(), std::numeric_limits<double>::min());
    if ((shape - shape.transpose()).norm() > kAsymmetryLimit * scale) {
        throw DimensionError("shape matrix is not symmetric");
    }
    shape_ = symmetrize(shape);
    factor_ = spd_factor(shape_, &jittered_);
    if (jittered_) {
        shape_ = factor_ * factor_.transpose();
    }
}

Ellipsoid Ellipsoid::ball(Vec center, double radius)
{
    const auto n = center.size();
    return Ellipsoid(std::move(center), radius * radius * Mat::Identity(n, n));
}

double Ellipsoid::quadratic_form(const Vec& x) const
{
    if (x.size() != center_.size()) {
        throw DimensionError("point dimension " + std::to_string(x.size()) + " does not match ellipsoid dimension " +
                             std::to_string(center_.size()));
    }
    const Vec z = factor_.triangularView<Eigen::Lower>().solve(x - center_);
    return z.squaredNorm();
}

double Ellipsoid::logdet() const
{
    return 2.0 * factor_.diagonal().array().log().sum();
}

PointCloud::PointCloud(Mat pts, Provenance prov) : points(std::move(pts)), provenance(prov)
{
    if (points.cols() == 0 || points.rows() == 0) {
        throw DimensionError("point cloud must be nonempty");
    }
}

bool contains(const Ellipsoid& e, const Vec& x, double slack)
{
    if (slack < 0.0) throw DimensionError("slack must be nonnegative");
    return e.quadratic_form(x) <= 1.0 + slack;
}

Vec sample_unit_sphere(int n, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec u(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) u[i] = normal(rng);
        norm = u.norm();
    } while (norm < 1e-300);
    return u / norm;
}

PointCloud sample_boundary(const Ellipsoid& e, int m, Rng& rng)
{
    if (m < 1) throw DimensionError("sample count must be >= 1");
    const int n = e.dim();
    Mat pts(n, m);
    for (int i = 0; i < m; ++i) {
        pts.col(i) = e.center() + e.factor() * sample_unit_sphere(n, rng);
    }
    return {std::move(pts), Provenance::boundary};
}

PointCloud sample_interior(const Ellipsoid& e, int m, Rng& rng)
{
    if (m < 1) throw DimensionError("sample count must be >= 1");
    const int n = e.dim();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Mat pts(n, m);
    for (int i = 0; i < m; ++i) {
        const Vec u = sample_unit_sphere(n, rng);
        const double r = std::pow(unif(rng), 1.0 / n);
        pts.col(i) = e.center() + e.factor() * (r * u);
    }
    return {std::move(pts), Provenance::interior};
}

PointCloud sample(const Ellipsoid& e, int m, SamplingMode mode, Rng& rng)
{
    switch (mode) {
    case SamplingMode::boundary:
        return sample_boundary(e, m, rng);
    case SamplingMode::interior:
        return sample_interior(e, m, rng);
    case SamplingMode::mixed: {
        if (m < 2) return sample_boundary(e, m, rng);
        const int nb = (m + 1) / 2;
        PointCloud b = sample_boundary(e, nb, rng);
        PointCloud in = sample_interior(e, m - nb, rng);
        Mat pts(e.dim(), m);
        pts << b.points, in.points;
        return {std::move(pts), Provenance::boundary};
    }
    }
    throw DimensionError("unknown sampling mode");
}

Mat minkowski_outer_shape(const Mat& a, const Mat& b, double p)
{
    if (!(p > 0.0)) throw DimensionError("Minkowski parameter p must be positive");
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("Minkowski operands have different dimensions");
    }
    return symmetrize((1.0 + 1.0 / p) * a + (1.0 + p) * b);
}

Ellipsoid minkowski_outer(const Ellipsoid& ef, const Mat& q, double p)
{
    check_square(q, "Q");
    return Ellipsoid(ef.center(), minkowski_outer_shape(ef.shape(), q, p));
}

double optimal_p(const Mat& pf, const Mat& q)
{
    const double tp = pf.trace();
    const double tq = q.trace();
    if (!(tp > 0.0) || !(tq > 0.0)) throw DimensionError("optimal_p requires positive traces");
    return std::sqrt(tp) / std::sqrt(tq);
}

Ellipsoid project(const Ellipsoid& e, const Mat& projection)
{
    if (projection.cols() != e.dim()) throw DimensionError("projection width does not match ellipsoid dimension");
    return Ellipsoid(projection * e.center(), projection * e.shape() * projection.transpose());
}

Mat ellipse_outline(const Ellipsoid& e, int points)
{
    if (e.dim() != 2) throw DimensionError("ellipse outline requires a 2-D ellipsoid");
    Mat out(2, points);
    for (int i = 0; i < points; ++i) {
        const double t = 2.0 * std::numbers::pi * i / points;
        out.col(i) = e.center() + e.factor() * Eigen::Vector2d(std::cos(t), std::sin(t));
    }
    return out;
}

}  // namespace smf
