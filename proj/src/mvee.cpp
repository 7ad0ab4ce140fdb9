#include "smf/mvee.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smf::mvee {

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kRegularizationScale = 1e-9;

struct RankInfo {
    int rank = 0;
    bool full = false;
};

RankInfo moment_rank(const Mat& moment)
{
    Eigen::SelfAdjointEigenSolver<Mat> eig(moment, Eigen::EigenvaluesOnly);
    const Vec& ev = eig.eigenvalues();
    const double top = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    RankInfo info;
    info.rank = static_cast<int>((ev.array() > kRankTolerance * top).count());
    info.full = info.rank == moment.rows();
    return info;
}

Mat moment_matrix(const Mat& lifted, std::span<const double> mu, double jitter, kernels::Policy policy)
{
    Mat m = kernels::weighted_moment(policy, lifted, mu);
    if (jitter > 0.0) {
        const auto n = m.rows() - 1;
        m.topLeftCorner(n, n).diagonal().array() += jitter;
    }
    return m;
}

std::string rank_message(const RankInfo& r, int d)
{
    return "moment matrix is singular: rank " + std::to_string(r.rank) + " < " + std::to_string(d) +
           " (rank deficiency " + std::to_string(d - r.rank) + ")";
}

Mat spd_inverse(const Mat& a)
{
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("moment matrix lost positive definiteness");
    return llt.solve(Mat::Identity(a.rows(), a.cols()));
}

double spd_logdet(const Mat& a)
{
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("moment matrix lost positive definiteness");
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double bounding_box_diameter(const Mat& pts)
{
    return (pts.rowwise().maxCoeff() - pts.rowwise().minCoeff()).norm();
}

std::span<const double> as_span(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> as_span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

LiftedPoints::LiftedPoints(const PointCloud& cloud) : lifted_(cloud.dim() + 1, cloud.size())
{
    lifted_.topRows(cloud.dim()) = cloud.points;
    lifted_.row(cloud.dim()).setOnes();
}

SimplexWeights::SimplexWeights(Vec mu) : mu_(std::move(mu))
{
    if (mu_.size() == 0) throw DimensionError("simplex weights must be nonempty");
    if ((mu_.array() < 0.0).any()) throw DimensionError("simplex weights must be nonnegative");
    if (std::abs(mu_.sum() - 1.0) > 1e-12 * std::max<double>(1.0, static_cast<double>(mu_.size()))) {
        throw DimensionError("simplex weights must sum to one");
    }
}

SimplexWeights SimplexWeights::uniform(int m)
{
    return SimplexWeights(Vec::Constant(m, 1.0 / m));
}

SolveStats summarize(const Solution& s, int points)
{
    return {points, s.iterations, s.duality_gap, s.converged};
}

double dual_objective(const LiftedPoints& points, const SimplexWeights& mu)
{
    if (mu.size() != points.size()) throw DimensionError("weights and points differ in count");
    const Mat m = kernels::serial::weighted_moment(points.lifted(), as_span(mu.mu()));
    const RankInfo r = moment_rank(m);
    if (!r.full) throw NumericalError(rank_message(r, points.lifted_dim()));
    return spd_logdet(m);
}

Vec fw_gradient(const LiftedPoints& points, const SimplexWeights& mu)
{
    if (mu.size() != points.size()) throw DimensionError("weights and points differ in count");
    const Mat m = kernels::serial::weighted_moment(points.lifted(), as_span(mu.mu()));
    const RankInfo r = moment_rank(m);
    if (!r.full) throw NumericalError(rank_message(r, points.lifted_dim()));
    Vec kappa(points.size());
    kernels::serial::kappa_from_scratch(points.lifted(), spd_inverse(m), as_span(kappa));
    return kappa;
}

double toward_step(double kappa, int d)
{
    return (kappa - d) / (d * (kappa - 1.0));
}

double away_step(double kappa, int d)
{
    return (d - kappa) / (d * (kappa - 1.0));
}

Solution fw_solve(const PointCloud& cloud, const Options& opts)
{
    if (!(opts.tol > 0.0)) throw DimensionError("tolerance must be positive");
    const int n = cloud.dim();
    const int m = cloud.size();
    const int d = n + 1;
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 100 * m;
    const auto policy = opts.policy;

    // The iteration is affine invariant, so it runs on z = A^{-1} (y - mean)
    // with A the Cholesky factor of the cloud covariance. Clouds without a
    // full-rank covariance are only rescaled to unit diameter and regularized.
    const Vec shift = cloud.points.rowwise().mean();
    const Mat centered = cloud.points.colwise() - shift;
    const Mat cov = centered * centered.transpose() / m;
    Mat A;
    double jitter = 0.0;  // in z coordinates
    const bool whiten = moment_rank(cov).full;
    if (whiten) {
        A = spd_factor(cov);
    } else {
        const double diam = bounding_box_diameter(cloud.points);
        if (!(diam > 0.0)) {
            Mat raw(d, m);
            raw << cloud.points, Mat::Ones(1, m);
            throw NumericalError("degenerate point cloud: " + rank_message(moment_rank(raw * raw.transpose() / m), d));
        }
        A = diam * Mat::Identity(n, n);
        jitter = kRegularizationScale;
    }
    Mat Y(d, m);
    Y.topRows(n) = A.triangularView<Eigen::Lower>().solve(centered);
    Y.row(n).setOnes();
    // logdet of the original moment matrix = logdet in z + 2 log det A.
    const double logdet_offset = 2.0 * A.diagonal().array().abs().log().sum();

    Vec mu = Vec::Constant(m, 1.0 / m);
    Mat M = moment_matrix(Y, as_span(mu), jitter, policy);
    if (RankInfo r = moment_rank(M); !r.full) {
        throw NumericalError("degenerate point cloud: " + rank_message(r, d));
    }
    // A regularized moment matrix is not a rank-one function of mu, so that
    // path recomputes everything each iteration.
    const bool regularized = jitter > 0.0;
    const int refresh_every = regularized ? 1 : std::max(1, opts.refresh_every);

    Mat Minv = spd_inverse(M);
    Vec kappa(m);
    kernels::kappa_from_scratch(policy, Y, Minv, as_span(kappa));
    double objective = spd_logdet(M) + logdet_offset;

    auto refresh = [&] {
        mu /= mu.sum();
        M = moment_matrix(Y, as_span(mu), jitter, policy);
        Minv = spd_inverse(M);
        kernels::kappa_from_scratch(policy, Y, Minv, as_span(kappa));
        objective = spd_logdet(M) + logdet_offset;
    };

    int iter = 0;
    bool converged = false;
    int since_refresh = 0;
    while (true) {
        kernels::Extreme up = kernels::argmax(policy, as_span(kappa));
        if (up.value / d - 1.0 <= opts.tol) {
            if (since_refresh > 0) {
                refresh();
                since_refresh = 0;
                up = kernels::argmax(policy, as_span(kappa));
            }
            if (up.value / d - 1.0 <= opts.tol) {
                converged = true;
                break;
            }
        }
        if (iter >= max_iter) break;

        Iterate it;
        it.iteration = iter;
        it.objective = objective;
        it.gap = up.value - d;
        it.kind = StepKind::toward;
        it.vertex = up.index;
        it.kappa = up.value;
        it.step = toward_step(up.value, d);
        it.max_step = 1.0;

        if (opts.away_steps) {
            const kernels::Extreme down = kernels::argmin_supported(policy, as_span(kappa), as_span(mu));
            if (down.index >= 0 && down.index != up.index && mu[down.index] < 1.0 &&
                d - down.value > up.value - d) {
                const double mu_a = mu[down.index];
                it.vertex = down.index;
                it.kappa = down.value;
                it.max_step = mu_a / (1.0 - mu_a);
                it.step = away_step(down.value, d);
                it.kind = StepKind::away;
                if (it.step >= it.max_step) {
                    it.step = it.max_step;
                    it.kind = StepKind::drop;
                }
            }
        }

        if (opts.observer) {
            it.weights = as_span(mu);
            opts.observer(it);
        }

        const double g = it.step;
        const int v = it.vertex;
        const Vec u = Minv * Y.col(v);
        if (it.kind == StepKind::toward) {
            const double denom = 1.0 - g + g * it.kappa;
            const double scale = 1.0 / (1.0 - g);
            const double coef = g / denom;
            mu *= 1.0 - g;
            mu[v] += g;
            Minv = scale * (Minv - coef * u * u.transpose());
            kernels::kappa_rank_one(policy, Y, u, scale, coef, as_span(kappa));
            objective += (d - 1) * std::log1p(-g) + std::log(denom);
        } else {
            const double denom = 1.0 + g - g * it.kappa;
            const double scale = 1.0 / (1.0 + g);
            const double coef = -g / denom;
            mu *= 1.0 + g;
            mu[v] -= g;
            if (it.kind == StepKind::drop || mu[v] < 0.0) mu[v] = 0.0;
            Minv = scale * (Minv - coef * u * u.transpose());
            kernels::kappa_rank_one(policy, Y, u, scale, coef, as_span(kappa));
            objective += (d - 1) * std::log1p(g) + std::log(denom);
        }
        Minv = symmetrize(Minv);
        ++iter;
        if (++since_refresh >= refresh_every) {
            refresh();
            since_refresh = 0;
        }
    }
    if (since_refresh > 0) refresh();

    const Vec local = Y.topRows(n) * mu;
    Mat second_z = kernels::weighted_moment(policy, Y, as_span(mu)).topLeftCorner(n, n) - local * local.transpose();
    if (regularized) second_z.diagonal().array() += jitter;
    const Vec center = A * local + shift;
    const Mat second = symmetrize(A * symmetrize(second_z) * A.transpose());

    Solution sol{
        Ellipsoid(center, static_cast<double>(n) * second),
        SimplexWeights(mu),
        second,
        kappa,
        kappa.maxCoeff() - d,
        objective,
        iter,
        converged,
        regularized,
        regularized ? jitter * A(0, 0) * A(0, 0) : 0.0,
    };
    return sol;
}

double kkt_residual(const Solution& solution, const PointCloud& cloud)
{
    const LiftedPoints lp(cloud);
    const Vec& mu = solution.weights.mu();
    if (mu.size() != lp.size()) throw DimensionError("solution weights do not match the cloud");
    const int d = lp.lifted_dim();
    Mat M = moment_matrix(lp.lifted(), as_span(mu), solution.jitter, kernels::Policy::serial);
    Vec kappa(lp.size());
    kernels::serial::kappa_from_scratch(lp.lifted(), spd_inverse(M), as_span(kappa));
    const Vec diff = kappa.array() - d;
    const double primal = std::max(0.0, diff.maxCoeff());
    const double slackness = (mu.array() * diff.array().abs()).maxCoeff();
    return std::max(primal, slackness);
}

Ellipsoid covering_ellipsoid(const Solution& s)
{
    const int n = s.ellipsoid.dim();
    const double scale = (s.kappa.maxCoeff() - 1.0) / n;
    if (scale <= 1.0) return s.ellipsoid;
    return Ellipsoid(s.ellipsoid.center(), scale * s.ellipsoid.shape());
}

Ellipsoid enclose(const PointCloud& cloud, const Options& opts)
{
    return fw_solve(cloud, opts).ellipsoid;
}

}  // namespace smf::mvee
