#pragma once

// Minimum-volume enclosing ellipsoid of a point cloud via Frank-Wolfe on the
// dual problem
//
//     max_mu  logdet( sum_i mu_i y~_i y~_i^T ),   mu in the unit simplex,
//
// with lifted points y~ = [y; 1]. The solver keeps M(mu)^{-1} and the
// gradient kappa_i = y~_i^T M^{-1} y~_i current with rank-one updates, so an
// iteration costs O(d^2 + d m) with d = n + 1.

#include "smf/ellipsoid.hpp"
#include "smf/kernels.hpp"

#include <functional>
#include <span>

namespace smf::mvee {

/// Points lifted to [y; 1], one per column.
class LiftedPoints {
public:
    explicit LiftedPoints(const PointCloud& cloud);

    const Mat& lifted() const { return lifted_; }
    int dim() const { return static_cast<int>(lifted_.rows()) - 1; }
    int lifted_dim() const { return static_cast<int>(lifted_.rows()); }
    int size() const { return static_cast<int>(lifted_.cols()); }

private:
    Mat lifted_;
};

/// Probability weights over the sampled points.
class SimplexWeights {
public:
    /// Validates nonnegativity and unit sum (1e-12 relative to the size).
    explicit SimplexWeights(Vec mu);
    static SimplexWeights uniform(int m);

    const Vec& mu() const { return mu_; }
    int size() const { return static_cast<int>(mu_.size()); }

private:
    Vec mu_;
};

enum class StepKind { toward, away, drop };

/// Snapshot handed to an observer before each update is applied.
struct Iterate {
    int iteration = 0;
    StepKind kind = StepKind::toward;
    int vertex = -1;
    double kappa = 0.0;      // gradient entry of the chosen vertex
    double step = 0.0;       // step length that will be applied
    double max_step = 1.0;   // upper end of the feasible step interval
    double objective = 0.0;  // tracked logdet M(mu) before the update
    double gap = 0.0;        // max kappa - d
    std::span<const double> weights;
};

struct Options {
    double tol = 1e-7;
    /// 0 selects the default of 100 * m.
    int max_iter = 0;
    /// Wolfe away/drop steps; plain Frank-Wolfe when false.
    bool away_steps = true;
    /// Recompute M^{-1} and kappa from scratch every this many iterations.
    int refresh_every = 1000;
    kernels::Policy policy = kernels::Policy::automatic;
    std::function<void(const Iterate&)> observer;
};

struct Solution {
    Ellipsoid ellipsoid;           // {(y - c)^T (n S)^{-1} (y - c) <= 1}
    SimplexWeights weights;
    Mat second_moment;             // S = sum mu y y^T - c c^T (unscaled)
    Vec kappa;                     // gradient at the returned weights
    double duality_gap = 0.0;      // max kappa - (n + 1)
    double objective = 0.0;        // logdet M(mu)
    int iterations = 0;
    bool converged = false;
    bool regularized = false;      // jitter was added to a degenerate cloud
    double jitter = 0.0;           // isotropic term added to the moment block (1e-9 * diameter^2)
};

/// Compact per-solve statistics carried by filter step records.
struct SolveStats {
    int points = 0;
    int iterations = 0;
    double duality_gap = 0.0;
    bool converged = false;
};

SolveStats summarize(const Solution& s, int points);

/// logdet M(mu); throws NumericalError naming the rank when M is singular.
double dual_objective(const LiftedPoints& points, const SimplexWeights& mu);

/// kappa_i = y~_i^T M(mu)^{-1} y~_i, the partial derivatives of dual_objective.
Vec fw_gradient(const LiftedPoints& points, const SimplexWeights& mu);

/// Exact line-search step toward the vertex with gradient entry kappa.
double toward_step(double kappa, int d);
/// Exact line-search step away from a support vertex with gradient kappa
/// (before clipping to the drop bound mu_a / (1 - mu_a)).
double away_step(double kappa, int d);

Solution fw_solve(const PointCloud& cloud, const Options& opts = {});

/// max( max_i (kappa_i - d)^+ , max_i mu_i |kappa_i - d| ), from fresh kappa.
double kkt_residual(const Solution& solution, const PointCloud& cloud);

/// The solution ellipsoid scaled by max(1, (max kappa - 1) / n), which puts
/// every input point inside it even when the solve stopped early.
Ellipsoid covering_ellipsoid(const Solution& s);

/// Ellipsoid-only wrapper over fw_solve.
Ellipsoid enclose(const PointCloud& cloud, const Options& opts = {});

}  // namespace smf::mvee
