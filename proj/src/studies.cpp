#include "smf/studies.hpp"

#include "smf/baselines.hpp"
#include "smf/mvee.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace smf::studies {

namespace {

using Clock = std::chrono::steady_clock;

Mat uniform_cloud(int n, int m, Rng& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Mat pts(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) pts(i, j) = unif(rng);
    return pts;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw DimensionError("affine fit needs two or more paired values");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw DimensionError("affine fit needs distinct x values");
    AffineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

std::vector<BenchRow> bench_mvee(const BenchOptions& opts)
{
    if (opts.trials < 1) throw DimensionError("trials must be >= 1");
    std::vector<BenchRow> rows;
    for (const int n : opts.n) {
        for (const int m : opts.m) {
            if (n < 1 || m < n + 1) throw DimensionError("bench cells need n >= 1 and m >= n + 1");
            Rng rng(mix_seed(opts.seed, static_cast<std::uint64_t>(n) * 1000003u + m));
            mvee::Options mo;
            mo.tol = opts.tol;
            mo.policy = opts.policy;
            BenchRow row{n, m, opts.trials, 0.0, 0.0, 0.0, 0};
            double iters = 0.0;
            for (int t = 0; t < opts.trials; ++t) {
                const PointCloud c(uniform_cloud(n, m, rng), Provenance::image);
                const auto t0 = Clock::now();
                const mvee::Solution s = mvee::fw_solve(c, mo);
                row.mean_time_s += std::chrono::duration<double>(Clock::now() - t0).count();
                iters += s.iterations;
                row.unconverged += s.converged ? 0 : 1;
            }
            row.time_per_iteration_s = iters > 0 ? row.mean_time_s / iters : 0.0;
            row.mean_time_s /= opts.trials;
            row.mean_iterations = iters / opts.trials;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows)
{
    const auto precision = os.precision(12);
    os << "n,m,trials,fw_mean_s,mean_iterations,per_iteration_s,unconverged\n";
    for (const BenchRow& r : rows) {
        os << r.n << ',' << r.m << ',' << r.trials << ',' << r.mean_time_s << ',' << r.mean_iterations << ','
           << r.time_per_iteration_s << ',' << r.unconverged << '\n';
    }
    os.precision(precision);
}

std::vector<double> per_iteration_cost(int n, const std::vector<int>& ms, int iterations, int trials,
                                       std::uint64_t seed)
{
    std::vector<double> out;
    for (const int m : ms) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(m)));
        mvee::Options mo;
        mo.tol = 1e-13;
        mo.max_iter = iterations;
        mo.policy = kernels::Policy::serial;
        std::vector<double> per;
        for (int t = 0; t < trials; ++t) {
            const PointCloud c(uniform_cloud(n, m, rng), Provenance::image);
            const auto t0 = Clock::now();
            const mvee::Solution s = mvee::fw_solve(c, mo);
            const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
            per.push_back(dt / std::max(1, s.iterations));
        }
        out.push_back(median(per));
    }
    return out;
}

dsmf::SystemModel sweep_model()
{
    dsmf::SystemModel m;
    m.state_dim = 2;
    m.meas_dim = 2;
    m.f = [](const Vec& x, int) -> Vec { return x; };
    m.h = [](const Vec& x) -> Vec { return Eigen::Vector2d(std::hypot(x[0], x[1]), std::atan2(x[1], x[0])); };
    m.h_inv = [](const Vec& y, const Vec& v, std::span<const double>) -> Vec {
        const double r = y[0] - v[0];
        if (r < 0.0) throw DomainError("negative range " + std::to_string(r));
        return Eigen::Vector2d(r * std::cos(y[1] - v[1]), r * std::sin(y[1] - v[1]));
    };
    m.projection = Mat::Identity(2, 2);
    m.Q = 1e-12 * Mat::Identity(2, 2);
    m.R = Eigen::Vector2d(10.0, 1.0).asDiagonal();
    m.angle_components = {1};
    return m;
}

std::vector<SweepRow> sweep_sigma(const SweepOptions& opts)
{
    if (opts.replicates < 1) throw DimensionError("replicates must be >= 1");
    const dsmf::SystemModel model = sweep_model();
    const Ellipsoid noise(Vec::Zero(2), model.R);
    dsmf::Options dopt;
    dopt.m_samples = opts.m_samples;
    dopt.solver.tol = opts.tol;
    dopt.size = dsmf::SizeCriterion::logdet;
    baselines::EsmfOptions eopt;
    eopt.size = dsmf::SizeCriterion::logdet;

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < opts.sigmas.size(); ++i) {
        const double sigma = opts.sigmas[i];
        if (!(sigma > 0.0)) throw DimensionError("sigma must be positive");
        Rng rng(mix_seed(opts.seed, i));
        const Ellipsoid pred(Eigen::Vector2d(10.0, 20.0), sigma * Mat::Identity(2, 2));
        SweepRow row;
        row.sigma = sigma;
        int nd = 0, ne = 0;
        for (int r = 0; r < opts.replicates; ++r) {
            const Vec x = sample_interior(pred, 1, rng).point(0);
            const Vec y = model.h(x) + Vec(sample_interior(noise, 1, rng).point(0));
            try {
                const Ellipsoid meas = dsmf::measurement_ellipsoid(y, model, {}, dopt, rng).ellipsoid;
                const dsmf::FusionParams p = dsmf::optimize_rho(pred, meas, model.projection, dopt.size);
                const dsmf::Fused f = dsmf::fuse(pred, meas, model.projection, p.rho);
                row.dsmf_logdet += Ellipsoid(f.center, f.shape).logdet();
                ++nd;
            } catch (const EmptyIntersection&) {
                ++row.dsmf_failures;
            } catch (const DomainError&) {
                ++row.dsmf_failures;
            }
            try {
                row.esmf_logdet += baselines::esmf_update(pred, model, y, eopt, rng).updated.logdet();
                ++ne;
            } catch (const EmptyIntersection&) {
                ++row.esmf_failures;
            }
        }
        row.dsmf_logdet = nd > 0 ? row.dsmf_logdet / nd : std::nan("");
        row.esmf_logdet = ne > 0 ? row.esmf_logdet / ne : std::nan("");
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    const auto precision = os.precision(12);
    os << "sigma,dsmf_logdet,esmf_logdet,dsmf_failures,esmf_failures\n";
    for (const SweepRow& r : rows) {
        os << r.sigma << ',' << r.dsmf_logdet << ',' << r.esmf_logdet << ',' << r.dsmf_failures << ','
           << r.esmf_failures << '\n';
    }
    os.precision(precision);
}

}  // namespace smf::studies
