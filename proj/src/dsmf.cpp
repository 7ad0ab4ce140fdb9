#include "smf/dsmf.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace smf::dsmf {

namespace {

constexpr int kCoarseScan = 41;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

// Shared algebra of fuse/fused_size. `ok` is false when delta >= 1 or the
// bracket fails to factor.
struct Update {
    Vec center;
    Mat pbar;
    double delta = 0.0;
    bool ok = false;
};

Update linear_update(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& e, double rho)
{
    const Mat pr = pred.shape() / (1.0 - rho);
    const Mat bracket = symmetrize(e * pr * e.transpose() + meas.shape() / rho);
    Eigen::LLT<Mat> llt(bracket);
    Update u;
    if (llt.info() != Eigen::Success) return u;
    const Vec innov = meas.center() - e * pred.center();
    const Mat gain = llt.solve(e * pr).transpose();  // pr E^T B^{-1}
    u.center = pred.center() + gain * innov;
    u.delta = innov.dot(llt.solve(innov));
    u.pbar = symmetrize(pr - gain * e * pr);
    u.ok = u.delta < 1.0;
    return u;
}

void check_fusion_args(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& e)
{
    if (e.cols() != pred.dim() || e.rows() != meas.dim()) {
        throw DimensionError("fusion projection must be " + std::to_string(meas.dim()) + "x" +
                             std::to_string(pred.dim()));
    }
}

std::string format_vec(const Vec& v)
{
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << "]";
    return os.str();
}

template <class Fn>
auto with_step_context(int k, Fn&& fn) -> decltype(fn())
{
    const std::string pre = "step " + std::to_string(k) + ": ";
    try {
        return fn();
    } catch (const EmptyIntersection& e) {
        throw EmptyIntersection(pre + e.what());
    } catch (const DomainError& e) {
        throw DomainError(pre + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(pre + e.what());
    } catch (const DimensionError& e) {
        throw DimensionError(pre + e.what());
    }
}

}  // namespace

void SystemModel::validate() const
{
    if (state_dim < 1 || meas_dim < 1) throw DimensionError("model dimensions must be positive");
    if (!f || !h || !h_inv) throw DimensionError("model needs f, h and h_inv");
    if (Q.rows() != state_dim || Q.cols() != state_dim) throw DimensionError("Q must be n x n");
    if (R.rows() != meas_dim || R.cols() != meas_dim) throw DimensionError("R must be l x l");
    if (projection.cols() != state_dim || projection.rows() < 1 || projection.rows() > state_dim) {
        throw DimensionError("projection must be r x n with 1 <= r <= n");
    }
    Eigen::FullPivLU<Mat> lu(projection);
    if (lu.rank() != projection.rows()) throw DimensionError("projection must have full row rank");
}

double wrap_angle(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(a + std::numbers::pi, two_pi);
    if (w <= 0.0) w += two_pi;
    return w - std::numbers::pi;
}

Vec wrap_innovation(const SystemModel& model, Vec d)
{
    for (const int i : model.angle_components) d[i] = wrap_angle(d[i]);
    return d;
}

Mat numeric_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& x)
{
    const Vec f0 = fn(x);
    Mat j(f0.size(), x.size());
    for (int c = 0; c < x.size(); ++c) {
        const double step = 1e-6 * std::max(1.0, std::abs(x[c]));
        Vec xp = x, xm = x;
        xp[c] += step;
        xm[c] -= step;
        j.col(c) = (fn(xp) - fn(xm)) / (2.0 * step);
    }
    return j;
}

Mat state_jacobian(const SystemModel& model, const Vec& x, int k)
{
    if (model.f_jacobian) return model.f_jacobian(x, k);
    return numeric_jacobian([&](const Vec& z) { return model.f(z, k); }, x);
}

Mat meas_jacobian(const SystemModel& model, const Vec& x)
{
    if (model.h_jacobian) return model.h_jacobian(x);
    const Vec h0 = model.h(x);
    // Differences are taken relative to h(x) so angle components never jump.
    return numeric_jacobian([&](const Vec& z) { return wrap_innovation(model, model.h(z) - h0); }, x);
}

Prediction predict(const Ellipsoid& e, const SystemModel& model, int k, const Options& opts, Rng& rng)
{
    if (e.dim() != model.state_dim) throw DimensionError("ellipsoid does not match the model state dimension");
    if (opts.m_samples < model.state_dim + 1) throw DimensionError("m_samples must be at least n + 1");
    const PointCloud src = sample(e, opts.m_samples, opts.sampling, rng);
    Mat img(model.state_dim, src.size());
    for (int i = 0; i < src.size(); ++i) img.col(i) = model.f(src.point(i), k);
    const mvee::Solution sol = mvee::fw_solve(PointCloud(std::move(img), Provenance::image), opts.solver);
    const Ellipsoid ef = sol.converged ? sol.ellipsoid : mvee::covering_ellipsoid(sol);
    Prediction out{ef, ef, 0.0, mvee::summarize(sol, src.size())};
    if (model.Q.trace() > 0.0) {
        out.p_star = optimal_p(ef.shape(), model.Q);
        out.ellipsoid = minkowski_outer(ef, model.Q, out.p_star);
    }
    return out;
}

MeasurementSet measurement_ellipsoid(const Vec& y, const SystemModel& model, std::span<const Interval> aux,
                                     const Options& opts, Rng& rng)
{
    if (y.size() != model.meas_dim) throw DimensionError("measurement has the wrong dimension");
    const Ellipsoid noise(Vec::Zero(model.meas_dim), model.R);
    const int m = opts.m_samples;

    PointCloud vs;
    Mat grid;  // aux values, one combination per column
    if (aux.empty()) {
        vs = sample(noise, m, opts.sampling, rng);
        grid.resize(0, 1);
    } else {
        const int q = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
        const int a = static_cast<int>(aux.size());
        const int per = std::max(1, static_cast<int>(std::ceil(std::pow(q, 1.0 / a) - 1e-12)));
        vs = sample(noise, q, opts.sampling, rng);
        int combos = 1;
        for (int i = 0; i < a; ++i) combos *= per;
        grid.resize(a, combos);
        for (int c = 0; c < combos; ++c) {
            int idx = c;
            for (int i = 0; i < a; ++i) {
                const int j = idx % per;
                idx /= per;
                const double t = per > 1 ? static_cast<double>(j) / (per - 1) : 0.5;
                grid(i, c) = aux[i].lo + t * (aux[i].hi - aux[i].lo);
            }
        }
    }

    const int r = model.proj_dim();
    Mat pts(r, vs.size() * grid.cols());
    int col = 0;
    for (int c = 0; c < grid.cols(); ++c) {
        const Vec av = grid.col(c);
        const std::span<const double> as(av.data(), static_cast<std::size_t>(av.size()));
        for (int i = 0; i < vs.size(); ++i, ++col) {
            try {
                pts.col(col) = model.h_inv(y, vs.point(i), as);
            } catch (const DomainError& e) {
                throw DomainError("inverse measurement undefined at sample " + std::to_string(col) +
                                  " (v = " + format_vec(vs.point(i)) + "): " + e.what());
            }
        }
    }
    const mvee::Solution sol = mvee::fw_solve(PointCloud(std::move(pts), Provenance::image), opts.solver);
    return {sol.converged ? sol.ellipsoid : mvee::covering_ellipsoid(sol), mvee::summarize(sol, col)};
}

Fused fuse(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& projection, double rho)
{
    check_fusion_args(pred, meas, projection);
    if (!(rho > 0.0 && rho < 1.0)) throw DimensionError("rho must lie in (0, 1)");
    Update u = linear_update(pred, meas, projection, rho);
    if (u.pbar.size() == 0) throw NumericalError("fusion bracket is not positive definite");
    if (!u.ok) {
        throw EmptyIntersection("empty intersection: delta = " + std::to_string(u.delta) + " >= 1 at rho = " +
                                std::to_string(rho));
    }
    return {std::move(u.center), (1.0 - u.delta) * u.pbar, u.delta};
}

double fused_size(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& projection, double rho,
                  SizeCriterion criterion)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const Update u = linear_update(pred, meas, projection, rho);
    if (!u.ok) return inf;
    const double scale = 1.0 - u.delta;
    if (criterion == SizeCriterion::trace) return scale * u.pbar.trace();
    Eigen::LLT<Mat> llt(u.pbar);
    if (llt.info() != Eigen::Success) return inf;
    return u.pbar.rows() * std::log(scale) + 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

FusionParams optimize_rho(const Ellipsoid& pred, const Ellipsoid& meas, const Mat& projection,
                          SizeCriterion criterion, double eps, double tol)
{
    check_fusion_args(pred, meas, projection);
    if (!(eps > 0.0 && eps < 0.5) || !(tol > 0.0)) throw DimensionError("invalid rho search settings");
    auto f = [&](double rho) { return fused_size(pred, meas, projection, rho, criterion); };

    const double lo = eps, hi = 1.0 - eps;
    int best = -1;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kCoarseScan; ++i) {
        const double v = f(lo + (hi - lo) * i / (kCoarseScan - 1));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best < 0) throw EmptyIntersection("empty intersection: delta >= 1 for every rho");

    const double cell = (hi - lo) / (kCoarseScan - 1);
    double a = lo + cell * std::max(0, best - 1);
    double b = lo + cell * std::min(kCoarseScan - 1, best + 1);
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    double rho = f1 <= f2 ? x1 : x2;
    if (std::min(f1, f2) > best_val) rho = lo + cell * best;

    FusionParams out;
    out.rho = rho;
    out.delta = linear_update(pred, meas, projection, rho).delta;
    return out;
}

StepRecord step(const Ellipsoid& e, const SystemModel& model, const Vec& y, int k, const Options& opts, Rng& rng)
{
    return with_step_context(k, [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const Prediction pred = predict(e, model, k - 1, opts, rng);
        std::vector<Interval> aux;
        if (model.aux_bounds) aux = model.aux_bounds(pred.ellipsoid);
        const MeasurementSet meas = measurement_ellipsoid(y, model, aux, opts, rng);
        FusionParams params =
            optimize_rho(pred.ellipsoid, meas.ellipsoid, model.projection, opts.size, opts.rho_eps, opts.rho_tol);
        params.p_star = pred.p_star;
        const Fused fused = fuse(pred.ellipsoid, meas.ellipsoid, model.projection, params.rho);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return StepRecord{k,
                          pred.ellipsoid,
                          meas.ellipsoid,
                          Ellipsoid(fused.center, fused.shape),
                          params,
                          pred.stats,
                          meas.stats,
                          elapsed,
                          false};
    });
}

}  // namespace smf::dsmf
