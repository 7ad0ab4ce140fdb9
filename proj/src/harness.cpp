#include "smf/harness.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>


namespace smf::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void fill_set_metrics(FilterStep& s, const Ellipsoid& e, const Vec& truth)
{
    s.estimate = e.center();
    s.trace = e.trace();
    s.logdet = e.logdet();
    s.contained = contains(e, truth, kContainmentSlack);
}

dsmf::Options dsmf_options(const config::RunConfig& cfg)
{
    dsmf::Options o;
    o.m_samples = cfg.m_samples;
    o.sampling = cfg.sampling;
    o.solver.tol = cfg.tol;
    o.size = cfg.size_criterion;
    return o;
}

baselines::EsmfOptions esmf_options(const config::RunConfig& cfg)
{
    baselines::EsmfOptions o;
    o.remainder_samples = cfg.remainder_samples;
    o.size = cfg.size_criterion;
    return o;
}

bool recoverable(const config::RunConfig& cfg) { return cfg.on_empty == config::EmptyPolicy::carry; }

std::vector<FilterStep> run_dsmf(const config::RunConfig& cfg, const scenarios::Scenario& sc,
                                 const scenarios::Truth& truth, const Vec& x0, bool outlines, Rng& rng)
{
    const auto& model = sc.model;
    const dsmf::Options opts = dsmf_options(cfg);
    Ellipsoid e(x0, sc.P0);
    std::vector<FilterStep> out;
    for (int k = 1; k <= static_cast<int>(truth.measurements.size()); ++k) {
        FilterStep s;
        s.k = k;
        const auto t0 = Clock::now();
        const dsmf::Prediction pred = dsmf::predict(e, model, k - 1, opts, rng);
        std::optional<Ellipsoid> meas;
        try {
            std::vector<dsmf::Interval> aux;
            if (model.aux_bounds) aux = model.aux_bounds(pred.ellipsoid);
            meas = dsmf::measurement_ellipsoid(truth.measurements[k - 1], model, aux, opts, rng).ellipsoid;
            const dsmf::FusionParams p =
                dsmf::optimize_rho(pred.ellipsoid, *meas, model.projection, opts.size, opts.rho_eps, opts.rho_tol);
            const dsmf::Fused f = dsmf::fuse(pred.ellipsoid, *meas, model.projection, p.rho);
            e = Ellipsoid(f.center, f.shape);
        } catch (const EmptyIntersection&) {
            if (!recoverable(cfg)) throw;
            e = pred.ellipsoid;
            s.failed = true;
        } catch (const DomainError&) {
            if (!recoverable(cfg)) throw;
            e = pred.ellipsoid;
            s.failed = true;
        }
        s.time_s = seconds_since(t0);
        fill_set_metrics(s, e, truth.states[k]);
        if (outlines) {
            s.outlines.push_back({"updated", project(e, model.projection)});
            s.outlines.push_back({"predicted", project(pred.ellipsoid, model.projection)});
            if (meas) s.outlines.push_back({"measurement", *meas});
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<FilterStep> run_esmf(const config::RunConfig& cfg, const scenarios::Scenario& sc,
                                 const scenarios::Truth& truth, const Vec& x0, bool outlines, Rng& rng)
{
    const auto& model = sc.model;
    const baselines::EsmfOptions opts = esmf_options(cfg);
    Ellipsoid e(x0, sc.P0);
    std::vector<FilterStep> out;
    for (int k = 1; k <= static_cast<int>(truth.measurements.size()); ++k) {
        FilterStep s;
        s.k = k;
        const auto t0 = Clock::now();
        const Ellipsoid pred = baselines::esmf_predict(e, model, k - 1, opts, rng);
        try {
            e = baselines::esmf_update(pred, model, truth.measurements[k - 1], opts, rng).updated;
        } catch (const EmptyIntersection&) {
            if (!recoverable(cfg)) throw;
            e = pred;
            s.failed = true;
        }
        s.time_s = seconds_since(t0);
        fill_set_metrics(s, e, truth.states[k]);
        if (outlines) {
            s.outlines.push_back({"updated", project(e, model.projection)});
            s.outlines.push_back({"predicted", project(pred, model.projection)});
        }
        out.push_back(std::move(s));
    }
    return out;
}

Ellipsoid sigma_ellipsoid(const baselines::GaussianBelief& b)
{
    return Ellipsoid(b.mean, kUkfSigmaScale * kUkfSigmaScale * b.covariance);
}

std::vector<FilterStep> run_ukf(const config::RunConfig& cfg, const scenarios::Scenario& sc,
                                const scenarios::Truth& truth, const Vec& x0, bool outlines)
{
    const auto& model = sc.model;
    baselines::UkfOptions opts;
    opts.noise_cov_scale = cfg.noise_cov_scale;
    baselines::GaussianBelief b{x0, baselines::noise_covariance(sc.P0, opts)};
    std::vector<FilterStep> out;
    for (int k = 1; k <= static_cast<int>(truth.measurements.size()); ++k) {
        FilterStep s;
        s.k = k;
        const auto t0 = Clock::now();
        const baselines::GaussianBelief pred = baselines::ukf_predict(b, model, k - 1, opts);
        b = baselines::ukf_update(pred, model, truth.measurements[k - 1], opts);
        s.time_s = seconds_since(t0);
        const Ellipsoid e = sigma_ellipsoid(b);
        s.estimate = b.mean;
        s.trace = e.trace();
        s.logdet = e.logdet();
        s.contained = baselines::mahalanobis2(b, truth.states[k]) <= kUkfSigmaScale * kUkfSigmaScale;
        if (outlines) {
            s.outlines.push_back({"updated", project(e, model.projection)});
            s.outlines.push_back({"predicted", project(sigma_ellipsoid(pred), model.projection)});
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::uint64_t run_seed(std::uint64_t master, int run)
{
    return mix_seed(master, static_cast<std::uint64_t>(run));
}

RunResult run_replicate(const config::RunConfig& cfg, const scenarios::Scenario& sc, int run, int steps)
{
    RunResult r;
    r.run = run;
    r.seed = run_seed(cfg.master_seed, run);
    Rng truth_rng(mix_seed(r.seed, 0));
    r.truth = scenarios::simulate_truth(sc, steps, truth_rng);
    Rng init_rng(mix_seed(r.seed, 1));
    r.initial_estimate = scenarios::initial_estimate(sc, cfg.init_scale, init_rng);
    const bool outlines = run < cfg.ellipse_runs;
    for (const FilterKind f : cfg.filters) {
        Rng rng(mix_seed(r.seed, 2 + static_cast<std::uint64_t>(f)));
        switch (f) {
        case FilterKind::dsmf:
            r.filters[f] = run_dsmf(cfg, sc, r.truth, r.initial_estimate, outlines, rng);
            break;
        case FilterKind::esmf:
            r.filters[f] = run_esmf(cfg, sc, r.truth, r.initial_estimate, outlines, rng);
            break;
        case FilterKind::ukf:
            r.filters[f] = run_ukf(cfg, sc, r.truth, r.initial_estimate, outlines);
            break;
        }
    }
    return r;
}

std::vector<MetricRow> aggregate(const std::vector<RunResult>& runs, const std::vector<FilterKind>& filters,
                                 int steps, int heading_index)
{
    std::vector<MetricRow> rows;
    const double n = static_cast<double>(runs.size());
    for (int k = 1; k <= steps; ++k) {
        for (const FilterKind f : filters) {
            MetricRow row;
            row.k = k;
            row.filter = f;
            double se_x = 0.0, se_th = 0.0, contained = 0.0;
            for (const RunResult& r : runs) {
                const FilterStep& s = r.filters.at(f)[k - 1];
                const Vec& x = r.truth.states[k];
                row.trace += s.trace;
                row.logdet += s.logdet;
                row.time_s += s.time_s;
                se_x += (s.estimate[0] - x[0]) * (s.estimate[0] - x[0]);
                if (heading_index >= 0) {
                    const double d = s.estimate[heading_index] - x[heading_index];
                    se_th += d * d;
                }
                contained += s.contained ? 1.0 : 0.0;
                row.failures += s.failed ? 1 : 0;
            }
            row.trace /= n;
            row.logdet /= n;
            row.time_s /= n;
            row.rmse_x = std::sqrt(se_x / n);
            row.rmse_theta = heading_index >= 0 ? std::sqrt(se_th / n) : std::numeric_limits<double>::quiet_NaN();
            row.contained = contained / n;
            rows.push_back(row);
        }
    }
    return rows;
}

Experiment run_experiment(const config::RunConfig& cfg)
{
    config::validate(cfg);
    const scenarios::Scenario sc = config::build_scenario(cfg);
    Experiment ex;
    ex.config = cfg;
    ex.steps = config::effective_steps(cfg);
    ex.heading_index = sc.heading_index;
    ex.runs.resize(cfg.runs);
    std::vector<std::exception_ptr> errors(cfg.runs);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < cfg.runs; ++r) {
        try {
            ex.runs[r] = run_replicate(cfg, sc, r, ex.steps);
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (int r = 0; r < cfg.runs; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const NumericalError& e) {
            throw NumericalError("run " + std::to_string(r) + ": " + e.what());
        }
    }
    ex.metrics = aggregate(ex.runs, cfg.filters, ex.steps, ex.heading_index);
    return ex;
}

FilterSummary summarize(const Experiment& e, FilterKind f)
{
    FilterSummary s;
    int after = 0, all = 0;
    for (const MetricRow& row : e.metrics) {
        if (row.filter != f) continue;
        ++all;
        s.mean_rmse_x += row.rmse_x;
        s.mean_rmse_theta += row.rmse_theta;
        s.containment += row.contained;
        s.failures += row.failures;
        if (row.k > kTransient) {
            s.mean_trace_after += row.trace;
            ++after;
        }
    }
    if (all > 0) {
        s.mean_rmse_x /= all;
        s.mean_rmse_theta /= all;
        s.containment /= all;
    }
    s.mean_trace_after = after > 0 ? s.mean_trace_after / after : std::numeric_limits<double>::quiet_NaN();
    return s;
}

}  // namespace smf::harness
