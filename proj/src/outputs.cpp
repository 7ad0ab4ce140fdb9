#include "smf/outputs.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace smf::outputs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    return os;
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

void ensure_output_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
    const fs::path probe = dir / ".write_probe";
    {
        std::ofstream os(probe);
        if (!os) throw ConfigError("output directory '" + dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_metrics_csv(std::ostream& os, const harness::Experiment& e)
{
    os << "k,filter,trace,logdet,rmse_x,rmse_theta,contained,time_s,failures\n";
    for (const harness::MetricRow& r : e.metrics) {
        os << r.k << ',' << config::filter_name(r.filter) << ',' << format_double(r.trace) << ','
           << format_double(r.logdet) << ',' << format_double(r.rmse_x) << ',' << format_double(r.rmse_theta) << ','
           << format_double(r.contained) << ',';
        // Wall time is left empty unless requested so that reruns are
        // byte-identical.
        if (e.config.record_timing) os << format_double(r.time_s);
        os << ',' << r.failures << '\n';
    }
}

std::string summary_json(const harness::Experiment& e)
{
    const auto& c = e.config;
    json cfg = {
        {"scenario", c.scenario},
        {"runs", c.runs},
        {"steps", e.steps},
        {"master_seed", c.master_seed},
        {"m_samples", c.m_samples},
        {"tol", c.tol},
        {"size_criterion", config::size_name(c.size_criterion)},
        {"sampling", config::sampling_name(c.sampling)},
        {"init_scale", c.init_scale},
        {"noise_cov_scale", c.noise_cov_scale},
        {"remainder_samples", c.remainder_samples},
        {"on_empty", c.on_empty == config::EmptyPolicy::carry ? "carry" : "error"},
        {"record_timing", c.record_timing},
        {"ellipse_runs", c.ellipse_runs},
        {"scenario_overrides", c.scenario_overrides},
    };
    json filters = json::array();
    for (const auto f : c.filters) filters.push_back(config::filter_name(f));
    cfg["filters"] = filters;

    json seeds = json::array();
    for (const auto& r : e.runs) seeds.push_back({{"run", r.run}, {"seed", r.seed}});

    json stats = json::object();
    for (const auto f : c.filters) {
        const harness::FilterSummary s = harness::summarize(e, f);
        stats[config::filter_name(f)] = {
            {"mean_trace_after_k10", number_or_null(s.mean_trace_after)},
            {"mean_rmse_x", number_or_null(s.mean_rmse_x)},
            {"mean_rmse_theta", number_or_null(s.mean_rmse_theta)},
            {"containment_rate", s.containment},
            {"failures", s.failures},
        };
    }
    json out = {{"config", cfg}, {"seeds", seeds}, {"aggregate", stats}};
    return out.dump(2) + "\n";
}

int write_ellipses(const fs::path& dir, const harness::Experiment& e)
{
    const fs::path sub = dir / "ellipses";
    ensure_output_dir(sub);
    int count = 0;
    for (const auto& r : e.runs) {
        for (const auto& [f, steps] : r.filters) {
            for (const auto& s : steps) {
                for (const auto& o : s.outlines) {
                    std::string name = "run" + std::to_string(r.run) + "_k" + std::to_string(s.k) + "_" +
                                       config::filter_name(f);
                    if (o.kind != "updated") name += "_" + o.kind;
                    std::ofstream os = open_out(sub / (name + ".csv"));
                    os << "x,y\n";
                    const Mat pts = ellipse_outline(o.ellipse, kOutlinePoints);
                    for (int i = 0; i < pts.cols(); ++i) {
                        os << format_double(pts(0, i)) << ',' << format_double(pts(1, i)) << '\n';
                    }
                    ++count;
                }
            }
        }
    }
    return count;
}

void emit_outputs(const fs::path& dir, const harness::Experiment& e)
{
    ensure_output_dir(dir);
    {
        std::ofstream os = open_out(dir / "metrics.csv");
        write_metrics_csv(os, e);
    }
    {
        std::ofstream os = open_out(dir / "summary.json");
        os << summary_json(e);
    }
    if (e.config.ellipse_runs > 0) write_ellipses(dir, e);
}

}  // namespace smf::outputs
