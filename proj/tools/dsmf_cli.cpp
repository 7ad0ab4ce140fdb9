#include "smf/config.hpp"
#include "smf/harness.hpp"
#include "smf/mvee.hpp"
#include "smf/outputs.hpp"
#include "smf/studies.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace smf;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

PointCloud read_points(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open points file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            rows.push_back(config::parse_list(line));
        } catch (const ConfigError& e) {
            // A non-numeric first row is a header.
            if (rows.empty() && !header_seen) {
                header_seen = true;
                continue;
            }
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (rows.back().size() != rows.front().size()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(rows.front().size()) + " columns");
        }
    }
    if (rows.empty()) throw ConfigError("points file '" + path + "' has no points");
    Mat pts(rows.front().size(), rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < rows[j].size(); ++i) pts(i, j) = rows[j][i];
    return {pts, Provenance::image};
}

std::vector<int> to_ints(const std::string& s)
{
    std::vector<int> out;
    for (const double v : config::parse_list(s)) {
        if (v != static_cast<int>(v)) throw ConfigError("expected integers, got '" + s + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

struct SimulateArgs {
    std::string config_path, scenario, filters, out;
    int runs = 0, steps = 0;
    long long seed = -1;
};

int cmd_simulate(const SimulateArgs& a)
{
    config::RunConfig cfg = config::load_config(a.config_path);
    if (!a.scenario.empty()) cfg.scenario = a.scenario;
    if (!a.filters.empty()) cfg.filters = config::parse_filters(a.filters);
    if (a.runs > 0) cfg.runs = a.runs;
    if (a.steps > 0) cfg.steps = a.steps;
    if (a.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(a.seed);
    if (!a.out.empty()) cfg.output = a.out;
    config::validate(cfg);
    outputs::ensure_output_dir(cfg.output);
    const harness::Experiment ex = harness::run_experiment(cfg);
    outputs::emit_outputs(cfg.output, ex);
    for (const auto f : cfg.filters) {
        const harness::FilterSummary s = harness::summarize(ex, f);
        std::cout << config::filter_name(f) << ": mean trace (k>" << harness::kTransient
                  << ") = " << s.mean_trace_after << ", mean rmse_x = " << s.mean_rmse_x
                  << ", containment = " << s.containment << ", failures = " << s.failures << '\n';
    }
    std::cout << "wrote " << cfg.output << "/metrics.csv\n";
    return 0;
}

int cmd_mvee(const std::string& path, double tol, int max_iter)
{
    const PointCloud cloud = read_points(path);
    if (!(tol > 0.0)) throw ConfigError("--tol must be positive");
    if (max_iter < 0) throw ConfigError("--max-iter must be >= 0");
    mvee::Options o;
    o.tol = tol;
    o.max_iter = max_iter;
    const mvee::Solution s = mvee::fw_solve(cloud, o);
    const Mat& P = s.ellipsoid.shape();
    std::vector<double> shape;
    for (int i = 0; i < P.rows(); ++i)
        for (int j = 0; j < P.cols(); ++j) shape.push_back(P(i, j));
    const Vec& c = s.ellipsoid.center();
    nlohmann::json out = {
        {"center", std::vector<double>(c.data(), c.data() + c.size())},
        {"shape", shape},
        {"gap", s.duality_gap},
        {"iterations", s.iterations},
        {"converged", s.converged},
    };
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_bench(const std::string& ns, const std::string& ms, int trials, double tol, const std::string& policy)
{
    studies::BenchOptions o;
    o.n = to_ints(ns);
    o.m = to_ints(ms);
    o.trials = trials;
    o.tol = tol;
    if (policy == "serial") o.policy = kernels::Policy::serial;
    else if (policy == "parallel") o.policy = kernels::Policy::parallel;
    else if (policy != "auto") throw ConfigError("--policy must be serial, parallel or auto");
    const auto rows = studies::bench_mvee(o);
    studies::write_bench_csv(std::cout, rows);
    for (const int n : o.n) {
        std::vector<double> x, y;
        for (const auto& r : rows) {
            if (r.n != n) continue;
            x.push_back(r.m);
            y.push_back(r.time_per_iteration_s);
        }
        if (x.size() < 2) continue;
        const studies::AffineFit f = studies::fit_affine(x, y);
        std::cerr << "n=" << n << " per-iteration time vs m: slope " << f.slope << " s, r2 " << f.r2 << '\n';
    }
    return 0;
}

int cmd_sweep(double from, double to, double step, int replicates, long long seed)
{
    if (!(step > 0.0) || !(from > 0.0) || to < from) throw ConfigError("sigma range must satisfy 0 < from <= to, step > 0");
    studies::SweepOptions o;
    o.sigmas.clear();
    for (int i = 0;; ++i) {
        const double s = from + i * step;
        if (s > to + 1e-9 * step) break;
        o.sigmas.push_back(s);
    }
    o.replicates = replicates;
    if (seed >= 0) o.seed = static_cast<std::uint64_t>(seed);
    const auto rows = studies::sweep_sigma(o);
    studies::write_sweep_csv(std::cout, rows);
    if (rows.size() >= 2) {
        std::vector<double> x, yd, ye;
        for (const auto& r : rows) {
            x.push_back(r.sigma);
            yd.push_back(r.dsmf_logdet);
            ye.push_back(r.esmf_logdet);
        }
        std::cerr << "logdet slope: dsmf " << studies::fit_affine(x, yd).slope << ", esmf "
                  << studies::fit_affine(x, ye).slope << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Set-membership filtering toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo filter comparison");
    simulate->add_option("--config", sim.config_path, "Run configuration file")->required();
    simulate->add_option("--scenario", sim.scenario, "radar or robot");
    simulate->add_option("--filters", sim.filters, "Comma-separated subset of dsmf,esmf,ukf");
    simulate->add_option("--runs", sim.runs, "Monte Carlo replicates");
    simulate->add_option("--steps", sim.steps, "Time steps per run");
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--out", sim.out, "Output directory");

    std::string points;
    double tol = 1e-7;
    int max_iter = 0;
    auto* mv = app.add_subcommand("mvee", "Minimum-volume enclosing ellipsoid of a CSV point cloud");
    mv->add_option("--points", points, "CSV file, one point per row, optional header")->required();
    mv->add_option("--tol", tol, "Relative duality-gap tolerance")->required();
    mv->add_option("--max-iter", max_iter, "Iteration cap (0: 100 * points)");

    std::string ns = "2,6", ms = "50,100,200,400,600,800,1000", policy = "auto";
    int trials = 20;
    double bench_tol = 1e-7;
    auto* bench = app.add_subcommand("bench", "Time the MVEE solver on standard-uniform clouds");
    bench->add_option("--n", ns, "Dimensions");
    bench->add_option("--m", ms, "Point counts");
    bench->add_option("--trials", trials, "Clouds per cell");
    bench->add_option("--tol", bench_tol, "Solver tolerance");
    bench->add_option("--policy", policy, "Kernel policy: serial, parallel or auto");

    double from = 5, to = 50, step = 5;
    int replicates = 50;
    long long sweep_seed = -1;
    auto* sweep = app.add_subcommand("sweep-sigma", "Updated-set size versus prediction scale sigma");
    sweep->add_option("--from", from);
    sweep->add_option("--to", to);
    sweep->add_option("--step", step);
    sweep->add_option("--replicates", replicates);
    sweep->add_option("--seed", sweep_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*mv) return cmd_mvee(points, tol, max_iter);
        if (*bench) return cmd_bench(ns, ms, trials, bench_tol, policy);
        if (*sweep) return cmd_sweep(from, to, step, replicates, sweep_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DimensionError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
