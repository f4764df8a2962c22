#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "flexsum/aggregate.hpp"
#include "flexsum/experiments.hpp"
#include "flexsum/io.hpp"
#include "flexsum/parallel.hpp"

using namespace flexsum;
using io::json;

namespace
{

enum ExitCode
{
    kOk = 0,
    kUsage = 1,
    kNumerical = 2,
    kValidation = 3
};

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Common
{
    unsigned jobs = 1;
};

struct RangeFlags
{
    std::vector<double> a, b, theta_r, delta, p_max;
    std::optional<double> theta_a;
    std::optional<int> max_resamples;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--a-range", a, "retention factor range lo,hi")->expected(2)->delimiter(',');
        cmd->add_option("--b-range", b, "thermal gain range lo,hi (degC/kW)")->expected(2)->delimiter(',');
        cmd->add_option("--theta-r-range", theta_r, "set-point range lo,hi (degC)")->expected(2)->delimiter(',');
        cmd->add_option("--delta-range", delta, "dead-band width range lo,hi (degC)")->expected(2)->delimiter(',');
        cmd->add_option("--p-max-range", p_max, "power rating range lo,hi (kW)")->expected(2)->delimiter(',');
        cmd->add_option("--theta-a", theta_a, "ambient temperature (degC)");
        cmd->add_option("--max-resamples", max_resamples, "draws allowed per device before giving up");
    }

    SamplerConfig config() const
    {
        SamplerConfig cfg;
        auto set = [](Range& r, const std::vector<double>& v) {
            if (!v.empty()) r = {v.at(0), v.at(1)};
        };
        set(cfg.a, a);
        set(cfg.b, b);
        set(cfg.theta_r, theta_r);
        set(cfg.delta, delta);
        set(cfg.p_max, p_max);
        if (theta_a) cfg.theta_a = *theta_a;
        if (max_resamples) cfg.max_resamples = *max_resamples;
        cfg.validate();
        return cfg;
    }
};

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
        std::cout << text;
    else
        io::write_text(path, text);
}

void emit_json(const std::string& path, const json& j) { emit(path, j.dump(2) + "\n"); }

Population load_population(const std::string& path, unsigned jobs)
{
    if (path.empty()) throw UsageError("--pop is required");
    return io::population_from_json(io::read_json(path), jobs);
}

std::string sidecar(const std::string& csv_path) { return csv_path + ".meta.json"; }

// ---------------------------------------------------------------------------------------------

struct GenerateArgs
{
    std::size_t n = 0;
    std::size_t horizon = 12;
    std::uint64_t seed = 1;
    RangeFlags ranges;
    std::string out;
};

int cmd_generate(const GenerateArgs& a, const Common& c)
{
    if (a.n == 0) throw UsageError("--n must be at least 1");
    const auto pop = sample_population(a.n, a.horizon, a.ranges.config(), a.seed, c.jobs);
    emit_json(a.out, io::to_json(pop));
    return kOk;
}

struct ApproxArgs
{
    std::string pop;
    std::string out;
};

int cmd_approx(const ApproxArgs& a, const Common& c)
{
    auto pop = load_population(a.pop, c.jobs);
    std::vector<InnerApprox> fresh(pop.size());
    parallel_for(pop.size(), c.jobs,
                 [&](std::size_t i) { fresh[i] = compute_bounds(pop.members[i].device, pop.members[i].id); });
    json list = json::array();
    for (const auto& apx : fresh)
    {
        json j = io::to_json(apx);
        j["z_lb"] = apx.z_lb;
        j["z_ub"] = apx.z_ub;
        list.push_back(std::move(j));
    }
    json out = io::metadata(pop.seed, io::to_json(pop.config));
    out["horizon"] = pop.horizon;
    out["approximations"] = std::move(list);
    emit_json(a.out, out);
    return kOk;
}

struct AggregateArgs
{
    std::string pop;
    std::string out;
    std::size_t samples = 32;
    std::uint64_t seed = 1;
};

int cmd_aggregate(const AggregateArgs& a, const Common& c)
{
    const auto pop = load_population(a.pop, c.jobs);
    const auto agg = pop.aggregate();
    const std::size_t T = pop.horizon;
    std::vector<Subset> subsets;
    for (std::size_t t = 1; t <= T; ++t) subsets.push_back(Subset::prefix(t));
    Rng rng(a.seed, 17);
    for (std::size_t k = 0; k < a.samples; ++k) subsets.emplace_back(rng.next_u64() & Subset::full(T).bits());
    json table = json::array();
    for (auto s : subsets) table.push_back({{"A", s.periods()}, {"p", agg.p(s)}, {"b", agg.b(s)}});
    json members = json::array();
    for (const auto& m : agg.members()) members.push_back(io::to_json(m));
    json out = io::metadata(a.seed, {{"population_seed", pop.seed}, {"samples", a.samples}});
    out["horizon"] = T;
    out["members"] = std::move(members);
    out["table"] = std::move(table);
    emit_json(a.out, out);
    return kOk;
}

struct OptimizeArgs
{
    std::string pop;
    std::string cost;
    std::uint64_t seed = 1;
    std::string sense = "min";
    bool disaggregate = false;
    std::string out;
};

int cmd_optimize(const OptimizeArgs& a, const Common& c)
{
    const auto pop = load_population(a.pop, c.jobs);
    const std::size_t T = pop.horizon;
    Vec cost;
    if (!a.cost.empty())
        cost = io::read_cost_csv(a.cost);
    else
    {
        Rng rng(a.seed, 19);
        cost.resize(T);
        for (auto& v : cost) v = rng.uniform();
    }
    if (cost.size() != T) throw UsageError("cost vector has " + std::to_string(cost.size()) + " entries, expected " +
                                           std::to_string(T));
    if (a.sense != "min" && a.sense != "max") throw UsageError("--sense must be min or max");
    const bool minimize = a.sense == "min";
    Vec directed = cost;
    if (minimize)
        for (auto& v : directed) v = -v;

    const auto agg = pop.aggregate();
    const auto g = greedy_linmax(agg.functions(), directed);
    const double j_gpoly = minimize ? -g.value : g.value;
    const double j_exact = exact_linear_cost(pop, cost, minimize ? Objective::kMinimize : Objective::kMaximize, c.jobs);
    double j_h = 0.0;
    for (const auto& h : fit_homothets(pop, c.jobs)) j_h += minimize ? -support(h, directed) : support(h, directed);

    json out = io::metadata(a.seed, {{"sense", a.sense}, {"cost_file", a.cost}, {"population_seed", pop.seed}});
    out["cost"] = cost;
    out["gpoly"] = {{"J", j_gpoly}, {"error", approximation_error(j_gpoly, j_exact)}, {"profile", g.point}};
    out["homothet"] = {{"J", j_h}, {"error", approximation_error(j_h, j_exact)}, {"label", "homothet (reconstructed)"}};
    out["exact"] = {{"J", j_exact}};
    int code = kOk;
    if (a.disaggregate)
    {
        DisaggregateOptions opts;
        opts.jobs = c.jobs;
        const auto d = flexsum::disaggregate(pop, g.point, opts);
        out["disaggregation"] = {{"feasible", d.feasible}, {"residual", d.residual}, {"rounds", d.rounds},
                                 {"profiles", d.profiles}};
        if (!d.feasible) code = kNumerical;
    }
    emit_json(a.out, out);
    return code;
}

struct TrackArgs
{
    std::string pop;
    std::string signal;
    std::string synth = "inside";
    std::uint64_t signal_seed = 1;
    int vertices = 5;
    double amplitude = 0.3;
    double period = 0.0;
    int max_iter = 500;
    double gap_tol = 1e-4;
    bool vanilla = false;
    std::string out_csv;
    std::string out_json;
    std::string signal_out;
};

int cmd_track(const TrackArgs& a, const Common& c)
{
    const auto pop = load_population(a.pop, c.jobs);
    SignalConfig sc;
    json signal_meta;
    Vec g;
    if (!a.signal.empty())
    {
        g = io::read_signal_csv(a.signal);
        signal_meta = {{"file", a.signal}};
    }
    else
    {
        sc.kind = signal_kind_from_string(a.synth);
        sc.seed = a.signal_seed;
        sc.vertices = a.vertices;
        sc.amplitude = a.amplitude;
        sc.period = a.period;
        g = synthesize_signal(pop.aggregate(), sc);
        signal_meta = {{"kind", to_string(sc.kind)}, {"seed", sc.seed},     {"vertices", sc.vertices},
                       {"amplitude", sc.amplitude},  {"period", sc.period}, {"phase", sc.phase}};
    }
    if (g.size() != pop.horizon)
        throw UsageError("signal has " + std::to_string(g.size()) + " periods, population horizon is " +
                         std::to_string(pop.horizon));
    if (!a.signal_out.empty()) io::write_text(a.signal_out, io::signal_csv(g));

    TrackingConfig cfg;
    cfg.max_iter = a.max_iter;
    cfg.gap_tol = a.gap_tol;
    cfg.away_steps = !a.vanilla;
    const auto cmp = compare_tracking(pop, g, cfg, c.jobs);

    json out = io::metadata(pop.seed, {{"signal", signal_meta},
                                       {"max_iter", cfg.max_iter},
                                       {"gap_tol", cfg.gap_tol},
                                       {"away_steps", cfg.away_steps}});
    out["gpoly"] = io::to_json(cmp.gpoly);
    out["homothet"] = io::to_json(cmp.homothet);
    out["homothet"]["label"] = "homothet (reconstructed)";
    out["summary"] = {{"rmse_gpoly", cmp.gpoly.rmse}, {"rmse_homothet", cmp.homothet.rmse}};
    if (!a.out_csv.empty())
    {
        io::write_text(a.out_csv, io::tracking_csv(cmp));
        io::write_json(sidecar(a.out_csv), io::metadata(pop.seed, out["config"]));
    }
    if (!a.out_json.empty())
        io::write_json(a.out_json, out);
    else
        std::cout << out["summary"].dump(2) << "\n";
    if (!cmp.gpoly.converged || !cmp.homothet.converged)
        std::cerr << "warning: tracking stopped at max_iter before reaching gap_tol\n";
    return kOk;
}

struct ApproxErrorArgs
{
    std::string pop;
    std::size_t n = 100;
    std::vector<std::size_t> horizons = default_horizons();
    std::size_t trials = 50;
    std::uint64_t seed = 1;
    RangeFlags ranges;
    std::string out;
    std::string summary;
    std::string gnuplot;
};

std::string gnuplot_script(const std::string& summary_csv)
{
    return "set datafile separator ','\n"
           "set key autotitle columnhead\n"
           "set xlabel 'horizon T'\n"
           "set ylabel 'mean approximation error'\n"
           "set terminal pngcairo size 800,500\n"
           "set output 'approx_error.png'\n"
           "plot '" +
           summary_csv +
           "' using 1:3 with linespoints title 'g-polymatroid', \\\n"
           "     '' using 1:4 with linespoints title 'homothet (reconstructed)'\n";
}

int cmd_approx_error(const ApproxErrorArgs& a, const Common& c)
{
    ApproxErrorConfig cfg;
    cfg.n = a.n;
    cfg.horizons = a.horizons;
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.sampler = a.ranges.config();
    cfg.jobs = c.jobs;
    std::optional<Population> fixed;
    if (!a.pop.empty()) fixed = load_population(a.pop, c.jobs);
    const auto records = run_approx_error(cfg, fixed ? &*fixed : nullptr);
    const auto rows = summarize(records);

    std::vector<json> horizons_json(cfg.horizons.begin(), cfg.horizons.end());
    const json config = {{"n", fixed ? fixed->size() : cfg.n},
                         {"horizons", horizons_json},
                         {"trials", cfg.trials},
                         {"population_file", a.pop},
                         {"sampler", io::to_json(cfg.sampler)},
                         {"cost", "U[0,1] per period, minimization"}};
    emit(a.out, io::records_csv(records));
    if (!a.out.empty() && a.out != "-") io::write_json(sidecar(a.out), io::metadata(cfg.seed, config));
    const std::string summary = io::summary_csv(rows);
    if (!a.summary.empty())
    {
        io::write_text(a.summary, summary);
        io::write_json(sidecar(a.summary), io::metadata(cfg.seed, config));
    }
    if (!a.gnuplot.empty())
        io::write_text(a.gnuplot, gnuplot_script(a.summary.empty() ? "summary.csv" : a.summary));
    if (!a.out.empty() && a.out != "-") std::cout << summary;
    return kOk;
}

struct ValidateArgs
{
    std::string pop;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_validate(const ValidateArgs& a, const Common& c)
{
    const auto pop = load_population(a.pop, c.jobs);
    const auto reports = run_validation(pop, a.seed, c.jobs);
    json suites = json::array();
    bool ok = true;
    for (const auto& r : reports)
    {
        suites.push_back(io::to_json(r));
        ok = ok && r.passed();
        std::cerr << (r.passed() ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks, " << r.failures
                  << " failures)\n";
        for (const auto& m : r.messages) std::cerr << "  " << m << "\n";
    }
    json out = io::metadata(a.seed, {{"population", a.pop}, {"population_seed", pop.seed}});
    out["suites"] = std::move(suites);
    out["passed"] = ok;
    emit_json(a.out, out);
    return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"flexsum: inner g-polymatroid approximations and aggregation of TCL flexibility"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);
    Common common;
    app.add_option("--jobs,-j", common.jobs, "worker threads")->envname("FLEXSUM_JOBS")->check(CLI::PositiveNumber);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "sample a TCL population");
    g->add_option("--n", gen.n, "number of devices")->required();
    g->add_option("--horizon,-T", gen.horizon, "number of periods")->check(CLI::Range(1, 64));
    g->add_option("--seed", gen.seed, "random seed");
    g->add_option("--out,-o", gen.out, "output JSON (default stdout)");
    gen.ranges.add(g);

    ApproxArgs apx;
    auto* ap = app.add_subcommand("approx", "recompute the inner approximation of every device");
    ap->add_option("--pop", apx.pop, "population JSON")->required();
    ap->add_option("--out,-o", apx.out, "output JSON (default stdout)");

    AggregateArgs agg;
    auto* ag = app.add_subcommand("aggregate", "export the aggregate set functions");
    ag->add_option("--pop", agg.pop, "population JSON")->required();
    ag->add_option("--samples", agg.samples, "random subsets in the audit table");
    ag->add_option("--seed", agg.seed, "seed for the sampled subsets");
    ag->add_option("--out,-o", agg.out, "output JSON (default stdout)");

    OptimizeArgs opt;
    auto* op = app.add_subcommand("optimize", "linear cost over the aggregate, baseline and exact");
    op->add_option("--pop", opt.pop, "population JSON")->required();
    op->add_option("--cost", opt.cost, "cost CSV (t,c); random U[0,1] when omitted");
    op->add_option("--seed", opt.seed, "seed for the random cost");
    op->add_option("--sense", opt.sense, "min or max")->check(CLI::IsMember({"min", "max"}));
    op->add_flag("--disaggregate", opt.disaggregate, "dispatch the aggregate optimizer to devices");
    op->add_option("--out,-o", opt.out, "output JSON (default stdout)");

    TrackArgs tr;
    auto* tk = app.add_subcommand("track", "track a generation signal");
    tk->add_option("--pop", tr.pop, "population JSON")->required();
    auto* sig = tk->add_option("--signal", tr.signal, "signal CSV (t,g_kW)");
    tk->add_option("--synth", tr.synth, "synthesized signal: inside, sine or zero")->excludes(sig);
    tk->add_option("--signal-seed", tr.signal_seed, "seed of the synthesized signal");
    tk->add_option("--vertices", tr.vertices, "vertices mixed by the inside signal");
    tk->add_option("--amplitude", tr.amplitude, "sine amplitude relative to the baseline mean");
    tk->add_option("--period", tr.period, "sine period in periods (0 = horizon)");
    tk->add_option("--max-iter", tr.max_iter, "Frank-Wolfe iteration limit");
    tk->add_option("--gap-tol", tr.gap_tol, "Frank-Wolfe duality gap tolerance");
    tk->add_flag("--vanilla", tr.vanilla, "plain Frank-Wolfe without away steps");
    tk->add_option("--out-csv", tr.out_csv, "per-period CSV");
    tk->add_option("--out-json", tr.out_json, "result JSON");
    tk->add_option("--signal-out", tr.signal_out, "write the signal used as CSV");

    ApproxErrorArgs ae;
    auto* ax = app.add_subcommand("approx-error", "approximation error against exact optimization");
    ax->add_option("--pop", ae.pop, "fixed population JSON (otherwise sampled per trial)");
    ax->add_option("--n", ae.n, "devices per sampled population")->check(CLI::PositiveNumber);
    ax->add_option("--horizons", ae.horizons, "horizons, comma separated")->delimiter(',');
    ax->add_option("--trials", ae.trials, "trials")->check(CLI::PositiveNumber);
    ax->add_option("--seed", ae.seed, "random seed");
    ax->add_option("--out,-o", ae.out, "per-record CSV (default stdout)");
    ax->add_option("--summary", ae.summary, "per-horizon mean errors CSV");
    ax->add_option("--gnuplot", ae.gnuplot, "write a gnuplot script for the summary");
    ae.ranges.add(ax);

    ValidateArgs va;
    auto* vl = app.add_subcommand("validate", "run the oracle suites on a population");
    vl->add_option("--pop", va.pop, "population JSON")->required();
    vl->add_option("--seed", va.seed, "seed for sampled checks");
    vl->add_option("--out,-o", va.out, "report JSON (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try
    {
        if (*g) return cmd_generate(gen, common);
        if (*ap) return cmd_approx(apx, common);
        if (*ag) return cmd_aggregate(agg, common);
        if (*op) return cmd_optimize(opt, common);
        if (*tk) return cmd_track(tr, common);
        if (*ax) return cmd_approx_error(ae, common);
        if (*vl) return cmd_validate(va, common);
    }
    catch (const UsageError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    catch (const NumericalError& e)
    {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    catch (const InfeasibleError& e)
    {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kNumerical;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
