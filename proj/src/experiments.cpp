#include "flexsum/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "flexsum/parallel.hpp"

namespace flexsum
{

double approximation_error(double j_approx, double j_exact)
{
    if (j_exact == 0.0) return j_approx == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (j_approx - j_exact) / j_exact;
}

std::vector<std::size_t> default_horizons()
{
    std::vector<std::size_t> h;
    for (std::size_t T = 2; T <= 24; T += 2) h.push_back(T);
    return h;
}

namespace
{

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<ExperimentRecord> run_trial(const ApproxErrorConfig& cfg, const Population* fixed, std::size_t trial,
                                        std::size_t t_max)
{
    Rng rng(cfg.seed, (std::uint64_t{1} << 32) + trial);
    const std::uint64_t pop_seed = rng.next_u64();
    Vec cost(t_max);
    for (auto& c : cost) c = rng.uniform();

    Population sampled;
    if (!fixed) sampled = sample_population(cfg.n, t_max, cfg.sampler, pop_seed);
    const Population& base = fixed ? *fixed : sampled;

    std::vector<ExperimentRecord> out;
    for (std::size_t T : cfg.horizons)
    {
        const std::span<const double> c(cost.data(), T);
        Vec neg_c(c.begin(), c.end());
        for (auto& v : neg_c) v = -v;

        ExperimentRecord rec;
        rec.experiment = "approx-error";
        rec.seed = cfg.seed;
        rec.trial = trial;
        rec.n = base.size();
        rec.horizon = T;

        auto start = Clock::now();
        const Population pop = T == base.horizon ? base : base.restrict(T);
        const double j_exact = exact_linear_cost(pop, c, Objective::kMinimize);
        const double exact_ms = ms_since(start);

        start = Clock::now();
        const auto agg = pop.aggregate();
        const double j_gpoly = -greedy_linmax(agg.functions(), neg_c).value;
        const double gpoly_ms = ms_since(start);

        start = Clock::now();
        double j_homothet = 0.0;
        for (const auto& h : fit_homothets(pop)) j_homothet += -support(h, neg_c);
        const double homothet_ms = ms_since(start);

        for (auto [method, j, ms] : {std::tuple{"gpoly", j_gpoly, gpoly_ms}, std::tuple{"homothet", j_homothet, homothet_ms},
                                     std::tuple{"exact", j_exact, exact_ms}})
        {
            rec.method = method;
            rec.j_approx = j;
            rec.j_exact = j_exact;
            rec.error = approximation_error(j, j_exact);
            rec.wall_ms = ms;
            out.push_back(rec);
        }
    }
    return out;
}

}  // namespace

std::vector<ExperimentRecord> run_approx_error(const ApproxErrorConfig& cfg, const Population* fixed)
{
    if (cfg.horizons.empty()) throw std::invalid_argument("approx-error: no horizons");
    if (cfg.trials == 0) throw std::invalid_argument("approx-error: trials must be >= 1");
    if (!fixed && cfg.n == 0) throw std::invalid_argument("approx-error: n must be >= 1");
    const std::size_t t_max = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
    if (fixed && t_max > fixed->horizon)
        throw std::invalid_argument("approx-error: horizon exceeds the population horizon");
    for (auto T : cfg.horizons) check_horizon(T);

    std::vector<std::vector<ExperimentRecord>> per_trial(cfg.trials);
    parallel_for(cfg.trials, cfg.jobs, [&](std::size_t k) { per_trial[k] = run_trial(cfg, fixed, k, t_max); });
    std::vector<ExperimentRecord> out;
    for (auto& v : per_trial) out.insert(out.end(), v.begin(), v.end());
    return out;
}

std::vector<HorizonSummary> summarize(const std::vector<ExperimentRecord>& records)
{
    std::map<std::size_t, HorizonSummary> by_t;
    for (const auto& r : records)
    {
        auto& s = by_t[r.horizon];
        s.horizon = r.horizon;
        if (r.method == "gpoly")
        {
            s.mean_gpoly += r.error;
            ++s.trials;
        }
        else if (r.method == "homothet")
            s.mean_homothet += r.error;
    }
    std::vector<HorizonSummary> out;
    for (auto& [T, s] : by_t)
    {
        if (s.trials > 0)
        {
            s.mean_gpoly /= static_cast<double>(s.trials);
            s.mean_homothet /= static_cast<double>(s.trials);
        }
        out.push_back(s);
    }
    return out;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("regression_slope: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

std::string to_string(SignalKind kind)
{
    switch (kind)
    {
        case SignalKind::kInside: return "inside";
        case SignalKind::kSine: return "sine";
        case SignalKind::kZero: return "zero";
    }
    return "unknown";
}

SignalKind signal_kind_from_string(const std::string& s)
{
    if (s == "inside") return SignalKind::kInside;
    if (s == "sine") return SignalKind::kSine;
    if (s == "zero") return SignalKind::kZero;
    throw std::invalid_argument("unknown signal kind '" + s + "' (expected inside, sine or zero)");
}

Vec synthesize_signal(const AggregateGPoly& agg, const SignalConfig& cfg)
{
    const std::size_t T = agg.horizon();
    const auto& f = agg.functions();
    Vec g(T, 0.0);
    switch (cfg.kind)
    {
        case SignalKind::kZero: return g;
        case SignalKind::kInside:
        {
            if (cfg.vertices < 1) throw std::invalid_argument("synthesize_signal: vertices must be >= 1");
            Rng rng(cfg.seed, 7);
            Vec weights(static_cast<std::size_t>(cfg.vertices));
            std::vector<Vec> points;
            for (auto& w : weights)
            {
                Vec c(T);
                for (auto& v : c) v = rng.uniform(-1.0, 1.0);
                points.push_back(greedy_linmax(f, c).point);
                w = rng.uniform(0.05, 1.0);
            }
            double total = 0.0;
            for (double w : weights) total += w;
            for (std::size_t k = 0; k < points.size(); ++k)
                for (std::size_t t = 0; t < T; ++t) g[t] += weights[k] / total * points[k][t];
            return g;
        }
        case SignalKind::kSine:
        {
            const Vec ones(T, 1.0), neg(T, -1.0);
            const Vec hi = greedy_linmax(f, ones).point;
            const Vec lo = greedy_linmax(f, neg).point;
            double mean = 0.0;
            for (std::size_t t = 0; t < T; ++t)
            {
                g[t] = 0.5 * (hi[t] + lo[t]);
                mean += g[t] / static_cast<double>(T);
            }
            const double period = cfg.period > 0.0 ? cfg.period : static_cast<double>(T);
            for (std::size_t t = 0; t < T; ++t)
                g[t] += cfg.amplitude * mean *
                        std::sin(2.0 * std::numbers::pi * static_cast<double>(t + 1) / period + cfg.phase);
            return g;
        }
    }
    return g;
}

TrackingComparison compare_tracking(const Population& pop, std::span<const double> signal, const TrackingConfig& cfg,
                                    unsigned jobs)
{
    TrackingComparison out;
    out.gpoly = track_signal(pop.aggregate(), signal, cfg);
    const auto fits = fit_homothets(pop, jobs);
    out.homothet = track_signal_homothet(fits, signal, cfg);
    return out;
}

void SuiteReport::fail(std::string msg)
{
    ++failures;
    if (messages.size() < 20) messages.push_back(std::move(msg));
}

SuiteReport suite_containment(const Population& pop, double tol)
{
    SuiteReport r;
    r.name = "containment";
    for (const auto& m : pop.members)
    {
        ++r.checks;
        if (!poly_contains_poly(base_hrep(m.approx), flexibility_halfspaces(m.device), tol))
            r.fail("device " + std::to_string(m.id) + ": base polytope leaves the flexibility set");
    }
    return r;
}

SuiteReport suite_maximality(const Population& pop, double delta, double effective)
{
    SuiteReport r;
    r.name = "maximality";
    for (const auto& m : pop.members)
    {
        const HRep f = flexibility_halfspaces(m.device);
        const std::size_t T = m.approx.horizon();
        for (std::size_t t = 1; t <= T; ++t)
            for (int side = 0; side < 2; ++side)
            {
                InnerApprox grown = m.approx;
                const Subset prefix = Subset::prefix(t);
                double before = 0.0, after = 0.0;
                if (side == 0)
                {
                    grown.y_ub[t - 1] += delta;
                    before = eval_b(m.approx, prefix);
                    after = eval_b(grown, prefix);
                }
                else
                {
                    grown.y_lb[t - 1] -= delta;
                    before = -eval_p(m.approx, prefix);
                    after = -eval_p(grown, prefix);
                }
                if (after - before <= effective)
                {
                    ++r.skipped;
                    continue;
                }
                ++r.checks;
                if (poly_contains_poly(base_hrep(grown), f))
                {
                    std::ostringstream os;
                    os << "device " << m.id << ": " << (side == 0 ? "y_ub(" : "y_lb(") << t
                       << ") can move outward by " << delta << " without leaving F";
                    r.fail(os.str());
                }
            }
    }
    return r;
}

SuiteReport suite_set_functions(const Population& pop, std::uint64_t seed, double tol)
{
    SuiteReport r;
    r.name = "set-functions";
    Rng rng(seed, 11);
    for (const auto& m : pop.members)
    {
        const std::size_t T = m.approx.horizon();
        std::vector<Subset> subsets;
        if (T <= 5)
        {
            for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << T); ++bits) subsets.emplace_back(bits);
        }
        else
        {
            subsets.emplace_back(0);
            subsets.push_back(Subset::full(T));
            for (int k = 0; k < 30; ++k)
                subsets.emplace_back(rng.next_u64() & Subset::full(T).bits());
        }
        const std::string who = "device " + std::to_string(m.id) + ": ";
        for (auto s : subsets)
        {
            ++r.checks;
            const double b = eval_b(m.approx, s), p = eval_p(m.approx, s);
            const double b_lp = eval_b(m.approx, s, Evaluator::kSupportLp);
            const double p_lp = eval_p(m.approx, s, Evaluator::kSupportLp);
            if (std::abs(b - b_lp) > tol || std::abs(p - p_lp) > tol)
                r.fail(who + "recursion differs from LP on " + s.to_string());
            if (p > b + tol) r.fail(who + "p > b on " + s.to_string());
        }
        for (auto x : subsets)
            for (auto y : subsets)
            {
                ++r.checks;
                const double bx = eval_b(m.approx, x), by = eval_b(m.approx, y);
                const double px = eval_p(m.approx, x), py = eval_p(m.approx, y);
                if (bx + by < eval_b(m.approx, x | y) + eval_b(m.approx, x & y) - tol)
                    r.fail(who + "b not submodular on " + x.to_string() + ", " + y.to_string());
                if (px + py > eval_p(m.approx, x | y) + eval_p(m.approx, x & y) + tol)
                    r.fail(who + "p not supermodular on " + x.to_string() + ", " + y.to_string());
                if (bx - py < eval_b(m.approx, x - y) - eval_p(m.approx, y - x) - tol)
                    r.fail(who + "cross inequality fails on " + x.to_string() + ", " + y.to_string());
            }
    }
    return r;
}

SuiteReport suite_greedy(const Population& pop, std::size_t costs, std::uint64_t seed, double rel_tol, unsigned jobs)
{
    SuiteReport r;
    r.name = "greedy";
    const std::size_t T = pop.horizon;
    const std::size_t N = pop.size();
    std::vector<HRep> polys;
    for (const auto& m : pop.members) polys.push_back(base_hrep(m.approx));
    const auto agg = pop.aggregate();
    Rng rng(seed, 13);
    for (std::size_t k = 0; k < costs; ++k)
    {
        Vec c(T);
        for (auto& v : c) v = rng.uniform(-1.0, 1.0);
        Vec lp_values(N), greedy_values(N);
        parallel_for(N, jobs, [&](std::size_t i) {
            const auto sol = lp_solve(polys[i], c, Objective::kMaximize);
            if (!sol.optimal()) throw NumericalError("suite_greedy: LP is " + to_string(sol.status));
            lp_values[i] = sol.value;
            greedy_values[i] = greedy_linmax(functions(pop.members[i].approx), c).value;
        });
        double lp_sum = 0.0;
        for (std::size_t i = 0; i < N; ++i)
        {
            ++r.checks;
            lp_sum += lp_values[i];
            if (std::abs(greedy_values[i] - lp_values[i]) > rel_tol * std::max(1.0, std::abs(lp_values[i])))
            {
                std::ostringstream os;
                os << "device " << pop.members[i].id << ", cost #" << k << " (seed " << seed << "): greedy "
                   << greedy_values[i] << " vs LP " << lp_values[i];
                r.fail(os.str());
            }
        }
        ++r.checks;
        const double g = greedy_linmax(agg.functions(), c).value;
        if (std::abs(g - lp_sum) > rel_tol * std::max(1.0, std::abs(lp_sum)))
        {
            std::ostringstream os;
            os << "aggregate, cost #" << k << " (seed " << seed << "): greedy " << g << " vs summed LP " << lp_sum;
            r.fail(os.str());
        }
    }
    return r;
}

std::vector<SuiteReport> run_validation(const Population& pop, std::uint64_t seed, unsigned jobs)
{
    return {suite_containment(pop), suite_maximality(pop), suite_set_functions(pop, seed),
            suite_greedy(pop, 100, seed, 1e-6, jobs)};
}

}  // namespace flexsum
