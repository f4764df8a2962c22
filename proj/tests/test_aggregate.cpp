#include <doctest.h>

#include <cmath>
#include <random>

#include "flexsum/aggregate.hpp"
#include "flexsum/io.hpp"
#include "oracles.hpp"

using namespace flexsum;

TEST_CASE("sampler")
{
    const auto a = sample_population(20, 12, SamplerConfig{}, 1);
    const auto b = sample_population(20, 12, SamplerConfig{}, 1, 3);
    CHECK(io::to_json(a).dump() == io::to_json(b).dump());
    const auto c = sample_population(20, 12, SamplerConfig{}, 2);
    CHECK(io::to_json(a).dump() != io::to_json(c).dump());
    for (const auto& m : a.members)
    {
        CHECK(lp_solve(flexibility_halfspaces(m.device), Vec(12, 0.0), Objective::kMinimize).optimal());
        const auto& p = *m.params;
        CHECK(p.a >= 0.85);
        CHECK(p.a <= 0.98);
        CHECK(p.theta_a == 32.0);
        CHECK(p.theta_0 >= p.band_low());
        CHECK(p.theta_0 <= p.band_high());
    }

    SamplerConfig fixed;
    fixed.a = {0.9, 0.9};
    const auto one = sample_population(1, 4, fixed, 5);
    CHECK(one.members[0].params->a == 0.9);

    CHECK_THROWS_AS(sample_population(0, 4, SamplerConfig{}, 1), std::invalid_argument);
    SamplerConfig bad;
    bad.b = {2.0, 1.0};
    CHECK_THROWS_AS(sample_population(1, 4, bad, 1), std::invalid_argument);

    // hopeless fleet: far too little cooling power for the ambient load
    SamplerConfig weak;
    weak.p_max = {0.1, 0.1};
    weak.max_resamples = 5;
    CHECK_THROWS_AS(sample_population(1, 24, weak, 1), Error);
}

TEST_CASE("exact linear cost")
{
    const auto apx = compute_bounds(oracle::worked_instance());
    Population pop;
    pop.horizon = 2;
    pop.members.push_back(Member{0, std::nullopt, oracle::worked_instance(), apx});
    const Vec ones{1.0, 1.0};
    const double single = exact_linear_cost(pop, ones, Objective::kMinimize);
    CHECK(single == doctest::Approx(0.39));
    pop.members.push_back(pop.members.front());
    CHECK(exact_linear_cost(pop, ones, Objective::kMinimize) == 2.0 * single);

    // decomposition against the stacked formulation
    const auto small = oracle::small_population(3, 3, 91);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 20; ++k)
    {
        Vec c(3);
        for (auto& v : c) v = U(rng);
        HRep stacked(9);
        for (std::size_t i = 0; i < 3; ++i)
        {
            const HRep f = flexibility_halfspaces(small.members[i].device);
            for (const auto& r : f.rows())
            {
                Vec n(9, 0.0);
                std::copy(r.normal.begin(), r.normal.end(), n.begin() + static_cast<std::ptrdiff_t>(3 * i));
                stacked.add(n, r.sense, r.bound);
            }
        }
        Vec cc(9);
        for (std::size_t j = 0; j < 9; ++j) cc[j] = c[j % 3];
        CHECK(exact_linear_cost(small, c, Objective::kMaximize) ==
              doctest::Approx(lp_solve(stacked, cc, Objective::kMaximize).value).epsilon(1e-9));
    }
    CHECK_THROWS_AS(exact_linear_cost(small, Vec{1.0}, Objective::kMinimize), std::invalid_argument);

    // inner approximation can only do worse on minimization
    const auto pop12 = oracle::small_population(10, 8, 93);
    const auto agg = pop12.aggregate();
    for (int k = 0; k < 20; ++k)
    {
        Vec c(8), neg(8);
        for (std::size_t t = 0; t < 8; ++t)
        {
            c[t] = 0.5 * (U(rng) + 1.0);
            neg[t] = -c[t];
        }
        const double approx = -greedy_linmax(agg.functions(), neg).value;
        CHECK(approx >= exact_linear_cost(pop12, c, Objective::kMinimize) - 1e-9);
    }
}

TEST_CASE("disaggregation")
{
    const auto pop = oracle::small_population(3, 6, 101);
    const auto agg = pop.aggregate();
    const auto devs = pop.devices();

    const Vec c{0.4, -0.2, 0.9, 0.1, -0.6, 0.3};
    const auto vertex = greedy_linmax(agg.functions(), c).point;
    const auto d = disaggregate(pop, vertex);
    REQUIRE(d.feasible);
    CHECK(d.residual <= 1e-6);
    for (std::size_t i = 0; i < 3; ++i)
    {
        CHECK(max_violation(flexibility_halfspaces(devs[i]), d.profiles[i]) <= 1e-7);
        const auto& p = *pop.members[i].params;
        Vec power = d.profiles[i];
        for (auto& v : power) v = std::clamp(v, 0.0, p.p_max);
        for (double th : simulate_temperature(p, power))
        {
            CHECK(th >= p.band_low() - 1e-6);
            CHECK(th <= p.band_high() + 1e-6);
        }
    }

    // sum of per-device optimizers, given as the seed columns
    std::vector<std::vector<Vec>> seeds(3);
    Vec target(6, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
    {
        const auto sol = lp_solve(flexibility_halfspaces(devs[i]), c, Objective::kMaximize);
        seeds[i].push_back(sol.point);
        for (std::size_t t = 0; t < 6; ++t) target[t] += sol.point[t];
    }
    DisaggregateOptions opts;
    opts.seed_columns = seeds;
    const auto w = disaggregate(pop, target, opts);
    REQUIRE(w.feasible);
    CHECK(w.rounds == 1);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t t = 0; t < 6; ++t) CHECK(w.profiles[i][t] == doctest::Approx(seeds[i][0][t]));

    double cap = 0.0;
    for (const auto& dv : devs) cap += dv.u_max;
    const auto far = disaggregate(pop, Vec(6, 10.0 * cap));
    CHECK_FALSE(far.feasible);
    CHECK(far.residual > 1.0);
    CHECK_THROWS_AS(disaggregate(pop, Vec(5, 0.0)), std::invalid_argument);
}

TEST_CASE("tracking a signal inside the aggregate")
{
    const auto pop = oracle::small_population(10, 8, 111);
    const auto agg = pop.aggregate();
    const auto g = greedy_linmax(agg.functions(), Vec{1, -1, 0.5, 0.2, -0.3, 0.8, -0.1, 0.4}).point;
    const auto r = track_signal(agg, g);
    CHECK(r.objective <= 1e-9);
    CHECK(r.iterations <= 5);
    CHECK(r.converged);

    for (bool away : {true, false})
    {
        Vec mix(8, 0.0);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int k = 0; k < 4; ++k)
        {
            Vec c(8);
            for (auto& v : c) v = U(rng);
            const auto v = greedy_linmax(agg.functions(), c).point;
            for (std::size_t t = 0; t < 8; ++t) mix[t] += 0.25 * v[t];
        }
        TrackingConfig cfg;
        cfg.away_steps = away;
        cfg.max_iter = away ? 500 : 50;
        const auto t = track_signal(agg, mix, cfg);
        if (away)
        {
            CHECK(t.converged);
            CHECK(t.gap <= 1e-4);
            CHECK(t.rmse <= 1e-3);
        }
        CHECK(t.gap >= 0.0);
        CHECK(t.iterations <= cfg.max_iter);
        // u_N is the sum of the profiles, each inside its base polytope
        for (std::size_t s = 0; s < 8; ++s)
        {
            double sum = 0.0;
            for (const auto& u : t.profiles) sum += u[s];
            CHECK(sum == t.aggregate[s]);
        }
        for (std::size_t i = 0; i < t.profiles.size(); ++i)
            CHECK(max_violation(base_hrep(agg.members()[i]), t.profiles[i]) <= 1e-8);
    }
}

TEST_CASE("tracking zero against the stacked oracle")
{
    const auto pop = oracle::small_population(2, 3, 121);
    const auto agg = pop.aggregate();
    const Vec g(3, 0.0);
    TrackingConfig cfg;
    cfg.gap_tol = 1e-10;
    cfg.max_iter = 2000;
    const auto r = track_signal(agg, g, cfg);
    CHECK(r.objective > 0.0);
    std::vector<HRep> polys;
    for (const auto& m : agg.members()) polys.push_back(base_hrep(m));
    const double ref = oracle::stacked_tracking(polys, g);
    CHECK(std::abs(r.objective - ref) <= 1e-3);
}

TEST_CASE("tracking non-convergence is flagged")
{
    const auto pop = oracle::small_population(20, 12, 131);
    const auto agg = pop.aggregate();
    Vec g(12, 0.0);
    for (const Vec c : {Vec(12, 1.0), Vec(12, -1.0)})
    {
        const auto v = greedy_linmax(agg.functions(), c).point;
        for (std::size_t t = 0; t < 12; ++t) g[t] += 0.5 * v[t];
    }
    TrackingConfig cfg;
    cfg.max_iter = 1;
    cfg.gap_tol = 0.0;
    const auto r = track_signal(agg, g, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
}

TEST_CASE("homothet tracking")
{
    const auto pop = oracle::small_population(5, 6, 141);
    const auto fits = fit_homothets(pop);
    const auto agg = aggregate_homothets(fits);
    const Vec g = argmax(agg, Vec{1, 0, -1, 0.5, 0, 0});
    const auto r = track_signal_homothet(fits, g);
    CHECK(r.rmse <= 1e-9);
    for (std::size_t i = 0; i < fits.size(); ++i)
        CHECK(max_violation(flexibility_halfspaces(pop.members[i].device), r.profiles[i]) <= 1e-8);
}
