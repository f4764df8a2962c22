#include <doctest.h>

#include <cmath>
#include <random>

#include "flexsum/gpoly.hpp"
#include "oracles.hpp"

using namespace flexsum;

namespace
{

const double k37 = 3.0 / 7.0;
const double k107 = 10.0 / 7.0;

InnerApprox worked() { return compute_bounds(oracle::worked_instance()); }

}  // namespace

TEST_CASE("worked instance bounds")
{
    const auto apx = worked();
    REQUIRE(apx.horizon() == 2);
    CHECK(apx.y_ub[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(apx.y_ub[1] == doctest::Approx(k107).epsilon(1e-12));
    CHECK(apx.y_lb[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(apx.y_lb[1] == doctest::Approx(k37).epsilon(1e-12));
    CHECK(apx.z_ub == Vec{1.0, 1.3});
    CHECK(apx.z_lb == Vec{0.3, 0.3});
    CHECK(apx.plane_y_ub[1] == doctest::Approx(k107));
    CHECK(apx.plane_y_lb[1] == doctest::Approx(k37));
}

TEST_CASE("worked instance set functions")
{
    const auto apx = worked();
    const Subset s1 = Subset::of({1}), s2 = Subset::of({2}), s12 = Subset::of({1, 2});
    for (auto how : {Evaluator::kRecursion, Evaluator::kSupportLp})
    {
        CHECK(eval_b(apx, s1, how) == doctest::Approx(1.0));
        CHECK(eval_b(apx, s2, how) == doctest::Approx(1.0));
        CHECK(eval_b(apx, s12, how) == doctest::Approx(k107));
        CHECK(eval_p(apx, s1, how) == doctest::Approx(0.3));
        CHECK(eval_p(apx, s2, how) == doctest::Approx(0.0));
        CHECK(eval_p(apx, s12, how) == doctest::Approx(k37));
        CHECK(eval_b(apx, Subset{}, how) == 0.0);
        CHECK(eval_p(apx, Subset{}, how) == 0.0);
    }
    CHECK(eval_b(apx, s1) + eval_b(apx, s2) >= eval_b(apx, s12));
    CHECK_THROWS_AS(eval_b(apx, Subset::of({3})), std::invalid_argument);
}

TEST_CASE("worked instance base polytope")
{
    const auto apx = worked();
    const HRep b = base_hrep(apx);
    REQUIRE(b.size() == 8);
    CHECK(b.row(7).normal == Vec{1.0, 1.0});
    CHECK(b.row(7).bound == doctest::Approx(k107));
    CHECK(contains_point(b, Vec{1.0, k37}));
    CHECK_FALSE(contains_point(b, Vec{0.0, 0.0}));
    const HRep f = flexibility_halfspaces(oracle::worked_instance());
    CHECK(poly_contains_poly(b, f));
    CHECK_FALSE(poly_contains_poly(f, b));
    CHECK(support(b, Vec{0.0, 1.0}) == doctest::Approx(1.0));

    InnerApprox grown = apx;
    grown.y_ub[1] = k107 + 1e-4;
    CHECK_FALSE(poly_contains_poly(base_hrep(grown), f));
    grown = apx;
    grown.y_lb[1] = k37 - 1e-4;
    CHECK_FALSE(poly_contains_poly(base_hrep(grown), f));
    grown = apx;
    grown.y_lb[0] = 0.3 - 1e-4;
    CHECK_FALSE(poly_contains_poly(base_hrep(grown), f));
}

TEST_CASE("greedy on the worked instance")
{
    const auto f = functions(worked());
    const Vec c1{1.0, 0.5};
    auto r = greedy_linmax(f, c1);
    CHECK(r.point[0] == doctest::Approx(1.0));
    CHECK(r.point[1] == doctest::Approx(k37));
    CHECK(r.value == doctest::Approx(1.0 + 1.5 / 7.0));

    const Vec c2{1.0, -1.0};
    r = greedy_linmax(f, c2);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.point[0] == doctest::Approx(1.0));
    CHECK(r.point[1] == doctest::Approx(0.0));
    CHECK(r.value == doctest::Approx(support(base_hrep(worked()), c2)));

    const Vec zero{0.0, 0.0};
    r = greedy_linmax(f, zero);
    CHECK(r.value == 0.0);
    CHECK(r.point[0] == doctest::Approx(1.0));
    CHECK(r.point[1] == doctest::Approx(k37));
    CHECK_THROWS_AS(greedy_linmax(f, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("reflection")
{
    const auto apx = worked();
    const auto f = functions(apx);
    const auto g = reflect(f, Subset::of({2}));
    CHECK(g.b(Subset::of({1, 2})) == doctest::Approx(1.0));
    CHECK(g.b(Subset::of({1, 2})) == doctest::Approx(support(base_hrep(apx), Vec{1.0, -1.0})));
    const auto id = reflect(f, Subset{});
    const auto pop = oracle::small_population(5, 5, 8);
    for (const auto& m : pop.members)
    {
        const auto fm = functions(m.approx);
        const Subset flip = Subset::of({2, 4});
        const auto twice = reflect(reflect(fm, flip), flip);
        const auto once = reflect(fm, flip);
        for (std::uint64_t bits = 0; bits < 32; ++bits)
        {
            const Subset s(bits);
            // the reflected pair is exact on subsets only; applying the formula twice returns the
            // original values on sets that do not straddle the flipped coordinates
            if (s.is_subset_of(flip) || (s & flip).empty())
            {
                CHECK(twice.b(s) == doctest::Approx(fm.b(s)).epsilon(1e-12));
                CHECK(twice.p(s) == doctest::Approx(fm.p(s)).epsilon(1e-12));
            }
            else
            {
                CHECK(twice.b(s) >= fm.b(s) - 1e-9);
                CHECK(twice.p(s) <= fm.p(s) + 1e-9);
            }
            CHECK(once.p(s) == doctest::Approx(s.empty() ? 0.0 : -support(base_hrep(m.approx), [&] {
                                                   Vec d = s.indicator(5);
                                                   for (auto t : flip.periods())
                                                       if (s.contains(t)) d[t - 1] = -1.0;
                                                   for (auto& v : d) v = -v;
                                                   return d;
                                               }()))
                                   .epsilon(1e-9));
            // against the reflected polytope
            Vec dir = s.indicator(5);
            for (auto t : flip.periods())
                if (s.contains(t)) dir[t - 1] = -1.0;
            CHECK(once.b(s) == doctest::Approx(s.empty() ? 0.0 : support(base_hrep(m.approx), dir)).epsilon(1e-9));
        }
    }
    for (std::uint64_t bits = 0; bits < 4; ++bits) CHECK(id.b(Subset(bits)) == f.b(Subset(bits)));
}

TEST_CASE("lossless battery with slack energy bounds")
{
    const auto dev = TransformedDevice::from_state_bounds(1.0, -1.0, 2.0, 0.0, -100.0, 100.0, 4);
    const auto apx = compute_bounds(dev);
    for (std::size_t t = 1; t <= 4; ++t)
    {
        CHECK(apx.y_ub[t - 1] == doctest::Approx(2.0 * static_cast<double>(t)));
        CHECK(apx.y_lb[t - 1] == doctest::Approx(-1.0 * static_cast<double>(t)));
    }
}

TEST_CASE("infeasible device reports the first contradictory period")
{
    // period 2 needs 0.5 u(1) + u(2) >= 1.6 with u <= 1
    TransformedDevice dev;
    dev.a = 0.5;
    dev.u_min = 0.0;
    dev.u_max = 1.0;
    dev.x_lb = {0.5, 1.6, 1.6};
    dev.x_ub = {5.0, 5.0, 5.0};
    try
    {
        (void)compute_bounds(dev);
        FAIL("expected InfeasibleError");
    }
    catch (const InfeasibleError& e)
    {
        CHECK(e.first_period() == 2);
    }
}

TEST_CASE("bounds of sampled devices")
{
    const auto pop = oracle::small_population(30, 6, 21);
    for (const auto& m : pop.members)
    {
        const auto& a = m.approx;
        const HRep f = flexibility_halfspaces(m.device);
        CHECK(poly_contains_poly(base_hrep(a), f));
        for (std::size_t t = 0; t < a.horizon(); ++t)
        {
            CHECK(a.y_lb[t] <= a.y_ub[t]);
            if (t + 1 < a.horizon())
            {
                // chain consistency
                CHECK(a.y_lb[t + 1] >= a.y_lb[t] + a.u_min - 1e-9);
                CHECK(a.y_lb[t + 1] <= a.y_lb[t] + a.u_max + 1e-9);
                CHECK(a.y_ub[t + 1] >= a.y_ub[t] + a.u_min - 1e-9);
                CHECK(a.y_ub[t + 1] <= a.y_ub[t] + a.u_max + 1e-9);
            }
            double geo = 0.0;
            for (std::size_t k = 0; k <= t; ++k) geo = geo * a.a + 1.0;
            CHECK(a.z_ub[t] == std::min(m.device.x_ub[t], geo * a.u_max));
            CHECK(a.z_lb[t] == std::max(m.device.x_lb[t], geo * a.u_min));
        }
        // prefix-wise nesting: every vertex of the t-prefix of B lies in F^t
        for (std::size_t t = 1; t <= a.horizon(); ++t)
        {
            InnerApprox pre = a;
            pre.y_lb.resize(t);
            pre.y_ub.resize(t);
            const HRep ft = flexibility_halfspaces(m.device.prefix(t));
            for (const auto& v : vertices(base_hrep(pre))) CHECK(contains_point(ft, v));
        }
        // prefix reuse gives identical bounds
        for (std::size_t t = 1; t <= a.horizon(); ++t)
        {
            const auto direct = compute_bounds(m.device.prefix(t), m.id);
            const auto reused = restrict_bounds(a, m.device.prefix(t));
            CHECK(direct.y_lb == reused.y_lb);
            CHECK(direct.y_ub == reused.y_ub);
        }
    }
}

TEST_CASE("set functions of sampled devices")
{
    const auto pop = oracle::small_population(20, 5, 31);
    for (const auto& m : pop.members)
    {
        const auto f = functions(m.approx);
        const HRep b = base_hrep(m.approx);
        for (std::uint64_t x = 0; x < 32; ++x)
        {
            const Subset sx(x);
            CHECK(f.b(sx) == doctest::Approx(eval_b(m.approx, sx, Evaluator::kSupportLp)).epsilon(1e-9));
            CHECK(f.p(sx) == doctest::Approx(eval_p(m.approx, sx, Evaluator::kSupportLp)).epsilon(1e-9));
            if (!sx.empty()) CHECK(f.b(sx) == doctest::Approx(oracle::vertex_support(b, sx.indicator(5))).epsilon(1e-9));
            CHECK(f.p(sx) <= f.b(sx) + 1e-12);
            for (std::uint64_t y = 0; y < 32; ++y)
            {
                const Subset sy(y);
                CHECK(f.b(sx) + f.b(sy) >= f.b(sx | sy) + f.b(sx & sy) - 1e-9);
                CHECK(f.p(sx) + f.p(sy) <= f.p(sx | sy) + f.p(sx & sy) + 1e-9);
                CHECK(f.b(sx) - f.p(sy) >= f.b(sx - sy) - f.p(sy - sx) - 1e-9);
            }
        }
    }
}

TEST_CASE("greedy agrees with LP on random sign-mixed costs")
{
    const auto pop = oracle::small_population(10, 6, 41);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (const auto& m : pop.members)
    {
        const auto f = functions(m.approx);
        const HRep b = base_hrep(m.approx);
        for (int k = 0; k < 1000; ++k)
        {
            Vec c(6);
            for (auto& v : c) v = U(rng);
            const auto g = greedy_linmax(f, c);
            const auto lp = lp_solve(b, c, Objective::kMaximize);
            CHECK(g.value == doctest::Approx(lp.value).epsilon(1e-9));
            CHECK(contains_point(b, g.point));
        }
    }
}

TEST_CASE("aggregate")
{
    const auto apx = worked();
    const auto two = aggregate({apx, apx});
    CHECK(two.b(Subset::of({1, 2})) == doctest::Approx(20.0 / 7.0));
    const auto one = aggregate({apx});
    const auto f = functions(apx);
    for (std::uint64_t s = 0; s < 4; ++s)
    {
        CHECK(one.b(Subset(s)) == f.b(Subset(s)));
        CHECK(one.p(Subset(s)) == f.p(Subset(s)));
    }
    CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
    auto longer = compute_bounds(TransformedDevice::from_state_bounds(0.7, 0.0, 1.0, 0.0, 0.3, 1.3, 3));
    CHECK_THROWS_AS(aggregate({apx, longer}), std::invalid_argument);

    const auto pop = oracle::small_population(4, 4, 51);
    auto members = pop.approximations();
    std::swap(members[0], members[3]);
    const auto agg = aggregate(members);
    CHECK(agg.members().front().device_id == 0);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 50; ++k)
    {
        const Subset s(rng() & 15U);
        double sum_b = 0.0, sum_p = 0.0;
        for (const auto& m : pop.members)
        {
            sum_b += s.empty() ? 0.0 : support(base_hrep(m.approx), s.indicator(4));
            sum_p += eval_p(m.approx, s, Evaluator::kSupportLp);
        }
        CHECK(agg.b(s) == doctest::Approx(sum_b).epsilon(1e-9));
        CHECK(agg.p(s) == doctest::Approx(sum_p).epsilon(1e-9));
    }
    CHECK(agg.functions().memo_size() > 0);
    CHECK(agg.functions().provenance() == Provenance::kAggregate);
}

TEST_CASE("member greedy points decompose the aggregate vertex")
{
    const auto pop = oracle::small_population(8, 6, 61);
    const auto agg = pop.aggregate();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 50; ++k)
    {
        Vec c(6);
        for (auto& v : c) v = U(rng);
        const auto total = greedy_linmax(agg.functions(), c);
        const auto parts = greedy_member_points(agg, c);
        REQUIRE(parts.size() == 8);
        for (std::size_t t = 0; t < 6; ++t)
        {
            double s = 0.0;
            for (const auto& p : parts) s += p[t];
            CHECK(s == doctest::Approx(total.point[t]).epsilon(1e-9));
        }
        for (std::size_t i = 0; i < parts.size(); ++i) CHECK(contains_point(base_hrep(agg.members()[i]), parts[i]));
    }
}
