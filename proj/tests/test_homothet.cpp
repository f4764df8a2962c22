#include <doctest.h>

#include <random>

#include "flexsum/aggregate.hpp"
#include "flexsum/homothet.hpp"
#include "oracles.hpp"

using namespace flexsum;

TEST_CASE("unit battery prototype")
{
    const auto p = prototype(2);
    CHECK(p->unit_battery);
    CHECK(is_bounded(p->hrep));
    CHECK(vertices(p->hrep).size() == 4);
    CHECK(prototype_support(*p, Vec{1.0, 1.0}) == doctest::Approx(2.0));
    CHECK(prototype_support(*p, Vec{1.0, -1.0}) == doctest::Approx(1.0));
    CHECK(support(p->hrep, Vec{1.0, -1.0}) == doctest::Approx(1.0));

    // closed form against LP
    const auto p5 = prototype(5);
    Prototype generic = *p5;
    generic.unit_battery = false;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 100; ++k)
    {
        Vec c(5);
        for (auto& v : c) v = U(rng);
        CHECK(prototype_support(*p5, c) == doctest::Approx(prototype_support(generic, c)).epsilon(1e-9));
        CHECK(dot(c, prototype_argmax(*p5, c)) == doctest::Approx(dot(c, prototype_argmax(generic, c))).epsilon(1e-9));
    }
}

TEST_CASE("worked instance fit")
{
    const auto dev = oracle::worked_instance();
    const auto h = fit_homothet(dev);
    CHECK(h.scale == doctest::Approx(10.0 / 17.0).epsilon(1e-12));
    CHECK(poly_contains_poly(homothet_hrep(h), flexibility_halfspaces(dev)));

    // optimality: no translation admits s* + 1e-4
    HRep lp(3);
    const HRep f = flexibility_halfspaces(dev);
    for (const auto& r : f.rows())
    {
        Vec row{0.0, r.normal[0], r.normal[1]};
        if (r.sense == Sense::kLessEqual)
        {
            row[0] = prototype_support(*h.shape, r.normal);
            lp.add_le(row, r.bound);
        }
        else
        {
            row[0] = -prototype_support(*h.shape, Vec{-r.normal[0], -r.normal[1]});
            lp.add_ge(row, r.bound);
        }
    }
    lp.add_eq(Vec{1.0, 0.0, 0.0}, h.scale + 1e-4);
    CHECK(lp_solve(lp, Vec{0.0, 0.0, 0.0}, Objective::kMinimize).status == LpStatus::kInfeasible);
}

TEST_CASE("identity fit")
{
    // F equal to the unit battery: box [0, 1] with vacuous state rows
    const auto dev = TransformedDevice::from_state_bounds(1.0, 0.0, 1.0, 0.0, 0.0, 3.0, 3);
    const auto h = fit_homothet(dev);
    CHECK(h.scale == doctest::Approx(1.0));
    for (double t : h.translation) CHECK(t == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fitted homothets are contained and maximal")
{
    const auto pop = oracle::small_population(20, 5, 71);
    for (const auto& m : pop.members)
    {
        const auto h = fit_homothet(m.device, m.id);
        const HRep f = flexibility_halfspaces(m.device);
        CHECK(h.scale >= 0.0);
        CHECK(poly_contains_poly(homothet_hrep(h), f));
        Homothet bigger = h;
        bigger.scale += 1e-4;
        CHECK_FALSE(poly_contains_poly(homothet_hrep(bigger), f));
    }
}

TEST_CASE("aggregate homothets")
{
    const auto dev = oracle::worked_instance();
    const auto h = fit_homothet(dev);
    const Homothet pair[] = {h, h};
    const auto sum = aggregate_homothets(pair);
    CHECK(sum.scale == doctest::Approx(2.0 * h.scale));
    CHECK(sum.translation[0] == doctest::Approx(2.0 * h.translation[0]));

    const auto pop = oracle::small_population(6, 4, 81);
    const auto fits = fit_homothets(pop);
    const auto agg = aggregate_homothets(fits);
    const Vec c{0.3, -0.7, 1.0, 0.2};
    double total = 0.0;
    for (const auto& f : fits) total += lp_solve(homothet_hrep(f), c, Objective::kMaximize).value;
    CHECK(support(agg, c) == doctest::Approx(total).epsilon(1e-9));
    CHECK(dot(c, argmax(agg, c)) == doctest::Approx(support(agg, c)).epsilon(1e-12));

    Homothet other = fits[0];
    auto proto = std::make_shared<Prototype>(*prototype(4));
    proto->hrep.add_le(Vec{1.0, 1.0, 1.0, 1.0}, 2.0);
    other.shape = proto;
    const Homothet mixed[] = {fits[0], other};
    CHECK_THROWS_AS(aggregate_homothets(mixed), std::invalid_argument);
}

TEST_CASE("zero scale homothet is a point")
{
    Homothet h;
    h.scale = 0.0;
    h.translation = {0.5, 0.25};
    h.shape = prototype(2);
    const HRep p = homothet_hrep(h);
    const auto v = vertices(p);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == Vec{0.5, 0.25});
}
