#include "flexsum/aggregate.hpp"

#include <cmath>
#include <sstream>

#include "flexsum/parallel.hpp"

namespace flexsum
{

namespace
{

void check_range(const char* name, Range r)
{
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
    {
        std::ostringstream os;
        os << "sampler range " << name << " is invalid: [" << r.lo << ", " << r.hi << "]";
        throw std::invalid_argument(os.str());
    }
}

struct Draw
{
    TclParams params;
    TransformedDevice device;
    InnerApprox approx;
};

Draw draw_device(Rng& rng, const SamplerConfig& cfg, std::size_t horizon, int id)
{
    for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt)
    {
        TclParams p;
        p.a = rng.uniform(cfg.a);
        p.b = rng.uniform(cfg.b);
        p.theta_r = rng.uniform(cfg.theta_r);
        p.delta = rng.uniform(cfg.delta);
        p.p_max = rng.uniform(cfg.p_max);
        p.theta_a = cfg.theta_a;
        p.theta_0 = rng.uniform(p.band_low(), p.band_high());
        try
        {
            Draw d{p, transform(p, horizon), {}};
            d.approx = compute_bounds(d.device, id);
            return d;
        }
        catch (const InfeasibleError&)
        {
            // empty flexibility set (or empty inner approximation): draw again
        }
    }
    std::ostringstream os;
    os << "sampler exhausted: device " << id << " rejected " << cfg.max_resamples + 1 << " draws";
    throw Error(os.str());
}

}  // namespace

void SamplerConfig::validate() const
{
    check_range("a", a);
    check_range("b", b);
    check_range("theta_r", theta_r);
    check_range("delta", delta);
    check_range("p_max", p_max);
    if (a.lo < 0.0 || a.hi >= 1.0) throw std::invalid_argument("sampler range a must lie in [0, 1)");
    if (b.lo <= 0.0) throw std::invalid_argument("sampler range b must be positive");
    if (delta.lo <= 0.0) throw std::invalid_argument("sampler range delta must be positive");
    if (p_max.lo <= 0.0) throw std::invalid_argument("sampler range p_max must be positive");
    if (!std::isfinite(theta_a)) throw std::invalid_argument("sampler theta_a must be finite");
    if (max_resamples < 0) throw std::invalid_argument("sampler max_resamples must be >= 0");
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

TclParams sample_params(Rng& rng, const SamplerConfig& cfg, std::size_t horizon)
{
    cfg.validate();
    return draw_device(rng, cfg, horizon, 0).params;
}

Population sample_population(std::size_t n, std::size_t horizon, const SamplerConfig& cfg, std::uint64_t seed,
                             unsigned jobs)
{
    if (n == 0) throw std::invalid_argument("sample_population: n must be >= 1");
    check_horizon(horizon);
    cfg.validate();
    Population pop;
    pop.horizon = horizon;
    pop.seed = seed;
    pop.config = cfg;
    pop.members.resize(n);
    // one stream per device keeps the result independent of the thread count
    parallel_for(n, jobs, [&](std::size_t i) {
        Rng rng(seed, i);
        const int id = static_cast<int>(i);
        Draw d = draw_device(rng, cfg, horizon, id);
        pop.members[i] = Member{id, d.params, std::move(d.device), std::move(d.approx)};
    });
    return pop;
}

Population make_population(std::span<const TclParams> params, std::size_t horizon, unsigned jobs)
{
    if (params.empty()) throw std::invalid_argument("make_population: no devices");
    check_horizon(horizon);
    Population pop;
    pop.horizon = horizon;
    pop.members.resize(params.size());
    parallel_for(params.size(), jobs, [&](std::size_t i) {
        params[i].validate();
        Member m;
        m.id = static_cast<int>(i);
        m.params = params[i];
        m.device = transform(params[i], horizon);
        m.approx = compute_bounds(m.device, m.id);
        pop.members[i] = std::move(m);
    });
    return pop;
}

std::vector<InnerApprox> Population::approximations() const
{
    std::vector<InnerApprox> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.approx);
    return out;
}

std::vector<TransformedDevice> Population::devices() const
{
    std::vector<TransformedDevice> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.device);
    return out;
}

AggregateGPoly Population::aggregate() const { return AggregateGPoly(approximations()); }

Population Population::restrict(std::size_t T, unsigned jobs) const
{
    if (T == 0 || T > horizon) throw std::invalid_argument("Population::restrict: horizon out of range");
    Population out;
    out.horizon = T;
    out.seed = seed;
    out.config = config;
    out.members.resize(members.size());
    parallel_for(members.size(), jobs, [&](std::size_t i) {
        const Member& m = members[i];
        Member r;
        r.id = m.id;
        r.params = m.params;
        r.device = m.device.prefix(T);
        r.approx = m.approx.plane_y_lb.size() >= T ? restrict_bounds(m.approx, r.device)
                                                   : compute_bounds(r.device, m.id);
        out.members[i] = std::move(r);
    });
    return out;
}

double exact_linear_cost(std::span<const TransformedDevice> devices, std::span<const double> cost, Objective sense,
                         unsigned jobs)
{
    Vec values(devices.size());
    parallel_for(devices.size(), jobs, [&](std::size_t i) {
        if (cost.size() != devices[i].horizon())
            throw std::invalid_argument("exact_linear_cost: cost length does not match horizon");
        const auto sol = lp_solve(flexibility_halfspaces(devices[i]), cost, sense);
        if (sol.status == LpStatus::kInfeasible)
            throw InfeasibleError("exact_linear_cost: device " + std::to_string(i) + " is infeasible");
        if (!sol.optimal()) throw NumericalError("exact_linear_cost: LP is " + to_string(sol.status));
        values[i] = sol.value;
    });
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
}

double exact_linear_cost(const Population& pop, std::span<const double> cost, Objective sense, unsigned jobs)
{
    const auto devs = pop.devices();
    return exact_linear_cost(devs, cost, sense, jobs);
}

std::vector<Homothet> fit_homothets(const Population& pop, unsigned jobs)
{
    const auto proto = prototype(pop.horizon);
    std::vector<Homothet> out(pop.size());
    parallel_for(pop.size(), jobs,
                 [&](std::size_t i) { out[i] = fit_homothet(pop.members[i].device, pop.members[i].id, proto); });
    return out;
}

}  // namespace flexsum
