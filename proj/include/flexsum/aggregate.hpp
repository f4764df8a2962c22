#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flexsum/common.hpp"
#include "flexsum/gpoly.hpp"
#include "flexsum/homothet.hpp"
#include "flexsum/model.hpp"

namespace flexsum
{

struct Range
{
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Range&) const = default;
};

struct SamplerConfig
{
    Range a{0.85, 0.98};
    Range b{1.5, 2.5};
    Range theta_r{18.0, 22.0};
    Range delta{0.5, 2.0};
    Range p_max{2.0, 6.0};
    double theta_a = 32.0;
    int max_resamples = 100;

    void validate() const;
    bool operator==(const SamplerConfig&) const = default;
};

/// Uniform draws from std::mt19937_64 mapped by hand (the standard distributions are not
/// reproducible across library implementations).
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    // independent stream derived through std::seed_seq
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  // [0, 1)
    double uniform(double lo, double hi) { return lo == hi ? lo : lo + (hi - lo) * uniform(); }
    double uniform(Range r) { return uniform(r.lo, r.hi); }

  private:
    std::mt19937_64 engine_;
};

struct Member
{
    int id = 0;
    std::optional<TclParams> params;
    TransformedDevice device;
    InnerApprox approx;
};

struct Population
{
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    SamplerConfig config;
    std::vector<Member> members;

    std::size_t size() const { return members.size(); }
    std::vector<InnerApprox> approximations() const;
    std::vector<TransformedDevice> devices() const;
    AggregateGPoly aggregate() const;

    /// Members cut to the first T periods, with bounds recomputed for the shorter horizon.
    Population restrict(std::size_t T, unsigned jobs = 1) const;
};

/// Draws one TCL whose flexibility set over `horizon` periods is nonempty and whose inner
/// approximation exists. Throws Error after max_resamples rejected draws.
TclParams sample_params(Rng& rng, const SamplerConfig& cfg, std::size_t horizon);

Population sample_population(std::size_t n, std::size_t horizon, const SamplerConfig& cfg, std::uint64_t seed,
                             unsigned jobs = 1);

/// Population from explicit parameters; member ids are positions.
Population make_population(std::span<const TclParams> params, std::size_t horizon, unsigned jobs = 1);

/// sum_i of the LP optimum of c.u over F_i (members in order).
double exact_linear_cost(const Population& pop, std::span<const double> cost, Objective sense, unsigned jobs = 1);
double exact_linear_cost(std::span<const TransformedDevice> devices, std::span<const double> cost, Objective sense,
                         unsigned jobs = 1);

struct DisaggregateOptions
{
    double tol = 1e-6;        // per coordinate, kW
    int max_rounds = 200;
    unsigned jobs = 1;
    // Optional starting columns per device (each must lie in F_i).
    std::vector<std::vector<Vec>> seed_columns;
};

struct Disaggregation
{
    bool feasible = false;
    std::vector<Vec> profiles;
    double residual = 0.0;  // max_t |sum_i u_i(t) - target(t)|
    int rounds = 0;
};

/// Finds u_i in F_i with sum_i u_i = target by column generation over the stacked feasibility LP.
/// An unreachable target is reported through feasible = false.
Disaggregation disaggregate(std::span<const TransformedDevice> devices, std::span<const double> target,
                            const DisaggregateOptions& opts = {});
Disaggregation disaggregate(const Population& pop, std::span<const double> target,
                            const DisaggregateOptions& opts = {});

struct TrackingConfig
{
    int max_iter = 500;
    double gap_tol = 1e-4;
    bool away_steps = true;
};

/// Convex-hull Frank-Wolfe for min ||u - g||^2 given a linear maximization oracle.
struct FwAtom
{
    double weight = 0.0;
    Vec point;
    Vec direction;  // cost vector that produced the point
};

struct FwResult
{
    Vec point;
    std::vector<FwAtom> atoms;
    double gap = 0.0;
    int iterations = 0;
    bool converged = false;
    Vec gap_history;
};

using LinearOracle = std::function<Vec(std::span<const double>)>;

FwResult minimize_distance(const LinearOracle& lmo, std::span<const double> target, const TrackingConfig& cfg);

struct TrackingResult
{
    std::string method;
    Vec target;
    Vec aggregate;              // sum of the per-device profiles
    std::vector<Vec> profiles;  // member order
    double objective = 0.0;     // ||aggregate - target||_2
    double rmse = 0.0;
    double gap = 0.0;
    int iterations = 0;
    bool converged = false;
    Vec gap_history;
};

TrackingResult track_signal(const AggregateGPoly& agg, std::span<const double> signal, const TrackingConfig& cfg = {});

/// The same loop over the aggregate homothet; profiles are the matching points of each member homothet.
TrackingResult track_signal_homothet(std::span<const Homothet> fits, std::span<const double> signal,
                                     const TrackingConfig& cfg = {});

std::vector<Homothet> fit_homothets(const Population& pop, unsigned jobs = 1);

}  // namespace flexsum
