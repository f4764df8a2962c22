#include "flexsum/gpoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace flexsum
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

// Memo tables are dense-keyed by bitmask only for moderate horizons.
constexpr std::size_t kMemoMaxHorizon = 24;
constexpr std::size_t kMemoMaxEntries = std::size_t{1} << 20;

double scale_of(double v) { return std::max(1.0, std::abs(v)); }

// Solves min/max of the plain sum over F^t restricted to {w.u = level}. If the hyperplane misses
// F^t the level is clamped onto the attainable range of w.u first.
double plane_lp(const HRep& ft, const Vec& weights, double level, Objective sense)
{
    const Vec ones(ft.dim(), 1.0);
    HRep h = ft;
    h.add_eq(weights, level);
    auto sol = lp_solve(h, ones, sense);
    if (sol.status == LpStatus::kInfeasible)
    {
        const double hi = support(ft, weights);
        Vec neg(weights.size());
        std::transform(weights.begin(), weights.end(), neg.begin(), [](double v) { return -v; });
        const double lo = -support(ft, neg);
        HRep clamped = ft;
        clamped.add_eq(weights, std::clamp(level, lo, hi));
        sol = lp_solve(clamped, ones, sense);
    }
    if (!sol.optimal())
    {
        std::ostringstream os;
        os << "compute_bounds: hyperplane LP is " << to_string(sol.status);
        throw NumericalError(os.str());
    }
    return sol.value;
}

// Forward reachability of prefix sums; B is nonempty iff every interval is nonempty.
bool base_nonempty(double u_min, double u_max, std::span<const double> lo, std::span<const double> hi)
{
    double reach_lo = 0.0, reach_hi = 0.0;
    for (std::size_t t = 0; t < lo.size(); ++t)
    {
        reach_lo = std::max(lo[t], reach_lo + u_min);
        reach_hi = std::min(hi[t], reach_hi + u_max);
        if (reach_lo > reach_hi + 1e-9 * scale_of(reach_hi)) return false;
    }
    return true;
}

// Containment of B(lo, hi) in F, checking only the cumulative rows (the boxes coincide).
// Extremes of the discounted sums come from the greedy along the chain {t}, {t-1, t}, ...
bool base_within_device(const TransformedDevice& dev, std::span<const double> lo, std::span<const double> hi)
{
    const std::size_t T = dev.horizon();
    for (std::size_t tau = 1; tau <= T; ++tau)
    {
        Subset chain;
        double prev_p = 0.0, prev_b = 0.0, max_sum = 0.0, min_sum = 0.0, w = 1.0;
        for (std::size_t s = tau; s >= 1; --s)
        {
            chain.insert(s);
            const auto [pv, bv] = detail::base_pb(dev.u_min, dev.u_max, lo, hi, chain);
            max_sum += w * (bv - prev_b);
            min_sum += w * (pv - prev_p);
            prev_b = bv;
            prev_p = pv;
            w *= dev.a;
        }
        if (max_sum > dev.x_ub[tau - 1] + 1e-10 * scale_of(dev.x_ub[tau - 1])) return false;
        if (min_sum < dev.x_lb[tau - 1] - 1e-10 * scale_of(dev.x_lb[tau - 1])) return false;
    }
    return true;
}

void tighten(double u_min, double u_max, Vec& lo, Vec& hi)
{
    const std::size_t T = lo.size();
    Vec new_lo(T), new_hi(T);
    for (std::size_t t = 1; t <= T; ++t)
    {
        const auto [pv, bv] = detail::base_pb(u_min, u_max, lo, hi, Subset::prefix(t));
        new_lo[t - 1] = pv;
        new_hi[t - 1] = bv;
    }
    lo = std::move(new_lo);
    hi = std::move(new_hi);
}

// Moves each bound outward to the largest value that keeps B inside F. One bound at a time,
// repeated until a full pass changes nothing.
void enlarge(const TransformedDevice& dev, Vec& lo, Vec& hi, int max_passes)
{
    const std::size_t T = dev.horizon();
    for (int pass = 0; pass < max_passes; ++pass)
    {
        bool moved = false;
        for (std::size_t t = 1; t <= T; ++t)
        {
            for (int side = 0; side < 2; ++side)
            {
                const bool upper = side == 0;
                Vec& bound = upper ? hi : lo;
                const double dir = upper ? 1.0 : -1.0;
                const double current = bound[t - 1];

                bound[t - 1] = dir * kInf;
                const auto [pv, bv] = detail::base_pb(dev.u_min, dev.u_max, lo, hi, Subset::prefix(t));
                bound[t - 1] = current;
                const double redundant_at = upper ? bv : pv;
                const double room = (redundant_at - current) * dir;
                const double scale = scale_of(current);
                if (room <= 1e-12 * scale) continue;

                auto fits = [&](double v) {
                    bound[t - 1] = v;
                    const bool ok = base_within_device(dev, lo, hi);
                    bound[t - 1] = current;
                    return ok;
                };
                const double probe = current + dir * std::min(room, 1e-7 * scale);
                if (!fits(probe)) continue;

                double next = redundant_at;
                if (!fits(redundant_at))
                {
                    double ok_v = probe, bad_v = redundant_at;
                    for (int it = 0; it < 100 && std::abs(bad_v - ok_v) > 1e-12 * scale; ++it)
                    {
                        const double mid = 0.5 * (ok_v + bad_v);
                        (fits(mid) ? ok_v : bad_v) = mid;
                    }
                    next = ok_v;
                }
                if (std::abs(next - current) > 1e-10 * scale) moved = true;
                bound[t - 1] = next;
            }
        }
        if (!moved) break;
    }
}

void finish_bounds(const TransformedDevice& dev, InnerApprox& apx, const BoundsOptions& opts)
{
    if (!base_nonempty(dev.u_min, dev.u_max, apx.plane_y_lb, apx.plane_y_ub))
        throw InfeasibleError("device " + std::to_string(apx.device_id) + ": inner approximation is empty");
    apx.y_lb = apx.plane_y_lb;
    apx.y_ub = apx.plane_y_ub;
    tighten(apx.u_min, apx.u_max, apx.y_lb, apx.y_ub);
    if (opts.enlarge)
    {
        enlarge(dev, apx.y_lb, apx.y_ub, opts.max_enlarge_passes);
        tighten(apx.u_min, apx.u_max, apx.y_lb, apx.y_ub);
    }
}

}  // namespace

namespace detail
{

std::pair<double, double> base_pb(double u_min, double u_max, std::span<const double> y_lb,
                                  std::span<const double> y_ub, Subset subset)
{
    // Sequential intersection of the box with the planks y_lb(t) <= u([t]) <= y_ub(t).
    // For b(A) track b^t(A & [t]) and p^t([t] \ A); for p(A) track p^t(A & [t]) and b^t([t] \ A).
    double b_in = 0.0, p_out = 0.0;
    double p_in = 0.0, b_out = 0.0;
    for (std::size_t t = 1; t <= y_lb.size(); ++t)
    {
        const bool in = subset.contains(t);
        {
            const double x = b_in + (in ? u_max : 0.0);
            const double y = p_out + (in ? 0.0 : u_min);
            b_in = std::min(x, y_ub[t - 1] - y);
            p_out = std::max(y, y_lb[t - 1] - x);
        }
        {
            const double x = p_in + (in ? u_min : 0.0);
            const double y = b_out + (in ? 0.0 : u_max);
            p_in = std::max(x, y_lb[t - 1] - y);
            b_out = std::min(y, y_ub[t - 1] - x);
        }
    }
    return {p_in, b_in};
}

double base_b(double u_min, double u_max, std::span<const double> y_lb, std::span<const double> y_ub,
              Subset subset)
{
    return base_pb(u_min, u_max, y_lb, y_ub, subset).second;
}

double base_p(double u_min, double u_max, std::span<const double> y_lb, std::span<const double> y_ub,
              Subset subset)
{
    return base_pb(u_min, u_max, y_lb, y_ub, subset).first;
}

}  // namespace detail

InnerApprox compute_bounds(const TransformedDevice& dev, int device_id, const BoundsOptions& opts)
{
    dev.validate();
    const std::size_t T = dev.horizon();

    const HRep full = flexibility_halfspaces(dev);
    if (lp_solve(full, Vec(T, 0.0), Objective::kMinimize).status == LpStatus::kInfeasible)
    {
        for (std::size_t t = 1; t <= T; ++t)
        {
            const HRep ft = flexibility_halfspaces(dev.prefix(t));
            if (lp_solve(ft, Vec(t, 0.0), Objective::kMinimize).status == LpStatus::kInfeasible)
            {
                std::ostringstream os;
                os << "device " << device_id << ": flexibility set is empty from period " << t;
                throw InfeasibleError(os.str(), t);
            }
        }
        throw InfeasibleError("device " + std::to_string(device_id) + ": flexibility set is empty");
    }

    InnerApprox apx;
    apx.device_id = device_id;
    apx.a = dev.a;
    apx.u_min = dev.u_min;
    apx.u_max = dev.u_max;
    apx.z_lb.resize(T);
    apx.z_ub.resize(T);
    apx.plane_y_lb.resize(T);
    apx.plane_y_ub.resize(T);

    double geometric = 0.0;
    for (std::size_t t = 1; t <= T; ++t)
    {
        geometric = geometric * dev.a + 1.0;  // sum_{k<t} a^k
        const HRep ft = flexibility_halfspaces(dev.prefix(t));
        const Vec w = discount_weights(dev.a, t, t);
        apx.z_ub[t - 1] = std::min(dev.x_ub[t - 1], geometric * dev.u_max);
        apx.z_lb[t - 1] = std::max(dev.x_lb[t - 1], geometric * dev.u_min);
        apx.plane_y_ub[t - 1] = plane_lp(ft, w, apx.z_ub[t - 1], Objective::kMinimize);
        apx.plane_y_lb[t - 1] = plane_lp(ft, w, apx.z_lb[t - 1], Objective::kMaximize);
    }

    finish_bounds(dev, apx, opts);
    return apx;
}

InnerApprox restrict_bounds(const InnerApprox& longer, const TransformedDevice& dev, const BoundsOptions& opts)
{
    dev.validate();
    const std::size_t T = dev.horizon();
    if (longer.plane_y_lb.size() < T || longer.plane_y_ub.size() < T || longer.z_lb.size() < T)
        throw std::invalid_argument("restrict_bounds: source approximation lacks hyperplane data for this horizon");
    InnerApprox apx;
    apx.device_id = longer.device_id;
    apx.a = dev.a;
    apx.u_min = dev.u_min;
    apx.u_max = dev.u_max;
    apx.z_lb.assign(longer.z_lb.begin(), longer.z_lb.begin() + T);
    apx.z_ub.assign(longer.z_ub.begin(), longer.z_ub.begin() + T);
    apx.plane_y_lb.assign(longer.plane_y_lb.begin(), longer.plane_y_lb.begin() + T);
    apx.plane_y_ub.assign(longer.plane_y_ub.begin(), longer.plane_y_ub.begin() + T);
    finish_bounds(dev, apx, opts);
    return apx;
}

HRep base_hrep(const InnerApprox& apx)
{
    const std::size_t T = apx.horizon();
    HRep h(T);
    for (std::size_t t = 1; t <= T; ++t) h.add_ge(Subset::of({t}).indicator(T), apx.u_min);
    for (std::size_t t = 1; t <= T; ++t) h.add_le(Subset::of({t}).indicator(T), apx.u_max);
    for (std::size_t t = 1; t <= T; ++t) h.add_ge(Subset::prefix(t).indicator(T), apx.y_lb[t - 1]);
    for (std::size_t t = 1; t <= T; ++t) h.add_le(Subset::prefix(t).indicator(T), apx.y_ub[t - 1]);
    return h;
}

namespace
{

void check_subset(Subset s, std::size_t horizon)
{
    if (!s.is_subset_of(Subset::full(horizon)))
        throw std::invalid_argument("subset " + s.to_string() + " is not within {1.." + std::to_string(horizon) + "}");
}

}  // namespace

double eval_b(const InnerApprox& apx, Subset subset, Evaluator how)
{
    check_subset(subset, apx.horizon());
    if (subset.empty()) return 0.0;
    if (how == Evaluator::kRecursion) return detail::base_b(apx.u_min, apx.u_max, apx.y_lb, apx.y_ub, subset);
    return support(base_hrep(apx), subset.indicator(apx.horizon()));
}

double eval_p(const InnerApprox& apx, Subset subset, Evaluator how)
{
    check_subset(subset, apx.horizon());
    if (subset.empty()) return 0.0;
    if (how == Evaluator::kRecursion) return detail::base_p(apx.u_min, apx.u_max, apx.y_lb, apx.y_ub, subset);
    Vec neg = subset.indicator(apx.horizon());
    for (auto& v : neg) v = -v;
    return -support(base_hrep(apx), neg);
}

struct GPolyFunctions::State
{
    std::size_t horizon = 0;
    SetFunction p;
    SetFunction b;
    Provenance provenance = Provenance::kCustom;
    bool memoize = false;
    mutable std::shared_mutex mutex;
    mutable std::unordered_map<std::uint64_t, double> p_memo;
    mutable std::unordered_map<std::uint64_t, double> b_memo;

    double lookup(const SetFunction& f, std::unordered_map<std::uint64_t, double>& memo, Subset s) const
    {
        if (!memoize) return f(s);
        {
            std::shared_lock lock(mutex);
            if (auto it = memo.find(s.bits()); it != memo.end()) return it->second;
        }
        const double v = f(s);
        std::unique_lock lock(mutex);
        if (memo.size() < kMemoMaxEntries) memo.emplace(s.bits(), v);
        return v;
    }
};

GPolyFunctions::GPolyFunctions(std::size_t horizon, SetFunction p, SetFunction b, Provenance provenance,
                               bool memoize)
    : state_(std::make_shared<State>())
{
    check_horizon(horizon);
    state_->horizon = horizon;
    state_->p = std::move(p);
    state_->b = std::move(b);
    state_->provenance = provenance;
    state_->memoize = memoize && horizon <= kMemoMaxHorizon;
}

double GPolyFunctions::p(Subset subset) const
{
    check_subset(subset, state_->horizon);
    if (subset.empty()) return 0.0;
    return state_->lookup(state_->p, state_->p_memo, subset);
}

double GPolyFunctions::b(Subset subset) const
{
    check_subset(subset, state_->horizon);
    if (subset.empty()) return 0.0;
    return state_->lookup(state_->b, state_->b_memo, subset);
}

std::size_t GPolyFunctions::horizon() const { return state_->horizon; }

Provenance GPolyFunctions::provenance() const { return state_->provenance; }

std::size_t GPolyFunctions::memo_size() const
{
    std::shared_lock lock(state_->mutex);
    return state_->p_memo.size() + state_->b_memo.size();
}

GPolyFunctions functions(const InnerApprox& apx)
{
    auto shared = std::make_shared<const InnerApprox>(apx);
    return GPolyFunctions(
        apx.horizon(),
        [shared](Subset s) { return detail::base_p(shared->u_min, shared->u_max, shared->y_lb, shared->y_ub, s); },
        [shared](Subset s) { return detail::base_b(shared->u_min, shared->u_max, shared->y_lb, shared->y_ub, s); },
        Provenance::kSingleDevice, false);
}

GPolyFunctions reflect(const GPolyFunctions& f, Subset flipped)
{
    check_subset(flipped, f.horizon());
    if (flipped.empty()) return f;
    return GPolyFunctions(
        f.horizon(), [f, flipped](Subset s) { return f.p(s - flipped) - f.b(s & flipped); },
        [f, flipped](Subset s) { return f.b(s - flipped) - f.p(s & flipped); }, Provenance::kReflected, false);
}

namespace
{

GPolyFunctions make_aggregate_functions(std::shared_ptr<const std::vector<InnerApprox>> members, std::size_t T)
{
    return GPolyFunctions(
        T,
        [members](Subset s) {
            double acc = 0.0;
            for (const auto& m : *members) acc += detail::base_p(m.u_min, m.u_max, m.y_lb, m.y_ub, s);
            return acc;
        },
        [members](Subset s) {
            double acc = 0.0;
            for (const auto& m : *members) acc += detail::base_b(m.u_min, m.u_max, m.y_lb, m.y_ub, s);
            return acc;
        },
        Provenance::kAggregate);
}

std::vector<InnerApprox> sorted_members(std::vector<InnerApprox> members)
{
    if (members.empty()) throw std::invalid_argument("aggregate: empty population");
    const std::size_t T = members.front().horizon();
    for (const auto& m : members)
        if (m.horizon() != T)
        {
            std::ostringstream os;
            os << "aggregate: horizon mismatch (device " << m.device_id << " has " << m.horizon() << ", expected "
               << T << ")";
            throw std::invalid_argument(os.str());
        }
    std::stable_sort(members.begin(), members.end(),
                     [](const InnerApprox& x, const InnerApprox& y) { return x.device_id < y.device_id; });
    return members;
}

}  // namespace

AggregateGPoly::AggregateGPoly(std::vector<InnerApprox> members)
    : members_(sorted_members(std::move(members))),
      horizon_(members_.front().horizon()),
      functions_(make_aggregate_functions(std::make_shared<const std::vector<InnerApprox>>(members_), horizon_))
{
}

AggregateGPoly aggregate(std::vector<InnerApprox> members) { return AggregateGPoly(std::move(members)); }

namespace
{

struct GreedyPlan
{
    Subset flipped;
    std::vector<std::size_t> order;  // 1-based periods
};

GreedyPlan plan_greedy(std::span<const double> cost)
{
    GreedyPlan plan;
    plan.order.resize(cost.size());
    std::iota(plan.order.begin(), plan.order.end(), std::size_t{1});
    for (std::size_t t = 1; t <= cost.size(); ++t)
        if (cost[t - 1] < 0.0) plan.flipped.insert(t);
    std::stable_sort(plan.order.begin(), plan.order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(cost[x - 1]) > std::abs(cost[y - 1]);
    });
    return plan;
}

Vec run_greedy(const GPolyFunctions& f, const GreedyPlan& plan)
{
    const GPolyFunctions g = reflect(f, plan.flipped);
    Vec u(f.horizon(), 0.0);
    Subset chain;
    double prev = 0.0;
    for (auto t : plan.order)
    {
        chain.insert(t);
        const double v = g.b(chain);
        u[t - 1] = v - prev;
        prev = v;
    }
    for (auto t : plan.flipped.periods()) u[t - 1] = -u[t - 1];
    return u;
}

}  // namespace

GreedyResult greedy_linmax(const GPolyFunctions& f, std::span<const double> cost)
{
    if (cost.size() != f.horizon()) throw std::invalid_argument("greedy_linmax: cost length does not match horizon");
    GreedyResult r;
    r.point = run_greedy(f, plan_greedy(cost));
    r.value = dot(cost, r.point);
    return r;
}

std::vector<Vec> greedy_member_points(const AggregateGPoly& agg, std::span<const double> cost)
{
    if (cost.size() != agg.horizon())
        throw std::invalid_argument("greedy_member_points: cost length does not match horizon");
    const GreedyPlan plan = plan_greedy(cost);
    std::vector<Vec> out;
    out.reserve(agg.members().size());
    for (const auto& m : agg.members()) out.push_back(run_greedy(functions(m), plan));
    return out;
}

}  // namespace flexsum
