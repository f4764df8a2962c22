#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "flexsum/common.hpp"
#include "flexsum/model.hpp"
#include "flexsum/polytope.hpp"
#include "flexsum/subset.hpp"

namespace flexsum
{

/// Inner approximation of one device's flexibility set by the base polytope
///   B(y_lb, y_ub) = { u : u_min <= u(t) <= u_max,  y_lb(t) <= u(1) + ... + u(t) <= y_ub(t) }.
///
/// y_lb / y_ub are stored tight: y_ub(t) = max u([t]) and y_lb(t) = min u([t]) over B.
struct InnerApprox
{
    int device_id = 0;
    double a = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    Vec y_lb;
    Vec y_ub;

    // Diagnostics from construction: hyperplane levels and the bounds the hyperplane LPs returned
    // before tightening and enlargement. Empty when the approximation was deserialized.
    Vec z_lb;
    Vec z_ub;
    Vec plane_y_lb;
    Vec plane_y_ub;

    std::size_t horizon() const { return y_lb.size(); }
};

struct BoundsOptions
{
    // Push every bound outward to its containment limit after the hyperplane LPs.
    bool enlarge = true;
    int max_enlarge_passes = 20;
};

/// Optimal cumulative bounds. For each t, the upper bound minimizes u([t]) over F^t intersected
/// with the hyperplane where the discounted sum sits at z_ub(t); the lower bound maximizes u([t])
/// on the z_lb(t) hyperplane. The result is tightened, then (optionally) enlarged bound by bound
/// until every remaining bound is at its containment limit.
/// Throws InfeasibleError (with the first contradictory period) when F is empty.
InnerApprox compute_bounds(const TransformedDevice& dev, int device_id = 0, const BoundsOptions& opts = {});

/// Same result as compute_bounds(dev) when dev is a prefix of the device behind `longer`, reusing
/// its hyperplane LP values (those depend only on the first t periods).
InnerApprox restrict_bounds(const InnerApprox& longer, const TransformedDevice& dev, const BoundsOptions& opts = {});

/// 2T box rows then 2T prefix-sum rows (lower block, upper block within each group).
HRep base_hrep(const InnerApprox& apx);

enum class Evaluator
{
    kRecursion,  // O(T) sequential plank intersection
    kSupportLp   // support function of base_hrep, the reference definition
};

double eval_b(const InnerApprox& apx, Subset subset, Evaluator how = Evaluator::kRecursion);
double eval_p(const InnerApprox& apx, Subset subset, Evaluator how = Evaluator::kRecursion);

namespace detail
{
/// (p(A), b(A)) of the base polytope with the given cumulative bounds. Bounds may be +-infinity.
std::pair<double, double> base_pb(double u_min, double u_max, std::span<const double> y_lb,
                                  std::span<const double> y_ub, Subset subset);
double base_b(double u_min, double u_max, std::span<const double> y_lb, std::span<const double> y_ub,
              Subset subset);
double base_p(double u_min, double u_max, std::span<const double> y_lb, std::span<const double> y_ub,
              Subset subset);
}  // namespace detail

enum class Provenance
{
    kSingleDevice,
    kAggregate,
    kReflected,
    kCustom
};

/// Pair (p, b) of supermodular / submodular set functions on {1..T} generating Q(p, b).
/// Cheap to copy; copies share one memo table (guarded for concurrent use).
class GPolyFunctions
{
  public:
    using SetFunction = std::function<double(Subset)>;

    GPolyFunctions(std::size_t horizon, SetFunction p, SetFunction b, Provenance provenance,
                   bool memoize = true);

    double p(Subset subset) const;
    double b(Subset subset) const;
    std::size_t horizon() const;
    Provenance provenance() const;

    // number of memoized subsets (p and b tables together)
    std::size_t memo_size() const;

  private:
    struct State;
    std::shared_ptr<State> state_;
};

GPolyFunctions functions(const InnerApprox& apx);

/// Coordinate reflection u(t) -> -u(t) for t in flipped:
///   b'(A) = b(A \ F) - p(A & F),  p'(A) = p(A \ F) - b(A & F).
GPolyFunctions reflect(const GPolyFunctions& f, Subset flipped);

/// Minkowski sum of member base polytopes, represented by p_N = sum p_i and b_N = sum b_i.
class AggregateGPoly
{
  public:
    explicit AggregateGPoly(std::vector<InnerApprox> members);

    const std::vector<InnerApprox>& members() const { return members_; }
    std::size_t horizon() const { return horizon_; }
    const GPolyFunctions& functions() const { return functions_; }

    double p(Subset subset) const { return functions_.p(subset); }
    double b(Subset subset) const { return functions_.b(subset); }

  private:
    std::vector<InnerApprox> members_;
    std::size_t horizon_ = 0;
    GPolyFunctions functions_;
};

AggregateGPoly aggregate(std::vector<InnerApprox> members);

struct GreedyResult
{
    Vec point;
    double value = 0.0;
};

/// max c.u over Q(p, b). Coordinates with c(t) < 0 are reflected, the rest are processed in
/// order of decreasing |c| (ties by ascending t) along the chain of b.
GreedyResult greedy_linmax(const GPolyFunctions& f, std::span<const double> cost);

/// The aggregate greedy vertex split into one greedy vertex per member (same order, same
/// reflection), in member order.
std::vector<Vec> greedy_member_points(const AggregateGPoly& agg, std::span<const double> cost);

}  // namespace flexsum
