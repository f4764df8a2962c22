#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "flexsum/common.hpp"

namespace flexsum
{

enum class Sense
{
    kLessEqual,
    kGreaterEqual,
    kEqual
};

struct Halfspace
{
    Vec normal;
    double bound = 0.0;
    Sense sense = Sense::kLessEqual;
};

/// Halfspace representation {u : normal_i . u (sense_i) bound_i}.
class HRep
{
  public:
    HRep() = default;
    explicit HRep(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return rows_.size(); }
    const std::vector<Halfspace>& rows() const { return rows_; }
    const Halfspace& row(std::size_t i) const { return rows_.at(i); }

    HRep& add(Vec normal, Sense sense, double bound);
    HRep& add_le(Vec normal, double bound) { return add(std::move(normal), Sense::kLessEqual, bound); }
    HRep& add_ge(Vec normal, double bound) { return add(std::move(normal), Sense::kGreaterEqual, bound); }
    HRep& add_eq(Vec normal, double bound) { return add(std::move(normal), Sense::kEqual, bound); }

    // Appends all rows of another representation of the same dimension.
    HRep& append(const HRep& other);

    bool operator==(const HRep&) const = default;

  private:
    std::size_t dim_ = 0;
    std::vector<Halfspace> rows_;
};

inline bool operator==(const Halfspace& a, const Halfspace& b)
{
    return a.normal == b.normal && a.bound == b.bound && a.sense == b.sense;
}

enum class Objective
{
    kMinimize,
    kMaximize
};

enum class LpStatus
{
    kOptimal,
    kInfeasible,
    kUnbounded
};

std::string to_string(LpStatus status);

struct LpSolution
{
    LpStatus status = LpStatus::kInfeasible;
    Vec point;
    double value = 0.0;
    // d(value)/d(bound_i) for every row of the input, valid when status is optimal.
    Vec duals;

    bool optimal() const { return status == LpStatus::kOptimal; }
};

/// Dense two-phase bounded-variable simplex. Deterministic: Dantzig pricing with lowest-index
/// tie-breaks, switching to Bland's rule on degenerate stalls. Throws NumericalError when the
/// iteration cap is hit or the returned point fails the feasibility re-check.
LpSolution lp_solve(const HRep& poly, std::span<const double> objective, Objective sense);

/// max{direction . u : u in poly}. Throws UnboundedError / InfeasibleError.
double support(const HRep& poly, std::span<const double> direction);

/// All basic feasible solutions, deduplicated and sorted lexicographically (dim <= 8).
std::vector<Vec> vertices(const HRep& poly);

bool contains_point(const HRep& poly, std::span<const double> point, double tol = tol::kFeasibility);

/// inner is a subset of outer, checked row by row on outer with support functions of inner.
bool poly_contains_poly(const HRep& inner, const HRep& outer, double tol = tol::kFeasibility);

/// Every coordinate has finite LP maximum and minimum (false for empty sets too).
bool is_bounded(const HRep& poly);

/// Largest violation of any row at the given point (0 when feasible).
double max_violation(const HRep& poly, std::span<const double> point);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace flexsum
