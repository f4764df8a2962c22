#include "flexsum/polytope.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flexsum
{

HRep& HRep::add(Vec normal, Sense sense, double bound)
{
    if (normal.size() != dim_) throw std::invalid_argument("HRep::add: normal has wrong length");
    rows_.push_back({std::move(normal), bound, sense});
    return *this;
}

HRep& HRep::append(const HRep& other)
{
    if (other.dim() != dim_) throw std::invalid_argument("HRep::append: dimension mismatch");
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
    return *this;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double support(const HRep& poly, std::span<const double> direction)
{
    const auto sol = lp_solve(poly, direction, Objective::kMaximize);
    if (sol.status == LpStatus::kInfeasible) throw InfeasibleError("support: empty polytope");
    if (sol.status == LpStatus::kUnbounded) throw UnboundedError("support: unbounded in the given direction");
    return sol.value;
}

double max_violation(const HRep& poly, std::span<const double> point)
{
    double worst = 0.0;
    for (const auto& h : poly.rows())
    {
        const double lhs = dot(h.normal, point);
        if (h.sense != Sense::kGreaterEqual) worst = std::max(worst, lhs - h.bound);
        if (h.sense != Sense::kLessEqual) worst = std::max(worst, h.bound - lhs);
    }
    return worst;
}

bool contains_point(const HRep& poly, std::span<const double> point, double tol)
{
    if (point.size() != poly.dim()) throw std::invalid_argument("contains_point: dimension mismatch");
    return max_violation(poly, point) <= tol;
}

bool poly_contains_poly(const HRep& inner, const HRep& outer, double tol)
{
    if (inner.dim() != outer.dim()) throw std::invalid_argument("poly_contains_poly: dimension mismatch");
    for (const auto& h : outer.rows())
    {
        if (h.sense != Sense::kGreaterEqual && support(inner, h.normal) > h.bound + tol) return false;
        if (h.sense != Sense::kLessEqual)
        {
            Vec neg(h.normal.size());
            std::transform(h.normal.begin(), h.normal.end(), neg.begin(), [](double v) { return -v; });
            if (-support(inner, neg) < h.bound - tol) return false;
        }
    }
    return true;
}

bool is_bounded(const HRep& poly)
{
    Vec e(poly.dim(), 0.0);
    for (std::size_t j = 0; j < poly.dim(); ++j)
    {
        e[j] = 1.0;
        for (auto sense : {Objective::kMaximize, Objective::kMinimize})
            if (!lp_solve(poly, e, sense).optimal()) return false;
        e[j] = 0.0;
    }
    return true;
}

std::vector<Vec> vertices(const HRep& poly)
{
    constexpr std::size_t kMaxDim = 8;
    const std::size_t d = poly.dim();
    if (d == 0 || d > kMaxDim) throw std::invalid_argument("vertices: dimension must lie in [1, 8]");
    const auto& rows = poly.rows();
    const std::size_t m = rows.size();
    std::vector<Vec> found;
    if (m < d) return found;

    std::vector<std::size_t> pick(d);
    std::iota(pick.begin(), pick.end(), 0);
    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd b(d);
    while (true)
    {
        for (std::size_t r = 0; r < d; ++r)
        {
            for (std::size_t c = 0; c < d; ++c) a(r, c) = rows[pick[r]].normal[c];
            b(r) = rows[pick[r]].bound;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        lu.setThreshold(1e-10);
        if (lu.isInvertible())
        {
            Eigen::VectorXd x = lu.solve(b);
            Vec p(x.data(), x.data() + d);
            if (contains_point(poly, p, tol::kFeasibility))
            {
                const bool dup = std::any_of(found.begin(), found.end(), [&](const Vec& q) {
                    for (std::size_t k = 0; k < d; ++k)
                        if (std::abs(q[k] - p[k]) > tol::kDedup) return false;
                    return true;
                });
                if (!dup) found.push_back(std::move(p));
            }
        }
        // next combination
        std::size_t i = d;
        while (i > 0 && pick[i - 1] == m - d + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t k = i; k < d; ++k) pick[k] = pick[k - 1] + 1;
    }
    std::sort(found.begin(), found.end());
    return found;
}

}  // namespace flexsum
