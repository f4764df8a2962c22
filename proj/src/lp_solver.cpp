#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "flexsum/polytope.hpp"

namespace flexsum
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
constexpr double kPhaseOneTol = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr int kDegenerateBeforeBland = 50;

enum class VarState : unsigned char
{
    kBasic,
    kAtLower,
    kAtUpper
};

// Internal column: x[var] = shift[var] + sign * value, or a slack / artificial when var < 0.
struct Column
{
    int var = -1;
    double sign = 1.0;
    bool artificial = false;
};

// Bounded-variable tableau for  min cost.x  s.t.  A x = rhs,  0 <= x <= upper.
class Tableau
{
  public:
    Tableau(std::size_t rows, std::size_t cols)
        : m(rows), n(cols), a(rows * cols, 0.0), beta(rows, 0.0), basis(rows, 0),
          state(cols, VarState::kAtLower), upper(cols, kInf), cost(cols, 0.0), reduced(cols, 0.0)
    {
    }

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    double nonbasic_value(std::size_t j) const { return state[j] == VarState::kAtUpper ? upper[j] : 0.0; }

    void compute_reduced_costs()
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            double d = cost[j];
            for (std::size_t i = 0; i < m; ++i) d -= cost[basis[i]] * at(i, j);
            reduced[j] = d;
        }
        for (std::size_t i = 0; i < m; ++i) reduced[basis[i]] = 0.0;
    }

    void pivot(std::size_t r, std::size_t j)
    {
        const double piv = at(r, j);
        double* prow = &a[r * n];
        for (std::size_t k = 0; k < n; ++k) prow[k] /= piv;
        prow[j] = 1.0;
        for (std::size_t i = 0; i < m; ++i)
        {
            if (i == r) continue;
            double* irow = &a[i * n];
            const double f = irow[j];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) irow[k] -= f * prow[k];
            irow[j] = 0.0;
        }
        const double f = reduced[j];
        if (f != 0.0)
        {
            for (std::size_t k = 0; k < n; ++k) reduced[k] -= f * prow[k];
            reduced[j] = 0.0;
        }
    }

    std::size_t m, n;
    std::vector<double> a;
    std::vector<double> beta;
    std::vector<std::size_t> basis;
    std::vector<VarState> state;
    std::vector<double> upper;
    std::vector<double> cost;
    std::vector<double> reduced;
};

enum class RunResult
{
    kOptimal,
    kUnbounded
};

bool eligible(const Tableau& tab, std::size_t j)
{
    if (tab.state[j] == VarState::kAtLower) return tab.reduced[j] < -kReducedCostTol && tab.upper[j] > 0.0;
    if (tab.state[j] == VarState::kAtUpper) return tab.reduced[j] > kReducedCostTol;
    return false;
}

RunResult run_simplex(Tableau& tab, std::size_t max_iter)
{
    int degenerate_streak = 0;
    for (std::size_t iter = 0; iter < max_iter; ++iter)
    {
        const bool bland = degenerate_streak >= kDegenerateBeforeBland;
        std::size_t enter = tab.n;
        double best = 0.0;
        for (std::size_t j = 0; j < tab.n; ++j)
        {
            if (!eligible(tab, j)) continue;
            if (bland)
            {
                enter = j;
                break;
            }
            const double score = std::abs(tab.reduced[j]);
            if (score > best)
            {
                best = score;
                enter = j;
            }
        }
        if (enter == tab.n) return RunResult::kOptimal;

        const double delta = tab.state[enter] == VarState::kAtLower ? 1.0 : -1.0;
        double theta = tab.upper[enter];
        std::size_t leave_row = tab.m;  // m encodes a bound flip of the entering column
        bool leave_to_upper = false;
        for (std::size_t i = 0; i < tab.m; ++i)
        {
            const double alpha = tab.at(i, enter) * delta;
            double limit;
            bool to_upper;
            if (alpha > kPivotTol)
            {
                limit = std::max(tab.beta[i], 0.0) / alpha;
                to_upper = false;
            }
            else if (alpha < -kPivotTol && std::isfinite(tab.upper[tab.basis[i]]))
            {
                limit = std::max(tab.upper[tab.basis[i]] - tab.beta[i], 0.0) / (-alpha);
                to_upper = true;
            }
            else
                continue;
            const bool better = limit < theta - kTieTol ||
                                (leave_row != tab.m && limit <= theta + kTieTol && tab.basis[i] < tab.basis[leave_row]);
            if (better)
            {
                theta = limit;
                leave_row = i;
                leave_to_upper = to_upper;
            }
        }
        if (!std::isfinite(theta)) return RunResult::kUnbounded;

        degenerate_streak = theta <= kTieTol ? degenerate_streak + 1 : 0;

        const double step = delta * theta;
        for (std::size_t i = 0; i < tab.m; ++i) tab.beta[i] -= step * tab.at(i, enter);

        if (leave_row == tab.m)
        {
            tab.state[enter] = tab.state[enter] == VarState::kAtLower ? VarState::kAtUpper : VarState::kAtLower;
            continue;
        }

        const double entering_value = tab.nonbasic_value(enter) + step;
        const std::size_t leaving = tab.basis[leave_row];
        tab.pivot(leave_row, enter);
        tab.beta[leave_row] = entering_value;
        tab.basis[leave_row] = enter;
        tab.state[enter] = VarState::kBasic;
        tab.state[leaving] = leave_to_upper ? VarState::kAtUpper : VarState::kAtLower;
    }
    std::ostringstream os;
    os << "lp_solve: iteration limit " << max_iter << " reached";
    throw NumericalError(os.str());
}

LpSolution infeasible_solution(std::size_t dim, std::size_t rows)
{
    LpSolution s;
    s.status = LpStatus::kInfeasible;
    s.point.assign(dim, 0.0);
    s.duals.assign(rows, 0.0);
    return s;
}

double row_scale(double bound) { return std::max(1.0, std::abs(bound)); }

}  // namespace

std::string to_string(LpStatus status)
{
    switch (status)
    {
        case LpStatus::kOptimal: return "optimal";
        case LpStatus::kInfeasible: return "infeasible";
        case LpStatus::kUnbounded: return "unbounded";
    }
    return "unknown";
}

LpSolution lp_solve(const HRep& poly, std::span<const double> objective, Objective sense)
{
    const std::size_t dim = poly.dim();
    const auto& rows = poly.rows();
    if (objective.size() != dim) throw std::invalid_argument("lp_solve: objective length does not match dimension");

    const double obj_sign = sense == Objective::kMaximize ? -1.0 : 1.0;

    // Single-variable rows become variable bounds; the rest stay as general rows.
    Vec lower(dim, -kInf), upper(dim, kInf);
    std::vector<int> lower_row(dim, -1), upper_row(dim, -1);
    std::vector<std::size_t> general;
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        const auto& h = rows[r];
        std::size_t nnz = 0, idx = 0;
        for (std::size_t j = 0; j < dim; ++j)
            if (h.normal[j] != 0.0)
            {
                ++nnz;
                idx = j;
            }
        if (nnz == 0)
        {
            const double slackness = 1e-9 * row_scale(h.bound);
            const bool ok = (h.sense == Sense::kLessEqual && 0.0 <= h.bound + slackness) ||
                            (h.sense == Sense::kGreaterEqual && 0.0 >= h.bound - slackness) ||
                            (h.sense == Sense::kEqual && std::abs(h.bound) <= slackness);
            if (!ok) return infeasible_solution(dim, rows.size());
            continue;
        }
        if (nnz > 1)
        {
            general.push_back(r);
            continue;
        }
        const double coef = h.normal[idx];
        const double value = h.bound / coef;
        const bool sets_lower = h.sense == Sense::kEqual || (h.sense == Sense::kGreaterEqual) == (coef > 0.0);
        const bool sets_upper = h.sense == Sense::kEqual || (h.sense == Sense::kLessEqual) == (coef > 0.0);
        if (sets_lower && value > lower[idx])
        {
            lower[idx] = value;
            lower_row[idx] = static_cast<int>(r);
        }
        if (sets_upper && value < upper[idx])
        {
            upper[idx] = value;
            upper_row[idx] = static_cast<int>(r);
        }
    }
    for (std::size_t j = 0; j < dim; ++j)
    {
        if (lower[j] > upper[j])
        {
            if (lower[j] - upper[j] > 1e-9 * row_scale(lower[j])) return infeasible_solution(dim, rows.size());
            upper[j] = lower[j];
        }
    }

    // Shift every variable onto [0, ub]; free variables are split.
    std::vector<Column> cols;
    Vec col_upper;
    Vec shift(dim, 0.0);
    std::vector<std::size_t> first_col(dim);
    for (std::size_t j = 0; j < dim; ++j)
    {
        first_col[j] = cols.size();
        if (std::isfinite(lower[j]))
        {
            shift[j] = lower[j];
            cols.push_back({static_cast<int>(j), 1.0, false});
            col_upper.push_back(upper[j] - lower[j]);
        }
        else if (std::isfinite(upper[j]))
        {
            shift[j] = upper[j];
            cols.push_back({static_cast<int>(j), -1.0, false});
            col_upper.push_back(kInf);
        }
        else
        {
            cols.push_back({static_cast<int>(j), 1.0, false});
            col_upper.push_back(kInf);
            cols.push_back({static_cast<int>(j), -1.0, false});
            col_upper.push_back(kInf);
        }
    }
    const std::size_t n_struct = cols.size();
    const std::size_t m = general.size();

    std::vector<double> row_sign(m, 1.0);
    Vec rhs(m, 0.0);
    std::vector<int> slack_col(m, -1);
    for (std::size_t i = 0; i < m; ++i)
    {
        const auto& h = rows[general[i]];
        double b = h.bound;
        for (std::size_t j = 0; j < dim; ++j) b -= h.normal[j] * shift[j];
        if (b < 0.0) row_sign[i] = -1.0;
        rhs[i] = row_sign[i] * b;
        if (h.sense != Sense::kEqual)
        {
            slack_col[i] = static_cast<int>(cols.size());
            cols.push_back({-1, h.sense == Sense::kLessEqual ? 1.0 : -1.0, false});
            col_upper.push_back(kInf);
        }
    }
    std::vector<int> basis_col(m, -1);
    for (std::size_t i = 0; i < m; ++i)
    {
        if (slack_col[i] >= 0 && cols[slack_col[i]].sign * row_sign[i] > 0.0)
            basis_col[i] = slack_col[i];
        else
        {
            basis_col[i] = static_cast<int>(cols.size());
            cols.push_back({-1, 1.0, true});
            col_upper.push_back(kInf);
        }
    }
    const std::size_t n = cols.size();

    // Original standard-form matrix, kept for the final re-solve.
    Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i)
    {
        const auto& h = rows[general[i]];
        for (std::size_t k = 0; k < n_struct; ++k)
            a0(i, k) = row_sign[i] * h.normal[cols[k].var] * cols[k].sign;
        if (slack_col[i] >= 0) a0(i, slack_col[i]) = row_sign[i] * cols[slack_col[i]].sign;
        if (cols[basis_col[i]].artificial) a0(i, basis_col[i]) = 1.0;
    }

    Tableau tab(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < n; ++k) tab.at(i, k) = a0(i, k);
    tab.upper = col_upper;
    for (std::size_t i = 0; i < m; ++i)
    {
        tab.beta[i] = rhs[i];
        tab.basis[i] = static_cast<std::size_t>(basis_col[i]);
        tab.state[tab.basis[i]] = VarState::kBasic;
    }

    const std::size_t max_iter = 50 * (m + n) + 1000;
    bool any_artificial = false;
    for (const auto& c : cols) any_artificial = any_artificial || c.artificial;

    double rhs_scale = 1.0;
    for (double b : rhs) rhs_scale = std::max(rhs_scale, std::abs(b));

    if (any_artificial)
    {
        for (std::size_t k = 0; k < n; ++k) tab.cost[k] = cols[k].artificial ? 1.0 : 0.0;
        tab.compute_reduced_costs();
        run_simplex(tab, max_iter);
        double infeasibility = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (cols[tab.basis[i]].artificial) infeasibility += std::max(tab.beta[i], 0.0);
        if (infeasibility > kPhaseOneTol * rhs_scale) return infeasible_solution(dim, rows.size());

        // Drive zero-valued artificials out of the basis where possible.
        for (std::size_t i = 0; i < m; ++i)
        {
            if (!cols[tab.basis[i]].artificial) continue;
            std::size_t best = n;
            double best_mag = 1e-7;
            for (std::size_t k = 0; k < n; ++k)
            {
                if (cols[k].artificial || tab.state[k] == VarState::kBasic) continue;
                if (std::abs(tab.at(i, k)) > best_mag)
                {
                    best_mag = std::abs(tab.at(i, k));
                    best = k;
                }
            }
            if (best == n) continue;  // redundant row
            const double theta = tab.beta[i] / tab.at(i, best);
            const double entering_value = tab.nonbasic_value(best) + theta;
            for (std::size_t r = 0; r < m; ++r) tab.beta[r] -= theta * tab.at(r, best);
            const std::size_t leaving = tab.basis[i];
            tab.pivot(i, best);
            tab.beta[i] = entering_value;
            tab.basis[i] = best;
            tab.state[best] = VarState::kBasic;
            tab.state[leaving] = VarState::kAtLower;
        }
        for (std::size_t k = 0; k < n; ++k)
            if (cols[k].artificial)
            {
                tab.upper[k] = 0.0;
                if (tab.state[k] == VarState::kAtUpper) tab.state[k] = VarState::kAtLower;
            }
    }

    Vec internal_cost(n, 0.0);
    for (std::size_t k = 0; k < n_struct; ++k) internal_cost[k] = obj_sign * objective[cols[k].var] * cols[k].sign;
    tab.cost = internal_cost;
    tab.compute_reduced_costs();
    if (run_simplex(tab, max_iter) == RunResult::kUnbounded)
    {
        LpSolution s;
        s.status = LpStatus::kUnbounded;
        s.point.assign(dim, 0.0);
        s.duals.assign(rows.size(), 0.0);
        return s;
    }

    // Re-solve the final basis against the original matrix for an accurate point and duals.
    Vec values(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        if (tab.state[k] == VarState::kAtUpper) values[k] = tab.upper[k];
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    if (m > 0)
    {
        Eigen::MatrixXd basis_matrix(m, m);
        Eigen::VectorXd b(m), cb(m);
        for (std::size_t i = 0; i < m; ++i)
        {
            basis_matrix.col(i) = a0.col(tab.basis[i]);
            cb(i) = internal_cost[tab.basis[i]];
            double v = rhs[i];
            for (std::size_t k = 0; k < n; ++k)
                if (tab.state[k] == VarState::kAtUpper) v -= a0(i, k) * tab.upper[k];
            b(i) = v;
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
        Eigen::VectorXd xb = lu.solve(b);
        y = basis_matrix.transpose().partialPivLu().solve(cb);
        if (!xb.allFinite() || !y.allFinite()) throw NumericalError("lp_solve: singular final basis");
        for (std::size_t i = 0; i < m; ++i) values[tab.basis[i]] = xb(i);
    }

    LpSolution sol;
    sol.status = LpStatus::kOptimal;
    sol.point = shift;
    for (std::size_t k = 0; k < n_struct; ++k) sol.point[cols[k].var] += cols[k].sign * values[k];
    sol.value = dot(objective, sol.point);

    sol.duals.assign(rows.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) sol.duals[general[i]] = obj_sign * y(i) * row_sign[i];
    for (std::size_t j = 0; j < dim; ++j)
    {
        const std::size_t k = first_col[j];
        if (tab.state[k] == VarState::kBasic) continue;
        double d = internal_cost[k];
        for (std::size_t i = 0; i < m; ++i) d -= y(i) * a0(i, k);
        // d(value_min)/d(bound) of whichever bound the column sits at.
        int row = -1;
        double sensitivity = 0.0;
        if (tab.state[k] == VarState::kAtLower)
        {
            row = cols[k].sign > 0.0 ? lower_row[j] : upper_row[j];
            sensitivity = d * cols[k].sign;
            if (!std::isfinite(cols[k].sign > 0.0 ? lower[j] : upper[j])) row = -1;
        }
        else
        {
            row = upper_row[j];
            sensitivity = d;
        }
        if (cols.size() > k + 1 && cols[k + 1].var == static_cast<int>(j)) row = -1;  // split free variable
        if (row >= 0) sol.duals[row] = obj_sign * sensitivity / rows[row].normal[j];
    }

    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        const auto& h = rows[r];
        const double lhs = dot(h.normal, sol.point);
        double viol = 0.0;
        if (h.sense != Sense::kGreaterEqual) viol = std::max(viol, lhs - h.bound);
        if (h.sense != Sense::kLessEqual) viol = std::max(viol, h.bound - lhs);
        if (viol > tol::kFeasibility * row_scale(h.bound))
        {
            std::ostringstream os;
            os << "lp_solve: optimal point violates row " << r << " by " << viol;
            throw NumericalError(os.str());
        }
    }
    return sol;
}

}  // namespace flexsum
