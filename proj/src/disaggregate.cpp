#include <algorithm>
#include <cmath>
#include <sstream>

#include "flexsum/aggregate.hpp"
#include "flexsum/parallel.hpp"

namespace flexsum
{

namespace
{

Vec lp_vertex(const HRep& f, const Vec& cost, Objective sense)
{
    auto sol = lp_solve(f, cost, sense);
    if (sol.status == LpStatus::kInfeasible) throw InfeasibleError("disaggregate: device flexibility set is empty");
    if (!sol.optimal()) throw NumericalError("disaggregate: pricing LP is " + to_string(sol.status));
    return sol.point;
}

bool has_column(const std::vector<Vec>& cols, const Vec& v)
{
    return std::any_of(cols.begin(), cols.end(), [&](const Vec& c) {
        for (std::size_t t = 0; t < v.size(); ++t)
            if (std::abs(c[t] - v[t]) > 1e-12 * std::max(1.0, std::abs(v[t]))) return false;
        return true;
    });
}

}  // namespace

// Dantzig-Wolfe master: convexity row per device, coupling row per period with slack pair,
// minimize total slack. Columns come from per-device pricing LPs over F_i.
Disaggregation disaggregate(std::span<const TransformedDevice> devices, std::span<const double> target,
                            const DisaggregateOptions& opts)
{
    const std::size_t N = devices.size();
    if (N == 0) throw std::invalid_argument("disaggregate: empty population");
    const std::size_t T = target.size();
    for (const auto& d : devices)
        if (d.horizon() != T) throw std::invalid_argument("disaggregate: target length does not match horizon");
    if (!opts.seed_columns.empty() && opts.seed_columns.size() != N)
        throw std::invalid_argument("disaggregate: seed columns must be given per device");

    std::vector<HRep> polys(N);
    std::vector<std::vector<Vec>> cols(N);
    parallel_for(N, opts.jobs, [&](std::size_t i) {
        polys[i] = flexibility_halfspaces(devices[i]);
        if (!opts.seed_columns.empty())
            for (const auto& v : opts.seed_columns[i])
                if (v.size() == T && contains_point(polys[i], v, 1e-7) && !has_column(cols[i], v)) cols[i].push_back(v);
        if (cols[i].empty())
        {
            const Vec ones(T, 1.0);
            cols[i].push_back(lp_vertex(polys[i], ones, Objective::kMaximize));
            Vec lo = lp_vertex(polys[i], ones, Objective::kMinimize);
            if (!has_column(cols[i], lo)) cols[i].push_back(std::move(lo));
        }
    });

    Disaggregation out;
    Vec weights;
    for (int round = 1; round <= opts.max_rounds; ++round)
    {
        out.rounds = round;
        std::size_t n_cols = 0;
        for (const auto& c : cols) n_cols += c.size();
        const std::size_t dim = n_cols + 2 * T;

        HRep master(dim);
        Vec row(dim);
        std::size_t offset = 0;
        for (std::size_t i = 0; i < N; ++i)
        {
            std::fill(row.begin(), row.end(), 0.0);
            for (std::size_t k = 0; k < cols[i].size(); ++k) row[offset + k] = 1.0;
            master.add_eq(row, 1.0);
            offset += cols[i].size();
        }
        for (std::size_t t = 0; t < T; ++t)
        {
            std::fill(row.begin(), row.end(), 0.0);
            std::size_t j = 0;
            for (const auto& ci : cols)
                for (const auto& v : ci) row[j++] = v[t];
            row[n_cols + t] = 1.0;
            row[n_cols + T + t] = -1.0;
            master.add_eq(row, target[t]);
        }
        for (std::size_t j = 0; j < dim; ++j)
        {
            std::fill(row.begin(), row.end(), 0.0);
            row[j] = 1.0;
            master.add_ge(row, 0.0);
        }
        Vec objective(dim, 0.0);
        std::fill(objective.begin() + static_cast<std::ptrdiff_t>(n_cols), objective.end(), 1.0);

        const auto sol = lp_solve(master, objective, Objective::kMinimize);
        if (!sol.optimal()) throw NumericalError("disaggregate: master LP is " + to_string(sol.status));
        weights.assign(sol.point.begin(), sol.point.begin() + static_cast<std::ptrdiff_t>(n_cols));

        // current profiles and residual
        out.profiles.assign(N, Vec(T, 0.0));
        std::size_t j = 0;
        for (std::size_t i = 0; i < N; ++i)
            for (const auto& v : cols[i])
            {
                const double w = std::max(weights[j++], 0.0);
                for (std::size_t t = 0; t < T; ++t) out.profiles[i][t] += w * v[t];
            }
        out.residual = 0.0;
        for (std::size_t t = 0; t < T; ++t)
        {
            double s = 0.0;
            for (const auto& u : out.profiles) s += u[t];
            out.residual = std::max(out.residual, std::abs(s - target[t]));
        }
        if (out.residual <= opts.tol)
        {
            out.feasible = true;
            return out;
        }

        const Vec pi(sol.duals.begin() + static_cast<std::ptrdiff_t>(N),
                     sol.duals.begin() + static_cast<std::ptrdiff_t>(N + T));
        std::vector<Vec> candidates(N);
        std::vector<char> improving(N, 0);
        parallel_for(N, opts.jobs, [&](std::size_t i) {
            candidates[i] = lp_vertex(polys[i], pi, Objective::kMaximize);
            const double reduced = dot(pi, candidates[i]) + sol.duals[i];
            improving[i] = reduced > 1e-9 * std::max(1.0, std::abs(sol.duals[i])) && !has_column(cols[i], candidates[i]);
        });
        bool added = false;
        for (std::size_t i = 0; i < N; ++i)
            if (improving[i])
            {
                cols[i].push_back(std::move(candidates[i]));
                added = true;
            }
        if (!added) return out;  // master optimum with positive slack: target unreachable
    }
    return out;
}

Disaggregation disaggregate(const Population& pop, std::span<const double> target, const DisaggregateOptions& opts)
{
    const auto devs = pop.devices();
    return disaggregate(devs, target, opts);
}

}  // namespace flexsum
