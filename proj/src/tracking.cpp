#include <algorithm>
#include <cmath>

#include "flexsum/aggregate.hpp"

namespace flexsum
{

namespace
{

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace

FwResult minimize_distance(const LinearOracle& lmo, std::span<const double> target, const TrackingConfig& cfg)
{
    if (cfg.max_iter < 0) throw std::invalid_argument("minimize_distance: max_iter must be >= 0");
    const std::size_t T = target.size();
    FwResult r;

    Vec c0(T, 0.0);
    if (const double n = norm2(target); n > 0.0)
        for (std::size_t t = 0; t < T; ++t) c0[t] = target[t] / n;
    r.atoms.push_back({1.0, lmo(c0), c0});
    Vec u = r.atoms.front().point;
    Vec neg_grad(T), d(T);

    for (int it = 0;; ++it)
    {
        for (std::size_t t = 0; t < T; ++t) neg_grad[t] = 2.0 * (target[t] - u[t]);
        Vec s = lmo(neg_grad);
        r.gap = std::max(0.0, dot(neg_grad, s) - dot(neg_grad, u));
        r.gap_history.push_back(r.gap);
        r.iterations = it;
        if (r.gap <= cfg.gap_tol)
        {
            r.converged = true;
            break;
        }
        if (it == cfg.max_iter) break;

        // away candidate: active atom worst for the current gradient
        std::size_t away = 0;
        double away_score = dot(neg_grad, r.atoms[0].point);
        for (std::size_t k = 1; k < r.atoms.size(); ++k)
            if (double v = dot(neg_grad, r.atoms[k].point); v < away_score)
            {
                away_score = v;
                away = k;
            }
        const double away_gap = dot(neg_grad, u) - away_score;
        const bool away_step = cfg.away_steps && r.atoms.size() > 1 && away_gap > r.gap;

        double gamma_max = 1.0;
        if (away_step)
        {
            const double w = r.atoms[away].weight;
            gamma_max = w / (1.0 - w);
            for (std::size_t t = 0; t < T; ++t) d[t] = u[t] - r.atoms[away].point[t];
        }
        else
        {
            for (std::size_t t = 0; t < T; ++t) d[t] = s[t] - u[t];
        }
        const double dd = dot(d, d);
        if (dd <= 0.0) break;
        const double gamma = std::clamp(dot(neg_grad, d) / (2.0 * dd), 0.0, gamma_max);
        for (std::size_t t = 0; t < T; ++t) u[t] += gamma * d[t];

        if (away_step)
        {
            for (auto& a : r.atoms) a.weight *= 1.0 + gamma;
            r.atoms[away].weight -= gamma;
            if (gamma >= gamma_max) r.atoms.erase(r.atoms.begin() + static_cast<std::ptrdiff_t>(away));
        }
        else if (gamma >= 1.0)
        {
            r.atoms.assign(1, FwAtom{1.0, s, neg_grad});
        }
        else
        {
            for (auto& a : r.atoms) a.weight *= 1.0 - gamma;
            auto same = std::find_if(r.atoms.begin(), r.atoms.end(), [&](const FwAtom& a) { return a.point == s; });
            if (same != r.atoms.end())
                same->weight += gamma;
            else if (gamma > 0.0)
                r.atoms.push_back({gamma, std::move(s), neg_grad});
        }
        std::erase_if(r.atoms, [](const FwAtom& a) { return a.weight <= 0.0; });
    }

    double total = 0.0;
    for (const auto& a : r.atoms) total += a.weight;
    for (auto& a : r.atoms) a.weight /= total;
    r.point.assign(T, 0.0);
    for (const auto& a : r.atoms)
        for (std::size_t t = 0; t < T; ++t) r.point[t] += a.weight * a.point[t];
    return r;
}

namespace
{

TrackingResult finish(std::string method, std::span<const double> signal, const FwResult& fw,
                      std::vector<Vec> profiles)
{
    TrackingResult r;
    r.method = std::move(method);
    r.target.assign(signal.begin(), signal.end());
    r.aggregate.assign(signal.size(), 0.0);
    for (const auto& p : profiles)
        for (std::size_t t = 0; t < signal.size(); ++t) r.aggregate[t] += p[t];
    r.profiles = std::move(profiles);
    double sq = 0.0;
    for (std::size_t t = 0; t < signal.size(); ++t) sq += (r.aggregate[t] - signal[t]) * (r.aggregate[t] - signal[t]);
    r.objective = std::sqrt(sq);
    r.rmse = std::sqrt(sq / static_cast<double>(signal.size()));
    r.gap = fw.gap;
    r.iterations = fw.iterations;
    r.converged = fw.converged;
    r.gap_history = fw.gap_history;
    return r;
}

}  // namespace

TrackingResult track_signal(const AggregateGPoly& agg, std::span<const double> signal, const TrackingConfig& cfg)
{
    if (signal.size() != agg.horizon()) throw std::invalid_argument("track_signal: signal length does not match horizon");
    const auto& f = agg.functions();
    const FwResult fw = minimize_distance([&](std::span<const double> c) { return greedy_linmax(f, c).point; },
                                          signal, cfg);

    // each atom splits into member greedy vertices along the same chain
    std::vector<Vec> profiles(agg.members().size(), Vec(signal.size(), 0.0));
    for (const auto& atom : fw.atoms)
    {
        const auto pts = greedy_member_points(agg, atom.direction);
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t t = 0; t < signal.size(); ++t) profiles[i][t] += atom.weight * pts[i][t];
    }
    return finish("gpoly", signal, fw, std::move(profiles));
}

TrackingResult track_signal_homothet(std::span<const Homothet> fits, std::span<const double> signal,
                                     const TrackingConfig& cfg)
{
    const Homothet agg = aggregate_homothets(fits);
    if (signal.size() != agg.horizon())
        throw std::invalid_argument("track_signal_homothet: signal length does not match horizon");
    const FwResult fw = minimize_distance([&](std::span<const double> c) { return argmax(agg, c); }, signal, cfg);

    const std::size_t T = signal.size();
    Vec v(T, 0.0);
    if (agg.scale > 0.0)
        for (std::size_t t = 0; t < T; ++t) v[t] = (fw.point[t] - agg.translation[t]) / agg.scale;
    std::vector<Vec> profiles;
    profiles.reserve(fits.size());
    for (const auto& h : fits)
    {
        Vec u(T);
        for (std::size_t t = 0; t < T; ++t) u[t] = h.scale * v[t] + h.translation[t];
        profiles.push_back(std::move(u));
    }
    return finish("homothet", signal, fw, std::move(profiles));
}

}  // namespace flexsum
