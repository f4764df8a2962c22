#include "flexsum/homothet.hpp"

#include <algorithm>
#include <sstream>

#include "flexsum/subset.hpp"

namespace flexsum
{

std::shared_ptr<const Prototype> prototype(std::size_t horizon)
{
    check_horizon(horizon);
    auto proto = std::make_shared<Prototype>();
    proto->hrep = HRep(horizon);
    for (std::size_t t = 1; t <= horizon; ++t) proto->hrep.add_ge(Subset::of({t}).indicator(horizon), 0.0);
    for (std::size_t t = 1; t <= horizon; ++t) proto->hrep.add_le(Subset::of({t}).indicator(horizon), 1.0);
    for (std::size_t t = 1; t <= horizon; ++t) proto->hrep.add_ge(Subset::prefix(t).indicator(horizon), 0.0);
    for (std::size_t t = 1; t <= horizon; ++t)
        proto->hrep.add_le(Subset::prefix(t).indicator(horizon), static_cast<double>(t));
    proto->unit_battery = true;
    return proto;
}

double prototype_support(const Prototype& proto, std::span<const double> direction)
{
    if (direction.size() != proto.horizon())
        throw std::invalid_argument("prototype_support: direction length does not match horizon");
    if (!proto.unit_battery) return support(proto.hrep, direction);
    // prefix rows are implied by the unit box
    double acc = 0.0;
    for (double c : direction) acc += std::max(c, 0.0);
    return acc;
}

Vec prototype_argmax(const Prototype& proto, std::span<const double> direction)
{
    if (direction.size() != proto.horizon())
        throw std::invalid_argument("prototype_argmax: direction length does not match horizon");
    if (!proto.unit_battery)
    {
        auto sol = lp_solve(proto.hrep, direction, Objective::kMaximize);
        if (!sol.optimal()) throw NumericalError("prototype_argmax: LP is " + to_string(sol.status));
        return sol.point;
    }
    Vec u(direction.size());
    std::transform(direction.begin(), direction.end(), u.begin(), [](double c) { return c > 0.0 ? 1.0 : 0.0; });
    return u;
}

Homothet fit_homothet(const TransformedDevice& dev, int device_id, std::shared_ptr<const Prototype> proto)
{
    dev.validate();
    const std::size_t T = dev.horizon();
    if (!proto) proto = prototype(T);
    if (proto->horizon() != T) throw std::invalid_argument("fit_homothet: prototype horizon mismatch");

    // variables (s, t_1..t_T)
    const HRep f = flexibility_halfspaces(dev);
    HRep lp(T + 1);
    Vec row(T + 1);
    Vec neg(T);
    for (const auto& h : f.rows())
    {
        std::copy(h.normal.begin(), h.normal.end(), row.begin() + 1);
        if (h.sense != Sense::kGreaterEqual)
        {
            row[0] = prototype_support(*proto, h.normal);
            lp.add_le(row, h.bound);
        }
        if (h.sense != Sense::kLessEqual)
        {
            std::transform(h.normal.begin(), h.normal.end(), neg.begin(), [](double v) { return -v; });
            row[0] = -prototype_support(*proto, neg);
            lp.add_ge(row, h.bound);
        }
    }
    Vec s_row(T + 1, 0.0);
    s_row[0] = 1.0;
    lp.add_ge(s_row, 0.0);

    const auto sol = lp_solve(lp, s_row, Objective::kMaximize);
    if (sol.status == LpStatus::kInfeasible)
        throw InfeasibleError("fit_homothet: device " + std::to_string(device_id) + " has an empty flexibility set");
    if (!sol.optimal()) throw NumericalError("fit_homothet: LP is " + to_string(sol.status));

    Homothet h;
    h.device_id = device_id;
    h.scale = std::max(sol.point[0], 0.0);
    h.translation.assign(sol.point.begin() + 1, sol.point.end());
    h.shape = std::move(proto);
    return h;
}

Homothet aggregate_homothets(std::span<const Homothet> fits)
{
    if (fits.empty()) throw std::invalid_argument("aggregate_homothets: empty list");
    Homothet out;
    out.device_id = -1;
    out.shape = fits.front().shape;
    out.translation.assign(fits.front().horizon(), 0.0);
    for (const auto& h : fits)
    {
        if (!h.shape || !out.shape || (h.shape != out.shape && !(*h.shape == *out.shape)))
        {
            std::ostringstream os;
            os << "aggregate_homothets: device " << h.device_id << " uses a different prototype";
            throw std::invalid_argument(os.str());
        }
        out.scale += h.scale;
        for (std::size_t t = 0; t < out.translation.size(); ++t) out.translation[t] += h.translation[t];
    }
    return out;
}

HRep homothet_hrep(const Homothet& h)
{
    const std::size_t T = h.horizon();
    HRep out(T);
    if (h.scale <= 0.0)
    {
        for (std::size_t t = 1; t <= T; ++t) out.add_eq(Subset::of({t}).indicator(T), h.translation[t - 1]);
        return out;
    }
    for (const auto& row : h.shape->hrep.rows())
        out.add(row.normal, row.sense, h.scale * row.bound + dot(row.normal, h.translation));
    return out;
}

double support(const Homothet& h, std::span<const double> direction)
{
    return h.scale * prototype_support(*h.shape, direction) + dot(direction, h.translation);
}

Vec argmax(const Homothet& h, std::span<const double> direction)
{
    Vec u = prototype_argmax(*h.shape, direction);
    for (std::size_t t = 0; t < u.size(); ++t) u[t] = h.scale * u[t] + h.translation[t];
    return u;
}

}  // namespace flexsum
