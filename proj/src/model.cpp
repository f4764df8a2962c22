#include "flexsum/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "flexsum/subset.hpp"

namespace flexsum
{

namespace
{

void require(bool cond, const char* what)
{
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

void TclParams::validate() const
{
    require(std::isfinite(a) && std::isfinite(b) && std::isfinite(theta_a) && std::isfinite(theta_r) &&
                std::isfinite(delta) && std::isfinite(p_max) && std::isfinite(theta_0),
            "TclParams: parameters must be finite");
    require(a >= 0.0 && a < 1.0, "TclParams: retention factor a must lie in [0, 1)");
    require(b > 0.0, "TclParams: thermal gain b must be positive");
    require(delta > 0.0, "TclParams: dead-band width must be positive");
    require(p_max > 0.0, "TclParams: power rating must be positive");
    require(theta_0 >= band_low() && theta_0 <= band_high(), "TclParams: initial temperature outside the dead-band");
}

TransformedDevice TransformedDevice::from_state_bounds(double a, double u_min, double u_max, double x0,
                                                       double x_min, double x_max, std::size_t horizon)
{
    TransformedDevice dev;
    dev.a = a;
    dev.u_min = u_min;
    dev.u_max = u_max;
    dev.x0 = x0;
    dev.x_min = x_min;
    dev.x_max = x_max;
    dev.x_lb.resize(horizon);
    dev.x_ub.resize(horizon);
    double decay = 1.0;
    for (std::size_t t = 1; t <= horizon; ++t)
    {
        decay *= a;
        dev.x_lb[t - 1] = x_min - decay * x0;
        dev.x_ub[t - 1] = x_max - decay * x0;
    }
    dev.validate();
    return dev;
}

TransformedDevice TransformedDevice::prefix(std::size_t t) const
{
    if (t == 0 || t > horizon()) throw std::invalid_argument("TransformedDevice::prefix: bad length");
    TransformedDevice dev = *this;
    dev.x_lb.resize(t);
    dev.x_ub.resize(t);
    return dev;
}

void TransformedDevice::validate() const
{
    check_horizon(horizon());
    require(x_ub.size() == x_lb.size(), "TransformedDevice: bound vectors differ in length");
    require(a >= 0.0 && a <= 1.0, "TransformedDevice: a must lie in [0, 1]");
    require(u_min <= u_max, "TransformedDevice: u_min > u_max");
    for (std::size_t t = 0; t < horizon(); ++t)
        require(x_lb[t] <= x_ub[t], "TransformedDevice: x_lb(t) > x_ub(t)");
}

TransformedDevice transform(const TclParams& params, std::size_t horizon)
{
    params.validate();
    if (horizon == 0) throw std::invalid_argument("transform: empty horizon");
    const double scale = (1.0 - params.a) * params.b;
    const double x0 = (params.theta_a - params.theta_0) / scale;
    const double x_min = (params.theta_a - params.band_high()) / scale;
    const double x_max = (params.theta_a - params.band_low()) / scale;
    return TransformedDevice::from_state_bounds(params.a, 0.0, params.p_max, x0, x_min, x_max, horizon);
}

Vec simulate_temperature(const TclParams& params, std::span<const double> power, double power_tol)
{
    params.validate();
    Vec theta(power.size());
    double prev = params.theta_0;
    for (std::size_t t = 0; t < power.size(); ++t)
    {
        if (power[t] < -power_tol || power[t] > params.p_max + power_tol)
        {
            std::ostringstream os;
            os << "simulate_temperature: p(" << t + 1 << ") = " << power[t] << " outside [0, " << params.p_max << "]";
            throw std::invalid_argument(os.str());
        }
        prev = params.a * prev + (1.0 - params.a) * (params.theta_a - params.b * power[t]);
        theta[t] = prev;
    }
    return theta;
}

Vec discount_weights(double a, std::size_t t, std::size_t horizon)
{
    Vec w(horizon, 0.0);
    double f = 1.0;
    for (std::size_t s = t; s >= 1; --s)
    {
        w[s - 1] = f;
        f *= a;
    }
    return w;
}

Vec discounted_sums(double a, std::span<const double> u)
{
    Vec out(u.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t)
    {
        acc = a * acc + u[t];
        out[t] = acc;
    }
    return out;
}

HRep flexibility_halfspaces(const TransformedDevice& dev)
{
    dev.validate();
    const std::size_t T = dev.horizon();
    HRep h(T);
    for (std::size_t t = 1; t <= T; ++t)
    {
        Vec e(T, 0.0);
        e[t - 1] = 1.0;
        h.add_ge(std::move(e), dev.u_min);
    }
    for (std::size_t t = 1; t <= T; ++t)
    {
        Vec e(T, 0.0);
        e[t - 1] = 1.0;
        h.add_le(std::move(e), dev.u_max);
    }
    for (std::size_t t = 1; t <= T; ++t) h.add_ge(discount_weights(dev.a, t, T), dev.x_lb[t - 1]);
    for (std::size_t t = 1; t <= T; ++t) h.add_le(discount_weights(dev.a, t, T), dev.x_ub[t - 1]);
    return h;
}

}  // namespace flexsum
