#pragma once

#include <cstddef>
#include <span>

#include "flexsum/common.hpp"
#include "flexsum/polytope.hpp"

namespace flexsum
{

/// Physical parameters of a cooling thermostatically controlled load.
struct TclParams
{
    double a = 0.0;        // retention factor per period, in [0, 1)
    double b = 0.0;        // thermal gain, degC per kW
    double theta_a = 0.0;  // ambient temperature, degC
    double theta_r = 0.0;  // set-point, degC
    double delta = 0.0;    // dead-band width, degC
    double p_max = 0.0;    // power rating, kW
    double theta_0 = 0.0;  // initial temperature, degC

    double band_low() const { return theta_r - delta / 2.0; }
    double band_high() const { return theta_r + delta / 2.0; }

    /// Throws std::invalid_argument on the first violated invariant.
    void validate() const;
};

/// Storage dynamics x(t) = a x(t-1) + u(t) with box input and cumulative state bounds.
///
/// x_lb / x_ub are the bounds on sum_{s<=t} a^{t-s} u(s), i.e. already shifted by the a^t x0
/// term; x_min / x_max are the unshifted state bounds.
struct TransformedDevice
{
    double a = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double x0 = 0.0;
    double x_min = 0.0;
    double x_max = 0.0;
    Vec x_lb;
    Vec x_ub;

    std::size_t horizon() const { return x_lb.size(); }

    /// Builds the device from unshifted state bounds (a in [0, 1] is accepted here so that the
    /// lossless battery can be expressed).
    static TransformedDevice from_state_bounds(double a, double u_min, double u_max, double x0, double x_min,
                                               double x_max, std::size_t horizon);

    /// Restriction to the first t periods.
    TransformedDevice prefix(std::size_t t) const;

    void validate() const;
};

/// Change of variables x(t) = (theta_a - theta(t)) / ((1-a) b), u(t) = p(t).
TransformedDevice transform(const TclParams& params, std::size_t horizon);

/// theta(t) = a theta(t-1) + (1-a)(theta_a - b p(t)) for t = 1..T.
/// Power values may exceed [0, p_max] by at most power_tol.
Vec simulate_temperature(const TclParams& params, std::span<const double> power, double power_tol = 1e-6);

/// Individual flexibility set: rows are box-lower, box-upper, cumulative-lower, cumulative-upper,
/// each block by ascending t.
HRep flexibility_halfspaces(const TransformedDevice& dev);

/// Discounted cumulative sums sum_{s<=t} a^{t-s} u(s), t = 1..T.
Vec discounted_sums(double a, std::span<const double> u);

/// Weight vector of the period-t cumulative row (length horizon, zeros after t).
Vec discount_weights(double a, std::size_t t, std::size_t horizon);

}  // namespace flexsum
