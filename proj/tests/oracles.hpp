#pragma once

// Test-only reference implementations that avoid the code paths under test.

#include <cstdint>
#include <vector>

#include "flexsum/aggregate.hpp"
#include "flexsum/polytope.hpp"

namespace oracle
{

using flexsum::HRep;
using flexsum::Vec;

// T=2, a=0.7, u in [0,1], cumulative state in [0.3, 1.3], x0 = 0.
flexsum::TransformedDevice worked_instance();

// max dir.u over the enumerated vertices (dim <= 8).
double vertex_support(const HRep& poly, const Vec& dir);

// Random device with a small horizon from the default sampler ranges.
flexsum::Population small_population(std::size_t n, std::size_t horizon, std::uint64_t seed);

// Euclidean projection onto the intersection of the rows of `poly` (Dykstra over halfspaces).
Vec project(const HRep& poly, const Vec& point, int sweeps = 4000);

// min ||sum_i u_i - g||^2 over u_i in polys[i] by projected gradient on the stacked variables.
// Returns the optimal objective ||sum_i u_i - g||_2.
double stacked_tracking(const std::vector<HRep>& polys, const Vec& g, int iterations = 3000);

}  // namespace oracle
