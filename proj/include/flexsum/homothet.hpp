#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "flexsum/common.hpp"
#include "flexsum/model.hpp"
#include "flexsum/polytope.hpp"

namespace flexsum
{

/// Prototype polytope shared by homothets of one horizon.
struct Prototype
{
    HRep hrep;
    // Set for the unit lossless battery, whose supports have a closed form.
    bool unit_battery = false;

    std::size_t horizon() const { return hrep.dim(); }
    bool operator==(const Prototype&) const = default;
};

/// Unit lossless battery: u in [0, 1]^T, prefix sums in [0, t].
std::shared_ptr<const Prototype> prototype(std::size_t horizon);

double prototype_support(const Prototype& proto, std::span<const double> direction);
Vec prototype_argmax(const Prototype& proto, std::span<const double> direction);

/// scale * P + translation.
struct Homothet
{
    int device_id = 0;
    double scale = 0.0;
    Vec translation;
    std::shared_ptr<const Prototype> shape;

    std::size_t horizon() const { return translation.size(); }
};

/// Largest scale s with some translation t such that s P + t lies inside F. One LP in (s, t).
Homothet fit_homothet(const TransformedDevice& dev, int device_id = 0,
                      std::shared_ptr<const Prototype> proto = nullptr);

/// Minkowski sum of homothets of a common prototype. Throws std::invalid_argument on mismatch.
Homothet aggregate_homothets(std::span<const Homothet> fits);

/// Halfspaces of the homothet; a zero scale yields T equality rows.
HRep homothet_hrep(const Homothet& h);

double support(const Homothet& h, std::span<const double> direction);
Vec argmax(const Homothet& h, std::span<const double> direction);

}  // namespace flexsum
