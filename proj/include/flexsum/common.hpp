#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexsum
{

using Vec = std::vector<double>;

// Global comparison tolerances shared by every oracle.
namespace tol
{
inline constexpr double kFeasibility = 1e-8;
inline constexpr double kDedup = 1e-7;
inline constexpr double kRelObjective = 1e-9;
}  // namespace tol

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// An LP or a flexibility set turned out to be empty.
class InfeasibleError : public Error
{
  public:
    explicit InfeasibleError(const std::string& what, std::size_t first_period = 0)
        : Error(what), first_period_(first_period)
    {
    }

    // 1-based period at which the constraints first became contradictory, 0 if unknown.
    std::size_t first_period() const noexcept { return first_period_; }

  private:
    std::size_t first_period_;
};

class UnboundedError : public Error
{
  public:
    using Error::Error;
};

// Solver breakdown: iteration limit, singular basis, or a solution that fails its own check.
class NumericalError : public Error
{
  public:
    using Error::Error;
};

// Version string embedded into every emitted file.
const char* version_string();

}  // namespace flexsum
