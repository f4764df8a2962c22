#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexsum
{

/// Subset of the period set {1..T}, T <= 64, stored as a bitmask (bit t-1 <-> period t).
class Subset
{
  public:
    static constexpr std::size_t kMaxHorizon = 64;

    constexpr Subset() = default;
    constexpr explicit Subset(std::uint64_t bits) : bits_(bits) {}

    /// {1..t}
    static constexpr Subset prefix(std::size_t t)
    {
        return Subset(t >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << t) - 1));
    }
    static constexpr Subset full(std::size_t horizon) { return prefix(horizon); }
    static Subset of(std::initializer_list<std::size_t> periods)
    {
        Subset s;
        for (auto t : periods) s.insert(t);
        return s;
    }

    constexpr std::uint64_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

    // periods are 1-based
    constexpr bool contains(std::size_t t) const { return (bits_ >> (t - 1)) & 1U; }
    constexpr void insert(std::size_t t) { bits_ |= std::uint64_t{1} << (t - 1); }
    constexpr void erase(std::size_t t) { bits_ &= ~(std::uint64_t{1} << (t - 1)); }

    constexpr Subset operator&(Subset o) const { return Subset(bits_ & o.bits_); }
    constexpr Subset operator|(Subset o) const { return Subset(bits_ | o.bits_); }
    constexpr Subset operator-(Subset o) const { return Subset(bits_ & ~o.bits_); }
    constexpr bool operator==(const Subset&) const = default;

    constexpr bool is_subset_of(Subset o) const { return (bits_ & ~o.bits_) == 0; }

    std::vector<std::size_t> periods() const
    {
        std::vector<std::size_t> out;
        for (std::uint64_t b = bits_; b != 0; b &= b - 1)
            out.push_back(static_cast<std::size_t>(std::countr_zero(b)) + 1);
        return out;
    }

    /// 0/1 indicator vector of length horizon.
    std::vector<double> indicator(std::size_t horizon) const
    {
        std::vector<double> v(horizon, 0.0);
        for (std::size_t t = 1; t <= horizon; ++t)
            if (contains(t)) v[t - 1] = 1.0;
        return v;
    }

    std::string to_string() const
    {
        std::string s = "{";
        bool first = true;
        for (auto t : periods())
        {
            if (!first) s += ",";
            s += std::to_string(t);
            first = false;
        }
        return s + "}";
    }

  private:
    std::uint64_t bits_ = 0;
};

inline void check_horizon(std::size_t horizon)
{
    if (horizon == 0 || horizon > Subset::kMaxHorizon)
        throw std::invalid_argument("horizon must lie in [1, 64], got " + std::to_string(horizon));
}

}  // namespace flexsum
