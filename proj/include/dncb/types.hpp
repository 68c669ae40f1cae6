#ifndef DNCB_TYPES_HPP
#define DNCB_TYPES_HPP

#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dncb
{

/// Arm index, 0-based.
using Arm = int;
/// Agent rank under serial dictatorship, 1-based (rank 1 wins every conflict).
using Rank = int;
/// Round index, 1-based. t = 0 is reserved for initialization.
using Time = std::int64_t;

inline constexpr int kMaxArms = 32;
inline constexpr Time kNoExpiry = std::numeric_limits<Time>::max();

/// Set of arm indices backed by a bitmask. Iteration is in ascending arm order.
class ArmSet
{
public:
    constexpr ArmSet() = default;
    constexpr explicit ArmSet(std::uint32_t mask) : mask_(mask) {}

    static constexpr ArmSet all(int n_arms)
    {
        return ArmSet(n_arms >= 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << n_arms) - 1));
    }
    static constexpr ArmSet single(Arm a) { return ArmSet(std::uint32_t{1} << a); }

    constexpr std::uint32_t mask() const { return mask_; }
    constexpr bool contains(Arm a) const { return (mask_ >> a) & 1u; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr int size() const { return std::popcount(mask_); }

    constexpr void insert(Arm a) { mask_ |= std::uint32_t{1} << a; }
    constexpr void erase(Arm a) { mask_ &= ~(std::uint32_t{1} << a); }

    constexpr ArmSet operator|(ArmSet o) const { return ArmSet(mask_ | o.mask_); }
    constexpr ArmSet operator&(ArmSet o) const { return ArmSet(mask_ & o.mask_); }
    constexpr ArmSet minus(ArmSet o) const { return ArmSet(mask_ & ~o.mask_); }
    constexpr bool is_subset_of(ArmSet o) const { return (mask_ & ~o.mask_) == 0; }
    constexpr bool operator==(const ArmSet&) const = default;
    constexpr auto operator<=>(const ArmSet&) const = default;

    /// Arms in ascending order.
    std::vector<Arm> to_vector() const
    {
        std::vector<Arm> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (std::uint32_t m = mask_; m != 0; m &= m - 1)
            out.push_back(std::countr_zero(m));
        return out;
    }

    /// The i-th smallest arm of the set (0-based); i must be < size().
    Arm nth(int i) const
    {
        std::uint32_t m = mask_;
        for (; i > 0; --i)
            m &= m - 1;
        return std::countr_zero(m);
    }

private:
    std::uint32_t mask_ = 0;
};

/// Invalid configuration; `field` carries a dotted path when known.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(field)
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Violation of the decentralized protocol (impossible under a correct comm layer).
class ProtocolError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

} // namespace dncb

#endif // DNCB_TYPES_HPP
