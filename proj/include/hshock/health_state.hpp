#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace hshock {

using Yen = std::int64_t;

inline constexpr int kStateCount = 5;

/// Health state derived from annual medical cost. Q1 is the cheapest (best
/// health) and Q5 the most expensive (poorest health).
enum class HealthState : std::uint8_t { Q1 = 0, Q2, Q3, Q4, Q5 };

inline constexpr std::array<HealthState, kStateCount> kAllStates{
    HealthState::Q1, HealthState::Q2, HealthState::Q3, HealthState::Q4, HealthState::Q5};

constexpr int index_of(HealthState s) noexcept { return static_cast<int>(s); }

constexpr HealthState state_at(int index) noexcept { return static_cast<HealthState>(index); }

std::string_view to_string(HealthState s) noexcept;

/// Parses "Q1".."Q5" (also accepts "1".."5").
std::optional<HealthState> parse_state(std::string_view text) noexcept;

/// Small bitset over the five states, used for conditioning and target sets.
class StateSet {
public:
    constexpr StateSet() = default;
    constexpr StateSet(std::initializer_list<HealthState> states) {
        for (auto s : states)
            bits_ |= bit(s);
    }

    static constexpr StateSet all() {
        StateSet s;
        s.bits_ = 0x1f;
        return s;
    }

    constexpr bool contains(HealthState s) const noexcept { return (bits_ & bit(s)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr int size() const noexcept { return __builtin_popcount(bits_); }
    constexpr void insert(HealthState s) noexcept { bits_ |= bit(s); }

    constexpr bool operator==(const StateSet &) const = default;

    /// "Q4|Q5" style label; "ALL" for the full set.
    std::string label() const;

    /// Inverse of label(); also accepts "Q4,Q5" and "Q4+Q5".
    static std::optional<StateSet> parse(std::string_view text);

private:
    static constexpr std::uint8_t bit(HealthState s) noexcept {
        return static_cast<std::uint8_t>(1u << index_of(s));
    }
    std::uint8_t bits_ = 0;
};

/// Upper bounds (inclusive, integer yen) of Q1..Q4. Q5 is everything above
/// the last bound.
class StateThresholds {
public:
    /// 7,800 / 24,000 / 54,000 / 266,999.
    StateThresholds();

    /// Throws InvalidConfiguration unless strictly increasing and non-negative.
    explicit StateThresholds(std::array<Yen, kStateCount - 1> upper_bounds);

    const std::array<Yen, kStateCount - 1> &upper_bounds() const noexcept { return upper_; }

    /// Smallest cost that classifies into `s`.
    Yen lower_bound(HealthState s) const noexcept;

    /// Largest cost that classifies into `s`; empty for Q5.
    std::optional<Yen> upper_bound(HealthState s) const noexcept;

    bool operator==(const StateThresholds &) const = default;

private:
    std::array<Yen, kStateCount - 1> upper_;
};

/// Throws InvalidInput for negative costs.
HealthState classify_cost(Yen annual_cost, const StateThresholds &thresholds);

/// Throws InvalidInput for negative or non-finite costs.
HealthState classify_cost(double annual_cost, const StateThresholds &thresholds);

/// Q1..Q4 map to their interval midpoint; Q5 maps to `q5_value`, which may not
/// be below the Q5 lower bound.
double representative_cost(HealthState state, double q5_value, const StateThresholds &thresholds);

/// Annual cost assigned to each state when projecting expected costs.
class CostVector {
public:
    /// Midpoints for Q1..Q4 and `q5_value` for Q5.
    static CostVector from_thresholds(double q5_value,
                                      const StateThresholds &thresholds = StateThresholds{});

    /// Throws InvalidConfiguration if any of Q2..Q5 is not positive or the
    /// values decrease.
    explicit CostVector(std::array<double, kStateCount> values);

    double operator[](HealthState s) const noexcept { return values_[index_of(s)]; }
    double operator[](int i) const noexcept { return values_[static_cast<std::size_t>(i)]; }
    const std::array<double, kStateCount> &values() const noexcept { return values_; }

    CostVector scaled(double factor) const;

private:
    std::array<double, kStateCount> values_;
};

} // namespace hshock
