#include "hshock/health_state.hpp"
#include "hshock/errors.hpp"

#include <cmath>

namespace hshock {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidConfiguration: return "invalid-configuration";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::EmptyCohort: return "empty-cohort";
    case ErrorKind::Unavailable: return "unavailable";
    case ErrorKind::DegenerateFit: return "degenerate-fit";
    case ErrorKind::HorizonOutOfRange: return "horizon-out-of-range";
    }
    return "unknown";
}

std::string_view to_string(HealthState s) noexcept {
    static constexpr std::array<std::string_view, kStateCount> names{"Q1", "Q2", "Q3", "Q4", "Q5"};
    return names[static_cast<std::size_t>(index_of(s))];
}

std::optional<HealthState> parse_state(std::string_view text) noexcept {
    if (text.size() == 2 && (text[0] == 'Q' || text[0] == 'q'))
        text.remove_prefix(1);
    if (text.size() == 1 && text[0] >= '1' && text[0] <= '5')
        return state_at(text[0] - '1');
    return std::nullopt;
}

std::string StateSet::label() const {
    if (*this == all())
        return "ALL";
    std::string out;
    for (auto s : kAllStates) {
        if (!contains(s))
            continue;
        if (!out.empty())
            out += '|';
        out += to_string(s);
    }
    return out;
}

std::optional<StateSet> StateSet::parse(std::string_view text) {
    if (text == "ALL" || text == "all")
        return all();
    StateSet set;
    while (!text.empty()) {
        auto cut = text.find_first_of("|,+");
        auto token = text.substr(0, cut);
        auto state = parse_state(token);
        if (!state)
            return std::nullopt;
        set.insert(*state);
        if (cut == std::string_view::npos)
            break;
        text.remove_prefix(cut + 1);
    }
    if (set.empty())
        return std::nullopt;
    return set;
}

StateThresholds::StateThresholds() : upper_{7'800, 24'000, 54'000, 266'999} {}

StateThresholds::StateThresholds(std::array<Yen, kStateCount - 1> upper_bounds)
    : upper_(upper_bounds) {
    if (upper_[0] < 0)
        throw Error(ErrorKind::InvalidConfiguration, "state thresholds must be non-negative");
    for (std::size_t k = 1; k < upper_.size(); ++k) {
        if (upper_[k] <= upper_[k - 1])
            throw Error(ErrorKind::InvalidConfiguration,
                        "state thresholds must be strictly increasing");
    }
}

Yen StateThresholds::lower_bound(HealthState s) const noexcept {
    const int i = index_of(s);
    return i == 0 ? 0 : upper_[static_cast<std::size_t>(i - 1)] + 1;
}

std::optional<Yen> StateThresholds::upper_bound(HealthState s) const noexcept {
    const int i = index_of(s);
    if (i == kStateCount - 1)
        return std::nullopt;
    return upper_[static_cast<std::size_t>(i)];
}

HealthState classify_cost(Yen annual_cost, const StateThresholds &thresholds) {
    if (annual_cost < 0)
        throw Error(ErrorKind::InvalidInput,
                    "annual cost must be non-negative, got " + std::to_string(annual_cost));
    const auto &upper = thresholds.upper_bounds();
    for (std::size_t k = 0; k < upper.size(); ++k) {
        if (annual_cost <= upper[k])
            return state_at(static_cast<int>(k));
    }
    return HealthState::Q5;
}

HealthState classify_cost(double annual_cost, const StateThresholds &thresholds) {
    if (!std::isfinite(annual_cost) || annual_cost < 0.0)
        throw Error(ErrorKind::InvalidInput, "annual cost must be finite and non-negative");
    // Intervals are integer-yen; a fractional cost belongs to the interval
    // whose upper bound it does not exceed.
    const auto &upper = thresholds.upper_bounds();
    for (std::size_t k = 0; k < upper.size(); ++k) {
        if (annual_cost <= static_cast<double>(upper[k]))
            return state_at(static_cast<int>(k));
    }
    return HealthState::Q5;
}

double representative_cost(HealthState state, double q5_value, const StateThresholds &thresholds) {
    const auto q5_floor = static_cast<double>(thresholds.lower_bound(HealthState::Q5));
    if (!std::isfinite(q5_value) || q5_value < q5_floor)
        throw Error(ErrorKind::InvalidConfiguration,
                    "Q5 representative cost must be at least the Q5 lower bound");
    if (state == HealthState::Q5)
        return q5_value;
    const auto lo = static_cast<double>(thresholds.lower_bound(state));
    const auto hi = static_cast<double>(*thresholds.upper_bound(state));
    return (lo + hi) / 2.0;
}

CostVector CostVector::from_thresholds(double q5_value, const StateThresholds &thresholds) {
    std::array<double, kStateCount> values{};
    for (auto s : kAllStates)
        values[static_cast<std::size_t>(index_of(s))] = representative_cost(s, q5_value, thresholds);
    return CostVector(values);
}

CostVector::CostVector(std::array<double, kStateCount> values) : values_(values) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || values_[i] < 0.0)
            throw Error(ErrorKind::InvalidConfiguration, "costs must be finite and non-negative");
        if (i > 0 && values_[i] <= 0.0)
            throw Error(ErrorKind::InvalidConfiguration, "costs for Q2..Q5 must be positive");
        if (i > 0 && values_[i] < values_[i - 1])
            throw Error(ErrorKind::InvalidConfiguration, "costs must be non-decreasing across states");
    }
}

CostVector CostVector::scaled(double factor) const {
    auto v = values_;
    for (auto &x : v)
        x *= factor;
    return CostVector(v);
}

} // namespace hshock
