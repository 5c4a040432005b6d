#pragma once

#include "hshock/health_state.hpp"
#include "hshock/panel.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hshock {

using Matrix5 = Eigen::Matrix<double, kStateCount, kStateCount>;
using Vector5 = Eigen::Matrix<double, kStateCount, 1>;

/// Inclusive age range. A single age has lo == hi.
struct AgeGroup {
    int lo = 0;
    int hi = 0;

    static AgeGroup single(int age) { return {age, age}; }
    bool contains(int age) const noexcept { return age >= lo && age <= hi; }
    std::string label() const;
    bool operator==(const AgeGroup &) const = default;
};

/// The 5-year bin (0-4, 5-9, ...) containing `age`.
AgeGroup five_year_group(int age);

/// 5-year bins that intersect [lo, hi].
std::vector<AgeGroup> five_year_groups(int lo, int hi);

/// Cells whose conditioning count is below this are flagged low-support.
inline constexpr std::int64_t kDefaultMinCellCount = 30;

struct StateFractions {
    AgeGroup group;
    std::array<std::int64_t, kStateCount> counts{};
    std::int64_t total = 0;
    std::array<double, kStateCount> fractions{};
};

/// Share of observed person-years in each state for ages in `group`. Throws
/// EmptyCohort when no person-year falls in the group.
StateFractions state_fractions(const Panel &panel, AgeGroup group);

/// Order-one transition estimate: rows are the state at t-1, columns the
/// state at t. Rows without support are unavailable and hold zeros.
struct TransitionMatrix {
    AgeGroup ages;
    Matrix5 probs = Matrix5::Zero();
    std::array<std::array<std::int64_t, kStateCount>, kStateCount> counts{};
    std::array<bool, kStateCount> available{};

    /// Rows with positive support are normalized counts.
    static TransitionMatrix from_counts(AgeGroup ages,
                                        const std::array<std::array<std::int64_t, kStateCount>, kStateCount> &counts);

    /// Known probabilities (every row available, counts zero). Throws
    /// InvalidArgument unless every row is a probability vector.
    static TransitionMatrix from_probabilities(AgeGroup ages, const Matrix5 &probs);

    std::int64_t row_count(HealthState from) const noexcept;
    bool low_support(HealthState from, std::int64_t min_count = kDefaultMinCellCount) const noexcept {
        return row_count(from) < min_count;
    }
    double operator()(HealthState from, HealthState to) const noexcept {
        return probs(index_of(from), index_of(to));
    }
};

/// Order-two transition estimate p(next | past, current), with `past` the
/// state at t-2, `current` the state at t-1 and `next` the state at t.
struct TransitionTensor {
    AgeGroup ages;
    std::array<double, 125> probs{};
    std::array<std::int64_t, 125> counts{};
    std::array<bool, 25> available{};

    static constexpr std::size_t index(int past, int current, int next) noexcept {
        return static_cast<std::size_t>((past * kStateCount + current) * kStateCount + next);
    }
    static constexpr std::size_t slice(int past, int current) noexcept {
        return static_cast<std::size_t>(past * kStateCount + current);
    }

    static TransitionTensor from_counts(AgeGroup ages, const std::array<std::int64_t, 125> &counts);

    /// Known probabilities; slices flagged unavailable in `available` are
    /// ignored (and zeroed). Throws InvalidArgument unless every available
    /// slice is a probability vector.
    static TransitionTensor from_probabilities(AgeGroup ages, const std::array<double, 125> &probs,
                                               std::optional<std::array<bool, 25>> available = std::nullopt);

    double operator()(HealthState past, HealthState current, HealthState next) const noexcept {
        return probs[index(index_of(past), index_of(current), index_of(next))];
    }
    bool slice_available(HealthState past, HealthState current) const noexcept {
        return available[slice(index_of(past), index_of(current))];
    }
    std::int64_t slice_count(HealthState past, HealthState current) const noexcept;
    bool low_support(HealthState past, HealthState current,
                     std::int64_t min_count = kDefaultMinCellCount) const noexcept {
        return slice_count(past, current) < min_count;
    }

    /// Sums counts over the t-2 state, giving the order-one counts of the
    /// same (t-1, t) pairs.
    std::array<std::array<std::int64_t, kStateCount>, kStateCount> marginal_counts() const noexcept;
};

/// Transitions into age t in `ages` from observed t-1 to observed t, counts
/// pooled over the group. A person missing at t is excluded. Throws
/// EmptyCohort when there is no pair.
TransitionMatrix estimate_order1(const Panel &panel, AgeGroup ages);
inline TransitionMatrix estimate_order1(const Panel &panel, int age) {
    return estimate_order1(panel, AgeGroup::single(age));
}

/// Observed triples (t-2, t-1, t) with t in `ages`. Throws EmptyCohort when
/// there is no triple.
TransitionTensor estimate_order2(const Panel &panel, AgeGroup ages);
inline TransitionTensor estimate_order2(const Panel &panel, int age) {
    return estimate_order2(panel, AgeGroup::single(age));
}

/// Per-age estimates for every age in `ages` that has at least one pair
/// (triple). One pass over the panel.
std::map<int, TransitionMatrix> estimate_order1_by_age(const Panel &panel, AgeGroup ages);
std::map<int, TransitionTensor> estimate_order2_by_age(const Panel &panel, AgeGroup ages);

/// Category index used by frequency curves: 0..4 for Q1..Q5 and 5 for missing.
inline constexpr int kMissingCategory = kStateCount;
inline constexpr int kCategoryCount = kStateCount + 1;

struct FrequencyPoint {
    int age = 0;
    /// Persons meeting the prior condition who have a slot at age t.
    std::int64_t conditioned = 0;
    std::array<std::int64_t, kCategoryCount> category_counts{};
    std::int64_t in_target = 0;

    double share(int category) const noexcept {
        return static_cast<double>(category_counts[static_cast<std::size_t>(category)]) /
               static_cast<double>(conditioned);
    }
    /// Target share with missing persons in the denominator.
    double target_share() const noexcept {
        return static_cast<double>(in_target) / static_cast<double>(conditioned);
    }
    /// Target share among persons observed at t; nullopt if all are missing.
    std::optional<double> target_share_observed() const noexcept;
};

struct FrequencyCurve {
    std::vector<StateSet> condition;
    StateSet target;
    std::vector<FrequencyPoint> points;
};

/// For each age t, the state distribution at t of persons whose states at
/// the preceding years match `prior_condition`, given oldest first:
/// {S} means state at t-1 in S, {R, S} means t-2 in R and t-1 in S. Missing
/// at t is its own category. Ages with nobody conditioned are omitted.
FrequencyCurve shock_frequency(const Panel &panel, std::span<const StateSet> prior_condition,
                               StateSet target, std::optional<AgeGroup> ages = std::nullopt);

struct CdfPoint {
    double log_cost = 0.0;
    double cumulative = 0.0;
};

struct CostSummary {
    AgeGroup group;
    bool available = false;
    std::int64_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::pair<double, double>> quantiles;
    /// Empirical CDF of log(cost) over positive costs; the CDF is taken over
    /// the whole sample so zero costs shift the curve up by their share.
    std::vector<CdfPoint> log_cdf;
    std::int64_t zero_costs = 0;
};

/// Linear-interpolation sample quantile (R type 7) of a sorted sample.
double sample_quantile(std::span<const double> sorted, double q);

/// Annual cost at age t in `group` of persons in `prior` at t-1, optionally
/// restricted to those in `current` at t (a transition path such as
/// Q1 -> Q5). An empty cell comes back with available == false. Throws
/// InvalidArgument for quantiles outside (0, 1).
CostSummary conditional_cost_quantiles(const Panel &panel, AgeGroup group, StateSet prior,
                                       std::optional<StateSet> current, std::span<const double> quantiles);

struct ExceedanceRow {
    AgeGroup group;
    std::int64_t n = 0;
    /// Per threshold; nullopt when the path cell is empty.
    std::vector<std::optional<double>> proportions;
};

/// Among from -> to transitions into ages in each group, the share with cost
/// at t at or above each threshold. Thresholds must lie inside the `to`
/// state's interval.
std::vector<ExceedanceRow> exceedance_proportions(const Panel &panel, HealthState from, HealthState to,
                                                  std::span<const Yen> thresholds,
                                                  std::span<const AgeGroup> groups,
                                                  const StateThresholds &state_thresholds = {});

struct PersistencePoint {
    int years_ahead = 0;
    std::int64_t survivors = 0;
    std::int64_t in_target = 0;
    std::optional<double> share;
};

struct PersistencePath {
    AgeGroup group;
    std::vector<StateSet> start_condition;
    StateSet target;
    std::int64_t starts = 0;
    std::vector<PersistencePoint> points;
};

/// Starts are (person, t) with t in `group` whose states up to t match
/// `start_condition` (oldest first, ending at t). For k = 1..horizon the
/// share in `target` at t+k is taken over starts still observed at t+k.
PersistencePath multi_year_state_frequency(const Panel &panel, AgeGroup group,
                                           std::span<const StateSet> start_condition, StateSet target,
                                           int horizon);

/// Regression design for one age: cost at t on its lags, an intercept and
/// dummies for every calendar year present except the earliest.
struct ARDesign {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<int> dummy_years;
    int base_year = 0;
};

ARDesign build_ar_design(const Panel &panel, int age, int order, bool log_transform);

struct ARFit {
    int age = 0;
    int order = 1;
    bool log_transform = false;
    bool available = false;
    std::size_t n = 0;
    double intercept = 0.0;
    double intercept_se = 0.0;
    std::vector<double> lag_coefficients;
    std::vector<double> lag_std_errors;
    int base_year = 0;
    std::vector<std::pair<int, double>> year_effects;
    double residual_variance = 0.0;
    int degrees_of_freedom = 0;

    /// Two-sided Student-t interval for lag `k` (1-based).
    std::pair<double, double> lag_interval(int k, double level = 0.95) const;
};

/// OLS of cost at `age` on `order` lags (1 or 2) plus intercept and year
/// dummies, in levels or log(1 + cost). Marked unavailable when the sample
/// has no more rows than parameters; throws DegenerateFit on a rank-deficient
/// design.
ARFit ar_regression(const Panel &panel, int age, int order, bool log_transform = false);

} // namespace hshock
