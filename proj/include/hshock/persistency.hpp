#pragma once

#include "hshock/estimation.hpp"
#include "hshock/lifted_chain.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace hshock {

/// Order-one matrices keyed by the age they move into.
using Order1Family = std::map<int, TransitionMatrix>;

/// What to do with a per-age cell that has no support.
enum class UnavailablePolicy {
    /// Leave it unavailable; iteration through it raises Unavailable.
    Error,
    /// Substitute the estimate pooled over the enclosing 5-year age group.
    PoolAgeGroup,
};

/// Per-age order-one estimates for every age in `ages`.
Order1Family build_order1_family(const Panel &panel, AgeGroup ages,
                                 UnavailablePolicy policy = UnavailablePolicy::Error);

/// Per-age order-two estimates for every age in `ages`.
std::map<int, TransitionTensor> build_order2_family(const Panel &panel, AgeGroup ages,
                                                    UnavailablePolicy policy = UnavailablePolicy::Error);

/// Forecast state distributions after conditioning on a start state (order
/// one) or start pair (order two). distributions[k] is the distribution at
/// start_age + k; distributions[0] is the start indicator.
struct ForecastDistribution {
    int start_age = 0;
    int model_order = 1;
    std::string conditioning;
    std::vector<Eigen::VectorXd> distributions;

    int horizon() const noexcept { return static_cast<int>(distributions.size()) - 1; }

    /// Marginal over the current state at step k.
    Vector5 state_marginal(int k) const;

    /// Probability of being in `target` at step k.
    double mass(int k, StateSet target) const;
};

/// Applies the matrices for start_age+1 .. start_age+horizon to the start
/// indicator. Throws HorizonOutOfRange naming the last valid age, and
/// Unavailable when mass reaches an unsupported row.
ForecastDistribution iterate_forward(const Order1Family &family, int start_age, HealthState start, int horizon);
ForecastDistribution iterate_forward(const LiftedFamily &family, int start_age, PairState start, int horizon);

struct DifferenceCurve {
    int start_age = 0;
    int model_order = 1;
    StateSet target;
    std::string shocked;
    std::string baseline;
    /// difference[k - 1] for k = 1..horizon years after start_age.
    std::vector<double> difference;
};

/// P(target | start Q5) - P(target | start Q1) for every year ahead.
DifferenceCurve persistency_difference(const Order1Family &family, int start_age, int horizon, StateSet target);

/// P(target | start (Q1,Q5)) - P(target | start (Q1,Q1)) for every year ahead.
DifferenceCurve persistency_difference(const LiftedFamily &family, int start_age, int horizon, StateSet target);

/// Total-variation distance between two forecasts of the same order at each
/// step 1..horizon, over states (order one) or pair states (order two).
std::vector<double> total_variation_path(const ForecastDistribution &a, const ForecastDistribution &b);

} // namespace hshock
