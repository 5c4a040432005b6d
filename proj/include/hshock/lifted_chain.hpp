#pragma once

#include "hshock/estimation.hpp"
#include "hshock/health_state.hpp"

#include <Eigen/Dense>

#include <array>
#include <map>
#include <string>
#include <vector>

namespace hshock {

inline constexpr int kPairCount = kStateCount * kStateCount;

using Matrix25 = Eigen::Matrix<double, kPairCount, kPairCount>;
using Vector25 = Eigen::Matrix<double, kPairCount, 1>;

/// (state last year, state this year).
struct PairState {
    HealthState past = HealthState::Q1;
    HealthState current = HealthState::Q1;

    /// Position in the lifted matrix's column order:
    /// (Q1,Q1), (Q1,Q2), ..., (Q1,Q5), (Q2,Q1), ..., (Q5,Q5).
    constexpr int index() const noexcept { return index_of(past) * kStateCount + index_of(current); }
    static constexpr PairState from_index(int i) noexcept {
        return {state_at(i / kStateCount), state_at(i % kStateCount)};
    }

    /// "Q1>Q5"
    std::string label() const;
    static std::optional<PairState> parse(std::string_view text);

    bool operator==(const PairState &) const = default;
};

/// Position in the alternative row order where the first coordinate varies
/// fastest: (Q1,Q1), (Q2,Q1), ..., (Q5,Q1), (Q1,Q2), ..., (Q5,Q5).
constexpr int row_major_current_index(PairState s) noexcept {
    return index_of(s.current) * kStateCount + index_of(s.past);
}

/// How pair-to-pair entries are filled from the order-two tensor.
enum class LiftFormula {
    /// (i,j) -> (j,k) gets p(k | i, j).
    Conditional,
    /// (i,j) -> (j,k) gets sum over i' of p(k | i', j), ignoring the known
    /// past state. Columns then do not sum to one; kept for comparison.
    PastSummed,
};

/// Order-two chain written as an order-one chain over pair states. Column
/// `from` holds the distribution of the next pair, so `probs * v` advances a
/// distribution `v` over pairs by one year. Both axes use PairState::index().
struct LiftedMatrix {
    /// Age of the year the matrix moves into.
    int age = 0;
    Matrix25 probs = Matrix25::Zero();
    std::array<bool, kPairCount> column_available{};
    LiftFormula formula = LiftFormula::Conditional;

    double operator()(PairState to, PairState from) const noexcept { return probs(to.index(), from.index()); }

    /// Same matrix with rows permuted into row_major_current_index order and
    /// columns left in PairState::index() order. In this layout the cost
    /// weights of kron_cost_weights() give the expected next-year cost of
    /// start column j as weights^T * layout * e_j.
    Matrix25 current_major_rows() const;
};

/// Throws InvalidArgument when no slice of the tensor is available.
LiftedMatrix lift(const TransitionTensor &tensor, LiftFormula formula = LiftFormula::Conditional);

using LiftedFamily = std::map<int, LiftedMatrix>;

LiftedFamily lift_family(const std::map<int, TransitionTensor> &tensors,
                         LiftFormula formula = LiftFormula::Conditional);

/// M (x) 1_5: the cost of each pair's current state, in the row order of
/// LiftedMatrix::current_major_rows().
Vector25 kron_cost_weights(const CostVector &costs);

/// The cost of each pair's current state in PairState::index() order.
Vector25 pair_cost_weights(const CostVector &costs);

/// One year forward. Throws Unavailable if `dist` puts mass on a column the
/// matrix has no estimate for.
Vector25 advance(const LiftedMatrix &matrix, const Vector25 &dist);

/// The matrix moving into `age`. Throws HorizonOutOfRange naming the last
/// age the family covers.
const LiftedMatrix &matrix_for_age(const LiftedFamily &family, int age);

/// Expected representative cost k years after being in `start`, using the
/// same matrix for every step.
double step_expectation(const LiftedMatrix &matrix, const CostVector &costs, PairState start, int k);

/// Expected representative cost k years after being in `start` at
/// `start_age`, stepping through the matrices for start_age+1 .. start_age+k.
double step_expectation(const LiftedFamily &family, const CostVector &costs, int start_age, PairState start,
                        int k);

struct ProjectionResult {
    int start_age = 0;
    PairState start;
    int horizon = 0;
    double q5_value = 0.0;
    /// Expected cost in years start_age+1 .. start_age+horizon.
    std::vector<double> per_period;
    double cumulative = 0.0;
};

/// Sum of expected costs over the `horizon` years after `start_age`.
ProjectionResult project_cumulative(const LiftedFamily &family, const CostVector &costs, int start_age,
                                    PairState start, int horizon = 10);

/// Cumulative cost from (Q1,Q5) minus cumulative cost from (Q1,Q1).
double shock_cost_difference(const LiftedFamily &family, const CostVector &costs, int start_age,
                             int horizon = 10);

inline constexpr PairState kShockStart{HealthState::Q1, HealthState::Q5};
inline constexpr PairState kHealthyStart{HealthState::Q1, HealthState::Q1};

} // namespace hshock
