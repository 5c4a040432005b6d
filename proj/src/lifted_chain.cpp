#include "hshock/lifted_chain.hpp"
#include "hshock/errors.hpp"

#include <algorithm>

namespace hshock {

std::string PairState::label() const {
    return std::string(to_string(past)) + ">" + std::string(to_string(current));
}

std::optional<PairState> PairState::parse(std::string_view text) {
    const auto cut = text.find_first_of(">,");
    if (cut == std::string_view::npos)
        return std::nullopt;
    auto a = parse_state(text.substr(0, cut));
    auto b = parse_state(text.substr(cut + 1));
    if (!a || !b)
        return std::nullopt;
    return PairState{*a, *b};
}

Matrix25 LiftedMatrix::current_major_rows() const {
    Matrix25 out = Matrix25::Zero();
    for (int r = 0; r < kPairCount; ++r)
        out.row(row_major_current_index(PairState::from_index(r))) = probs.row(r);
    return out;
}

LiftedMatrix lift(const TransitionTensor &tensor, LiftFormula formula) {
    if (std::none_of(tensor.available.begin(), tensor.available.end(), [](bool b) { return b; }))
        throw Error(ErrorKind::InvalidArgument,
                    "cannot lift a transition tensor without any supported slice (age " +
                        tensor.ages.label() + ")");
    LiftedMatrix m;
    m.age = tensor.ages.hi;
    m.formula = formula;
    for (int i = 0; i < kStateCount; ++i) {
        for (int j = 0; j < kStateCount; ++j) {
            const PairState from{state_at(i), state_at(j)};
            bool available = false;
            for (int k = 0; k < kStateCount; ++k) {
                const PairState to{state_at(j), state_at(k)};
                double p = 0.0;
                if (formula == LiftFormula::Conditional) {
                    available = tensor.available[TransitionTensor::slice(i, j)];
                    p = tensor.probs[TransitionTensor::index(i, j, k)];
                } else {
                    for (int past = 0; past < kStateCount; ++past) {
                        if (!tensor.available[TransitionTensor::slice(past, j)])
                            continue;
                        available = true;
                        p += tensor.probs[TransitionTensor::index(past, j, k)];
                    }
                }
                m.probs(to.index(), from.index()) = p;
            }
            m.column_available[static_cast<std::size_t>(from.index())] = available;
        }
    }
    return m;
}

LiftedFamily lift_family(const std::map<int, TransitionTensor> &tensors, LiftFormula formula) {
    LiftedFamily out;
    for (const auto &[age, tensor] : tensors)
        out.emplace(age, lift(tensor, formula));
    return out;
}

Vector25 kron_cost_weights(const CostVector &costs) {
    Vector25 w;
    for (int s = 0; s < kStateCount; ++s)
        w.segment<kStateCount>(s * kStateCount).setConstant(costs[s]);
    return w;
}

Vector25 pair_cost_weights(const CostVector &costs) {
    Vector25 w;
    for (int r = 0; r < kPairCount; ++r)
        w(r) = costs[PairState::from_index(r).current];
    return w;
}

Vector25 advance(const LiftedMatrix &matrix, const Vector25 &dist) {
    for (int c = 0; c < kPairCount; ++c) {
        if (dist(c) != 0.0 && !matrix.column_available[static_cast<std::size_t>(c)])
            throw Error(ErrorKind::Unavailable, "no transition estimate from pair " +
                                                    PairState::from_index(c).label() + " into age " +
                                                    std::to_string(matrix.age));
    }
    return matrix.probs * dist;
}

const LiftedMatrix &matrix_for_age(const LiftedFamily &family, int age) {
    const auto it = family.find(age);
    if (it == family.end()) {
        std::string msg = "no transition matrix for age " + std::to_string(age);
        if (!family.empty())
            msg += "; the model covers ages " + std::to_string(family.begin()->first) + " to " +
                   std::to_string(family.rbegin()->first) + " (last valid age " +
                   std::to_string(family.rbegin()->first) + ")";
        throw Error(ErrorKind::HorizonOutOfRange, msg);
    }
    return it->second;
}

namespace {

Vector25 indicator(PairState s) {
    Vector25 v = Vector25::Zero();
    v(s.index()) = 1.0;
    return v;
}

void check_steps(int k) {
    if (k < 1)
        throw Error(ErrorKind::InvalidArgument, "number of steps must be at least one");
}

} // namespace

double step_expectation(const LiftedMatrix &matrix, const CostVector &costs, PairState start, int k) {
    check_steps(k);
    Vector25 v = indicator(start);
    for (int s = 0; s < k; ++s)
        v = advance(matrix, v);
    return pair_cost_weights(costs).dot(v);
}

double step_expectation(const LiftedFamily &family, const CostVector &costs, int start_age, PairState start,
                        int k) {
    check_steps(k);
    Vector25 v = indicator(start);
    for (int s = 1; s <= k; ++s)
        v = advance(matrix_for_age(family, start_age + s), v);
    return pair_cost_weights(costs).dot(v);
}

ProjectionResult project_cumulative(const LiftedFamily &family, const CostVector &costs, int start_age,
                                    PairState start, int horizon) {
    check_steps(horizon);
    ProjectionResult r;
    r.start_age = start_age;
    r.start = start;
    r.horizon = horizon;
    r.q5_value = costs[HealthState::Q5];
    const Vector25 weights = pair_cost_weights(costs);
    Vector25 v = indicator(start);
    for (int s = 1; s <= horizon; ++s) {
        v = advance(matrix_for_age(family, start_age + s), v);
        r.per_period.push_back(weights.dot(v));
        r.cumulative += r.per_period.back();
    }
    return r;
}

double shock_cost_difference(const LiftedFamily &family, const CostVector &costs, int start_age, int horizon) {
    return project_cumulative(family, costs, start_age, kShockStart, horizon).cumulative -
           project_cumulative(family, costs, start_age, kHealthyStart, horizon).cumulative;
}

} // namespace hshock
