#pragma once

#include "hshock/health_state.hpp"
#include "hshock/panel.hpp"
#include "hshock/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace testing {

using namespace hshock;

/// Trajectory from a compact state string: digits 1..5 are observed states
/// (costed at the interval midpoint), '.' is a missing year.
inline Trajectory trajectory(std::string id, int first_age, int first_year, std::string_view states,
                             Sex sex = Sex::Male) {
    Trajectory t;
    t.person_id = std::move(id);
    t.sex = sex;
    t.first_age = first_age;
    t.first_year = first_year;
    for (char c : states) {
        PanelEntry e;
        if (c != '.') {
            const auto s = state_at(c - '1');
            e.state = s;
            e.months_observed = 12;
            e.annual_cost = static_cast<Yen>(std::llround(representative_cost(s, 267'000.0, {})));
        }
        t.entries.push_back(e);
    }
    return t;
}

/// Trajectory from annual costs; a negative cost marks a missing year.
inline Trajectory cost_trajectory(std::string id, int first_age, int first_year, const std::vector<Yen> &costs,
                                  const StateThresholds &thresholds = {}) {
    Trajectory t;
    t.person_id = std::move(id);
    t.first_age = first_age;
    t.first_year = first_year;
    for (Yen c : costs) {
        PanelEntry e;
        if (c >= 0) {
            e.annual_cost = c;
            e.months_observed = 12;
            e.state = classify_cost(c, thresholds);
        }
        t.entries.push_back(e);
    }
    return t;
}

/// Zero-padded id so that trajectories sort in creation order.
inline std::string pid(std::size_t i) {
    std::string s = std::to_string(i);
    return "P" + std::string(8 - std::min<std::size_t>(8, s.size()), '0') + s;
}

inline Panel panel_of(std::vector<Trajectory> ts) {
    int final_year = 0;
    for (const auto &t : ts)
        final_year = std::max(final_year, t.last_year());
    return Panel(std::move(ts), final_year);
}

inline bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

/// Order-two chain whose slices do not depend on the t-2 state.
inline GroundTruthChain order1_consistent_chain(std::uint64_t seed, int entry_age, int exit_age) {
    auto truth = random_chain(seed, entry_age, exit_age);
    for (auto &[age, t] : truth.tensors)
        for (int past = 1; past < kStateCount; ++past)
            for (int cur = 0; cur < kStateCount; ++cur)
                for (int next = 0; next < kStateCount; ++next)
                    t[TransitionTensor::index(past, cur, next)] = t[TransitionTensor::index(0, cur, next)];
    truth.validate();
    return truth;
}

/// Every slice and the initial pair distribution uniform.
inline GroundTruthChain uniform_chain(int entry_age, int exit_age) {
    GroundTruthChain truth;
    truth.initial[entry_age].fill(1.0 / kPairCount);
    for (int age = entry_age + 2; age <= exit_age; ++age)
        truth.tensors[age].fill(1.0 / kStateCount);
    truth.validate();
    return truth;
}

/// Binomial standard error of a proportion p estimated from n trials.
inline double binomial_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

/// Order-one family read off an order-one-consistent chain.
inline std::map<int, TransitionMatrix> order1_family_of(const GroundTruthChain &truth) {
    std::map<int, TransitionMatrix> out;
    for (const auto &[age, t] : truth.tensors) {
        Matrix5 m;
        for (int cur = 0; cur < kStateCount; ++cur)
            for (int next = 0; next < kStateCount; ++next)
                m(cur, next) = t[TransitionTensor::index(0, cur, next)];
        out.emplace(age, TransitionMatrix::from_probabilities(AgeGroup::single(age), m));
    }
    return out;
}

} // namespace testing
