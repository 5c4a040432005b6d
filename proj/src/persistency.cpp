#include "hshock/persistency.hpp"
#include "hshock/errors.hpp"

namespace hshock {

namespace {

std::string last_valid_age_message(int age, int first, int last) {
    return "no transition estimate into age " + std::to_string(age) + "; estimates cover ages " +
           std::to_string(first) + " to " + std::to_string(last) + " (last valid age " + std::to_string(last) + ")";
}

template <typename Family>
const auto &family_at(const Family &family, int age) {
    const auto it = family.find(age);
    if (it == family.end()) {
        if (family.empty())
            throw Error(ErrorKind::HorizonOutOfRange, "empty model family");
        throw Error(ErrorKind::HorizonOutOfRange,
                    last_valid_age_message(age, family.begin()->first, family.rbegin()->first));
    }
    return it->second;
}

} // namespace

Order1Family build_order1_family(const Panel &panel, AgeGroup ages, UnavailablePolicy policy) {
    auto family = estimate_order1_by_age(panel, ages);
    if (policy == UnavailablePolicy::Error)
        return family;

    std::map<int, std::optional<TransitionMatrix>> pooled;
    auto pooled_for = [&](int age) -> const std::optional<TransitionMatrix> & {
        const auto group = five_year_group(age);
        auto [it, inserted] = pooled.try_emplace(group.lo);
        if (inserted) {
            try {
                it->second = estimate_order1(panel, group);
            } catch (const Error &e) {
                if (e.kind() != ErrorKind::EmptyCohort)
                    throw;
            }
        }
        return it->second;
    };

    for (int age = ages.lo; age <= ages.hi; ++age) {
        const auto &pool = pooled_for(age);
        if (!pool)
            continue;
        auto [it, inserted] = family.try_emplace(age);
        auto &m = it->second;
        if (inserted)
            m.ages = AgeGroup::single(age);
        for (int i = 0; i < kStateCount; ++i) {
            const auto row = static_cast<std::size_t>(i);
            if (m.available[row] || !pool->available[row])
                continue;
            m.probs.row(i) = pool->probs.row(i);
            m.available[row] = true;
        }
    }
    return family;
}

std::map<int, TransitionTensor> build_order2_family(const Panel &panel, AgeGroup ages, UnavailablePolicy policy) {
    auto family = estimate_order2_by_age(panel, ages);
    if (policy == UnavailablePolicy::Error)
        return family;

    for (int age = ages.lo; age <= ages.hi; ++age) {
        std::optional<TransitionTensor> pool;
        try {
            pool = estimate_order2(panel, five_year_group(age));
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::EmptyCohort)
                throw;
            continue;
        }
        auto [it, inserted] = family.try_emplace(age);
        auto &t = it->second;
        if (inserted)
            t.ages = AgeGroup::single(age);
        for (std::size_t s = 0; s < t.available.size(); ++s) {
            if (t.available[s] || !pool->available[s])
                continue;
            for (int k = 0; k < kStateCount; ++k)
                t.probs[s * kStateCount + static_cast<std::size_t>(k)] = pool->probs[s * kStateCount + static_cast<std::size_t>(k)];
            t.available[s] = true;
        }
    }
    return family;
}

Vector5 ForecastDistribution::state_marginal(int k) const {
    const auto &d = distributions.at(static_cast<std::size_t>(k));
    if (model_order == 1)
        return d;
    Vector5 m = Vector5::Zero();
    for (int r = 0; r < kPairCount; ++r)
        m(index_of(PairState::from_index(r).current)) += d(r);
    return m;
}

double ForecastDistribution::mass(int k, StateSet target) const {
    const Vector5 m = state_marginal(k);
    double total = 0.0;
    for (auto s : kAllStates)
        if (target.contains(s))
            total += m(index_of(s));
    return total;
}

ForecastDistribution iterate_forward(const Order1Family &family, int start_age, HealthState start, int horizon) {
    if (horizon < 0)
        throw Error(ErrorKind::InvalidArgument, "horizon must be non-negative");
    ForecastDistribution f;
    f.start_age = start_age;
    f.model_order = 1;
    f.conditioning = std::string(to_string(start));
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(kStateCount);
    v(index_of(start)) = 1.0;
    f.distributions.push_back(v.transpose());
    for (int k = 1; k <= horizon; ++k) {
        const auto &m = family_at(family, start_age + k);
        for (int i = 0; i < kStateCount; ++i) {
            if (v(i) != 0.0 && !m.available[static_cast<std::size_t>(i)])
                throw Error(ErrorKind::Unavailable, "no transition estimate from " +
                                                        std::string(to_string(state_at(i))) + " into age " +
                                                        std::to_string(start_age + k));
        }
        v = v * m.probs;
        f.distributions.push_back(v.transpose());
    }
    return f;
}

ForecastDistribution iterate_forward(const LiftedFamily &family, int start_age, PairState start, int horizon) {
    if (horizon < 0)
        throw Error(ErrorKind::InvalidArgument, "horizon must be non-negative");
    ForecastDistribution f;
    f.start_age = start_age;
    f.model_order = 2;
    f.conditioning = start.label();
    Vector25 v = Vector25::Zero();
    v(start.index()) = 1.0;
    f.distributions.push_back(v);
    for (int k = 1; k <= horizon; ++k) {
        v = advance(family_at(family, start_age + k), v);
        f.distributions.push_back(v);
    }
    return f;
}

namespace {

DifferenceCurve difference(const ForecastDistribution &shocked, const ForecastDistribution &baseline,
                           StateSet target) {
    DifferenceCurve c;
    c.start_age = shocked.start_age;
    c.model_order = shocked.model_order;
    c.target = target;
    c.shocked = shocked.conditioning;
    c.baseline = baseline.conditioning;
    for (int k = 1; k <= shocked.horizon(); ++k)
        c.difference.push_back(shocked.mass(k, target) - baseline.mass(k, target));
    return c;
}

} // namespace

DifferenceCurve persistency_difference(const Order1Family &family, int start_age, int horizon, StateSet target) {
    return difference(iterate_forward(family, start_age, HealthState::Q5, horizon),
                      iterate_forward(family, start_age, HealthState::Q1, horizon), target);
}

DifferenceCurve persistency_difference(const LiftedFamily &family, int start_age, int horizon, StateSet target) {
    return difference(iterate_forward(family, start_age, kShockStart, horizon),
                      iterate_forward(family, start_age, kHealthyStart, horizon), target);
}

std::vector<double> total_variation_path(const ForecastDistribution &a, const ForecastDistribution &b) {
    std::vector<double> out;
    const int h = std::min(a.horizon(), b.horizon());
    for (int k = 1; k <= h; ++k)
        out.push_back(0.5 * (a.distributions[static_cast<std::size_t>(k)] - b.distributions[static_cast<std::size_t>(k)]).cwiseAbs().sum());
    return out;
}

} // namespace hshock
