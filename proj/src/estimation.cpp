#include "hshock/estimation.hpp"
#include "hshock/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hshock {

std::string AgeGroup::label() const {
    return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

AgeGroup five_year_group(int age) {
    const int lo = age >= 0 ? (age / 5) * 5 : -(((-age) + 4) / 5) * 5;
    return {lo, lo + 4};
}

std::vector<AgeGroup> five_year_groups(int lo, int hi) {
    std::vector<AgeGroup> out;
    if (lo > hi)
        return out;
    for (auto g = five_year_group(lo); g.lo <= hi; g = {g.lo + 5, g.hi + 5})
        out.push_back(g);
    return out;
}

StateFractions state_fractions(const Panel &panel, AgeGroup group) {
    StateFractions out;
    out.group = group;
    for (const auto &t : panel.trajectories()) {
        const int lo = std::max(group.lo, t.first_age);
        const int hi = std::min(group.hi, t.last_age());
        for (int age = lo; age <= hi; ++age) {
            if (auto s = t.state_at_age(age)) {
                ++out.counts[static_cast<std::size_t>(index_of(*s))];
                ++out.total;
            }
        }
    }
    if (out.total == 0)
        throw Error(ErrorKind::EmptyCohort, "no observed person-years in age group " + group.label());
    for (std::size_t i = 0; i < out.counts.size(); ++i)
        out.fractions[i] = static_cast<double>(out.counts[i]) / static_cast<double>(out.total);
    return out;
}

// ---------------------------------------------------------------------------
// Transition estimates

TransitionMatrix TransitionMatrix::from_counts(
    AgeGroup ages, const std::array<std::array<std::int64_t, kStateCount>, kStateCount> &counts) {
    TransitionMatrix m;
    m.ages = ages;
    m.counts = counts;
    for (int i = 0; i < kStateCount; ++i) {
        const auto &row = counts[static_cast<std::size_t>(i)];
        const auto total = std::accumulate(row.begin(), row.end(), std::int64_t{0});
        m.available[static_cast<std::size_t>(i)] = total > 0;
        if (total == 0)
            continue;
        for (int j = 0; j < kStateCount; ++j)
            m.probs(i, j) = static_cast<double>(row[static_cast<std::size_t>(j)]) / static_cast<double>(total);
    }
    return m;
}

namespace {

void check_probability_vector(std::span<const double> p, const char *what) {
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw Error(ErrorKind::InvalidArgument, std::string(what) + " has an entry outside [0, 1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorKind::InvalidArgument, std::string(what) + " does not sum to one");
}

} // namespace

TransitionMatrix TransitionMatrix::from_probabilities(AgeGroup ages, const Matrix5 &probs) {
    TransitionMatrix m;
    m.ages = ages;
    m.probs = probs;
    for (int i = 0; i < kStateCount; ++i) {
        std::array<double, kStateCount> row{};
        for (int j = 0; j < kStateCount; ++j)
            row[static_cast<std::size_t>(j)] = probs(i, j);
        check_probability_vector(row, "transition matrix row");
        m.available[static_cast<std::size_t>(i)] = true;
    }
    return m;
}

std::int64_t TransitionMatrix::row_count(HealthState from) const noexcept {
    const auto &row = counts[static_cast<std::size_t>(index_of(from))];
    return std::accumulate(row.begin(), row.end(), std::int64_t{0});
}

TransitionTensor TransitionTensor::from_counts(AgeGroup ages, const std::array<std::int64_t, 125> &counts) {
    TransitionTensor t;
    t.ages = ages;
    t.counts = counts;
    for (int i = 0; i < kStateCount; ++i) {
        for (int j = 0; j < kStateCount; ++j) {
            std::int64_t total = 0;
            for (int k = 0; k < kStateCount; ++k)
                total += counts[index(i, j, k)];
            t.available[slice(i, j)] = total > 0;
            if (total == 0)
                continue;
            for (int k = 0; k < kStateCount; ++k)
                t.probs[index(i, j, k)] = static_cast<double>(counts[index(i, j, k)]) / static_cast<double>(total);
        }
    }
    return t;
}

TransitionTensor TransitionTensor::from_probabilities(AgeGroup ages, const std::array<double, 125> &probs,
                                                      std::optional<std::array<bool, 25>> available) {
    TransitionTensor t;
    t.ages = ages;
    if (available)
        t.available = *available;
    else
        t.available.fill(true);
    for (int i = 0; i < kStateCount; ++i) {
        for (int j = 0; j < kStateCount; ++j) {
            if (!t.available[slice(i, j)])
                continue;
            std::span<const double> s(probs.data() + index(i, j, 0), kStateCount);
            check_probability_vector(s, "transition tensor slice");
            std::copy(s.begin(), s.end(), t.probs.begin() + static_cast<std::ptrdiff_t>(index(i, j, 0)));
        }
    }
    return t;
}

std::int64_t TransitionTensor::slice_count(HealthState past, HealthState current) const noexcept {
    std::int64_t total = 0;
    for (int k = 0; k < kStateCount; ++k)
        total += counts[index(index_of(past), index_of(current), k)];
    return total;
}

std::array<std::array<std::int64_t, kStateCount>, kStateCount> TransitionTensor::marginal_counts() const noexcept {
    std::array<std::array<std::int64_t, kStateCount>, kStateCount> out{};
    for (int i = 0; i < kStateCount; ++i)
        for (int j = 0; j < kStateCount; ++j)
            for (int k = 0; k < kStateCount; ++k)
                out[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] += counts[index(i, j, k)];
    return out;
}

namespace {

using Counts1 = std::array<std::array<std::int64_t, kStateCount>, kStateCount>;
using Counts2 = std::array<std::int64_t, 125>;

// Calls fn(age, entries ending at age) for every age t in `ages` where the
// trajectory has `depth` consecutive observed years ending at t.
template <typename Fn>
void for_each_observed_run(const Panel &panel, AgeGroup ages, int depth, Fn &&fn) {
    for (const auto &t : panel.trajectories()) {
        const int lo = std::max(ages.lo, t.first_age + depth - 1);
        const int hi = std::min(ages.hi, t.last_age());
        for (int age = lo; age <= hi; ++age) {
            const PanelEntry *end = t.at_age(age);
            bool ok = true;
            for (int d = 0; d < depth && ok; ++d)
                ok = (end - d)->observed();
            if (ok)
                fn(age, end);
        }
    }
}

} // namespace

TransitionMatrix estimate_order1(const Panel &panel, AgeGroup ages) {
    Counts1 counts{};
    std::int64_t n = 0;
    for_each_observed_run(panel, ages, 2, [&](int, const PanelEntry *e) {
        ++counts[static_cast<std::size_t>(index_of((e - 1)->state))][static_cast<std::size_t>(index_of(e->state))];
        ++n;
    });
    if (n == 0)
        throw Error(ErrorKind::EmptyCohort, "no observed year-to-year pairs at age " + ages.label());
    return TransitionMatrix::from_counts(ages, counts);
}

TransitionTensor estimate_order2(const Panel &panel, AgeGroup ages) {
    Counts2 counts{};
    std::int64_t n = 0;
    for_each_observed_run(panel, ages, 3, [&](int, const PanelEntry *e) {
        ++counts[TransitionTensor::index(index_of((e - 2)->state), index_of((e - 1)->state), index_of(e->state))];
        ++n;
    });
    if (n == 0)
        throw Error(ErrorKind::EmptyCohort, "no observed three-year runs at age " + ages.label());
    return TransitionTensor::from_counts(ages, counts);
}

std::map<int, TransitionMatrix> estimate_order1_by_age(const Panel &panel, AgeGroup ages) {
    std::map<int, Counts1> counts;
    for_each_observed_run(panel, ages, 2, [&](int age, const PanelEntry *e) {
        ++counts[age][static_cast<std::size_t>(index_of((e - 1)->state))][static_cast<std::size_t>(index_of(e->state))];
    });
    std::map<int, TransitionMatrix> out;
    for (const auto &[age, c] : counts)
        out.emplace(age, TransitionMatrix::from_counts(AgeGroup::single(age), c));
    return out;
}

std::map<int, TransitionTensor> estimate_order2_by_age(const Panel &panel, AgeGroup ages) {
    std::map<int, Counts2> counts;
    for_each_observed_run(panel, ages, 3, [&](int age, const PanelEntry *e) {
        ++counts[age][TransitionTensor::index(index_of((e - 2)->state), index_of((e - 1)->state), index_of(e->state))];
    });
    std::map<int, TransitionTensor> out;
    for (const auto &[age, c] : counts)
        out.emplace(age, TransitionTensor::from_counts(AgeGroup::single(age), c));
    return out;
}

// ---------------------------------------------------------------------------
// Frequency curves

std::optional<double> FrequencyPoint::target_share_observed() const noexcept {
    const auto observed = conditioned - category_counts[kMissingCategory];
    if (observed == 0)
        return std::nullopt;
    return static_cast<double>(in_target) / static_cast<double>(observed);
}

FrequencyCurve shock_frequency(const Panel &panel, std::span<const StateSet> prior_condition, StateSet target,
                               std::optional<AgeGroup> ages) {
    const int depth = static_cast<int>(prior_condition.size());
    if (depth < 1 || depth > 2)
        throw Error(ErrorKind::InvalidArgument, "prior condition must cover one or two years");

    std::map<int, FrequencyPoint> points;
    for (const auto &t : panel.trajectories()) {
        int lo = t.first_age + depth;
        int hi = t.last_age();
        if (ages) {
            lo = std::max(lo, ages->lo);
            hi = std::min(hi, ages->hi);
        }
        for (int age = lo; age <= hi; ++age) {
            bool match = true;
            for (int d = 0; d < depth && match; ++d) {
                // prior_condition is oldest first; d = 0 is t - depth.
                auto s = t.state_at_age(age - depth + d);
                match = s && prior_condition[static_cast<std::size_t>(d)].contains(*s);
            }
            if (!match)
                continue;
            auto &p = points[age];
            p.age = age;
            ++p.conditioned;
            const auto *e = t.at_age(age);
            if (!e->observed()) {
                ++p.category_counts[kMissingCategory];
            } else {
                ++p.category_counts[static_cast<std::size_t>(index_of(e->state))];
                if (target.contains(e->state))
                    ++p.in_target;
            }
        }
    }

    FrequencyCurve curve;
    curve.condition.assign(prior_condition.begin(), prior_condition.end());
    curve.target = target;
    for (auto &[age, p] : points)
        curve.points.push_back(p);
    return curve;
}

// ---------------------------------------------------------------------------
// Cost distributions

double sample_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty())
        throw Error(ErrorKind::InvalidArgument, "quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

CostSummary conditional_cost_quantiles(const Panel &panel, AgeGroup group, StateSet prior,
                                       std::optional<StateSet> current, std::span<const double> quantiles) {
    for (double q : quantiles) {
        if (!(q > 0.0 && q < 1.0))
            throw Error(ErrorKind::InvalidArgument, "quantiles must lie strictly between 0 and 1");
    }
    std::vector<double> costs;
    for_each_observed_run(panel, group, 2, [&](int, const PanelEntry *e) {
        if (prior.contains((e - 1)->state) && (!current || current->contains(e->state)))
            costs.push_back(static_cast<double>(e->annual_cost));
    });

    CostSummary out;
    out.group = group;
    out.n = static_cast<std::int64_t>(costs.size());
    if (costs.empty())
        return out;
    out.available = true;
    std::sort(costs.begin(), costs.end());
    const double n = static_cast<double>(costs.size());
    out.mean = std::accumulate(costs.begin(), costs.end(), 0.0) / n;
    double ss = 0.0;
    for (double c : costs)
        ss += (c - out.mean) * (c - out.mean);
    out.sd = costs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out.min = costs.front();
    out.max = costs.back();
    for (double q : quantiles)
        out.quantiles.emplace_back(q, sample_quantile(costs, q));

    for (std::size_t k = 0; k < costs.size(); ++k) {
        if (costs[k] <= 0.0) {
            ++out.zero_costs;
            continue;
        }
        // One point per distinct cost at the top of its run of ties.
        if (k + 1 < costs.size() && costs[k + 1] == costs[k])
            continue;
        out.log_cdf.push_back({std::log(costs[k]), static_cast<double>(k + 1) / n});
    }
    return out;
}

std::vector<ExceedanceRow> exceedance_proportions(const Panel &panel, HealthState from, HealthState to,
                                                  std::span<const Yen> thresholds,
                                                  std::span<const AgeGroup> groups,
                                                  const StateThresholds &state_thresholds) {
    const Yen lo = state_thresholds.lower_bound(to);
    const auto hi = state_thresholds.upper_bound(to);
    for (Yen th : thresholds) {
        if (th < lo || (hi && th > *hi))
            throw Error(ErrorKind::InvalidArgument,
                        "exceedance threshold " + std::to_string(th) + " lies outside state " +
                            std::string(to_string(to)));
    }

    std::vector<ExceedanceRow> rows;
    for (const auto &g : groups) {
        ExceedanceRow row;
        row.group = g;
        std::vector<std::int64_t> above(thresholds.size(), 0);
        for_each_observed_run(panel, g, 2, [&](int, const PanelEntry *e) {
            if ((e - 1)->state != from || e->state != to)
                return;
            ++row.n;
            for (std::size_t k = 0; k < thresholds.size(); ++k)
                if (e->annual_cost >= thresholds[k])
                    ++above[k];
        });
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            if (row.n == 0)
                row.proportions.emplace_back(std::nullopt);
            else
                row.proportions.emplace_back(static_cast<double>(above[k]) / static_cast<double>(row.n));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

PersistencePath multi_year_state_frequency(const Panel &panel, AgeGroup group,
                                           std::span<const StateSet> start_condition, StateSet target,
                                           int horizon) {
    const int depth = static_cast<int>(start_condition.size());
    if (depth < 1 || depth > 2)
        throw Error(ErrorKind::InvalidArgument, "start condition must cover one or two years");
    if (horizon < 1)
        throw Error(ErrorKind::InvalidArgument, "horizon must be at least one year");

    PersistencePath path;
    path.group = group;
    path.start_condition.assign(start_condition.begin(), start_condition.end());
    path.target = target;
    std::vector<std::int64_t> survivors(static_cast<std::size_t>(horizon), 0);
    std::vector<std::int64_t> hits(static_cast<std::size_t>(horizon), 0);

    for (const auto &t : panel.trajectories()) {
        const int lo = std::max(group.lo, t.first_age + depth - 1);
        const int hi = std::min(group.hi, t.last_age());
        for (int age = lo; age <= hi; ++age) {
            bool match = true;
            for (int d = 0; d < depth && match; ++d) {
                auto s = t.state_at_age(age - (depth - 1 - d));
                match = s && start_condition[static_cast<std::size_t>(d)].contains(*s);
            }
            if (!match)
                continue;
            ++path.starts;
            for (int k = 1; k <= horizon; ++k) {
                auto s = t.state_at_age(age + k);
                if (!s)
                    continue;
                ++survivors[static_cast<std::size_t>(k - 1)];
                if (target.contains(*s))
                    ++hits[static_cast<std::size_t>(k - 1)];
            }
        }
    }

    for (int k = 1; k <= horizon; ++k) {
        PersistencePoint p;
        p.years_ahead = k;
        p.survivors = survivors[static_cast<std::size_t>(k - 1)];
        p.in_target = hits[static_cast<std::size_t>(k - 1)];
        if (p.survivors > 0)
            p.share = static_cast<double>(p.in_target) / static_cast<double>(p.survivors);
        path.points.push_back(p);
    }
    return path;
}

} // namespace hshock
