#include "hshock/synthetic.hpp"
#include "hshock/errors.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace hshock {

double Rng::normal() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights)
        total += w;
    const double u = uniform() * total;
    double cum = 0.0;
    int last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0)
            continue;
        cum += weights[k];
        last_positive = static_cast<int>(k);
        if (u < cum)
            return static_cast<int>(k);
    }
    return last_positive;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

Yen midpoint(HealthState s, const StateThresholds &th) {
    const Yen lo = th.lower_bound(s);
    const auto hi = th.upper_bound(s);
    if (!hi)
        return lo;
    return (lo + *hi + 1) / 2;
}

bool inside(Yen cost, HealthState s, const StateThresholds &th) {
    const auto hi = th.upper_bound(s);
    return cost >= th.lower_bound(s) && (!hi || cost <= *hi);
}

} // namespace

Yen CostSampler::sample(HealthState state, const StateThresholds &thresholds, Rng &rng) const {
    const Yen lo = thresholds.lower_bound(state);
    switch (kind) {
    case Kind::PointMass:
        return value.value_or(midpoint(state, thresholds));
    case Kind::Uniform: {
        const Yen hi = thresholds.upper_bound(state).value_or(upper.value_or(2 * lo));
        return lo + static_cast<Yen>(std::floor(rng.uniform() * static_cast<double>(hi - lo + 1)));
    }
    case Kind::Lognormal: {
        Yen draw = lo;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            draw = static_cast<Yen>(std::floor(std::exp(mu + sigma * rng.normal()) + 0.5));
            if (inside(draw, state, thresholds))
                return draw;
        }
        const auto hi = thresholds.upper_bound(state);
        return std::max(lo, hi ? std::min(*hi, draw) : draw);
    }
    }
    return lo;
}

// ---------------------------------------------------------------------------

void GroundTruthChain::validate() const {
    auto check = [](std::span<const double> p, const std::string &what) {
        double sum = 0.0;
        for (double v : p) {
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw Error(ErrorKind::InvalidConfiguration, what + " has an entry outside [0, 1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorKind::InvalidConfiguration, what + " does not sum to one");
    };
    for (const auto &[age, t] : tensors)
        for (int s = 0; s < kPairCount; ++s)
            check(std::span<const double>(t.data() + s * kStateCount, kStateCount),
                  "tensor slice " + PairState::from_index(s).label() + " at age " + std::to_string(age));
    for (const auto &[age, p] : initial)
        check(p, "initial distribution at age " + std::to_string(age));
    for (const auto &[age, a] : attrition)
        if (!(a >= 0.0 && a <= 1.0))
            throw Error(ErrorKind::InvalidConfiguration, "attrition probability outside [0, 1]");
    for (auto s : kAllStates) {
        const auto &sampler = samplers[static_cast<std::size_t>(index_of(s))];
        if (sampler.kind == CostSampler::Kind::PointMass && sampler.value &&
            !inside(*sampler.value, s, thresholds))
            throw Error(ErrorKind::InvalidConfiguration,
                        "point-mass cost for " + std::string(to_string(s)) + " lies outside its interval");
        if (sampler.kind == CostSampler::Kind::Uniform && sampler.upper &&
            *sampler.upper < thresholds.lower_bound(s))
            throw Error(ErrorKind::InvalidConfiguration, "uniform sampler upper end below the interval");
        if (sampler.kind == CostSampler::Kind::Lognormal && !(sampler.sigma > 0.0))
            throw Error(ErrorKind::InvalidConfiguration, "lognormal sigma must be positive");
    }
}

TransitionTensor GroundTruthChain::tensor(int age) const {
    const auto it = tensors.find(age);
    if (it == tensors.end())
        throw Error(ErrorKind::HorizonOutOfRange, "ground truth has no tensor for age " + std::to_string(age));
    return TransitionTensor::from_probabilities(AgeGroup::single(age), it->second);
}

LiftedFamily GroundTruthChain::lifted_family() const {
    LiftedFamily family;
    for (const auto &[age, probs] : tensors)
        family.emplace(age, lift(TransitionTensor::from_probabilities(AgeGroup::single(age), probs)));
    return family;
}

namespace {

std::string_view kind_name(CostSampler::Kind k) {
    switch (k) {
    case CostSampler::Kind::PointMass: return "point";
    case CostSampler::Kind::Lognormal: return "lognormal";
    case CostSampler::Kind::Uniform: return "uniform";
    }
    return "point";
}

} // namespace

nlohmann::json to_json(const GroundTruthChain &truth) {
    nlohmann::json doc;
    doc["seed"] = truth.seed;
    doc["thresholds"] = truth.thresholds.upper_bounds();
    auto &initial = doc["initial"] = nlohmann::json::object();
    for (const auto &[age, p] : truth.initial)
        initial[std::to_string(age)] = p;
    auto &tensors = doc["tensors"] = nlohmann::json::object();
    for (const auto &[age, t] : truth.tensors)
        tensors[std::to_string(age)] = t;
    auto &attrition = doc["attrition"] = nlohmann::json::object();
    for (const auto &[age, a] : truth.attrition)
        attrition[std::to_string(age)] = a;
    auto &samplers = doc["samplers"] = nlohmann::json::array();
    for (auto s : kAllStates) {
        const auto &c = truth.samplers[static_cast<std::size_t>(index_of(s))];
        nlohmann::json j{{"state", to_string(s)}, {"kind", kind_name(c.kind)}};
        if (c.value)
            j["value"] = *c.value;
        if (c.kind == CostSampler::Kind::Lognormal) {
            j["mu"] = c.mu;
            j["sigma"] = c.sigma;
        }
        if (c.upper)
            j["upper"] = *c.upper;
        samplers.push_back(std::move(j));
    }
    return doc;
}

GroundTruthChain chain_from_json(const nlohmann::json &doc) {
    GroundTruthChain truth;
    try {
        truth.seed = doc.value("seed", std::uint64_t{0});
        if (doc.contains("thresholds"))
            truth.thresholds = StateThresholds(doc.at("thresholds").get<std::array<Yen, kStateCount - 1>>());
        for (const auto &[age, p] : doc.at("initial").items())
            truth.initial[std::stoi(age)] = p.get<std::array<double, kPairCount>>();
        for (const auto &[age, t] : doc.at("tensors").items())
            truth.tensors[std::stoi(age)] = t.get<std::array<double, 125>>();
        if (doc.contains("attrition"))
            for (const auto &[age, a] : doc.at("attrition").items())
                truth.attrition[std::stoi(age)] = a.get<double>();
        if (doc.contains("samplers")) {
            for (const auto &j : doc.at("samplers")) {
                const auto state = parse_state(j.at("state").get<std::string>());
                if (!state)
                    throw Error(ErrorKind::InvalidConfiguration, "unknown sampler state");
                CostSampler c;
                const auto kind = j.at("kind").get<std::string>();
                if (kind == "point")
                    c.kind = CostSampler::Kind::PointMass;
                else if (kind == "lognormal")
                    c.kind = CostSampler::Kind::Lognormal;
                else if (kind == "uniform")
                    c.kind = CostSampler::Kind::Uniform;
                else
                    throw Error(ErrorKind::InvalidConfiguration, "unknown sampler kind '" + kind + "'");
                if (j.contains("value"))
                    c.value = j.at("value").get<Yen>();
                c.mu = j.value("mu", 0.0);
                c.sigma = j.value("sigma", 1.0);
                if (j.contains("upper"))
                    c.upper = j.at("upper").get<Yen>();
                truth.samplers[static_cast<std::size_t>(index_of(*state))] = c;
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::InvalidConfiguration, std::string("malformed ground-truth chain: ") + e.what());
    } catch (const std::invalid_argument &) {
        throw Error(ErrorKind::InvalidConfiguration, "malformed age key in ground-truth chain");
    }
    truth.validate();
    return truth;
}

// ---------------------------------------------------------------------------

namespace {

void check_options(const GroundTruthChain &truth, const GenerateOptions &o) {
    if (o.n_persons == 0)
        throw Error(ErrorKind::InvalidConfiguration, "number of persons must be at least one");
    if (o.exit_age < o.entry_age || o.cohort_years < 1)
        throw Error(ErrorKind::InvalidConfiguration, "exit age must not precede entry age");
    if (!truth.initial.contains(o.entry_age))
        throw Error(ErrorKind::InvalidConfiguration,
                    "ground truth has no initial distribution for entry age " + std::to_string(o.entry_age));
    for (int age = o.entry_age + 2; age <= o.exit_age; ++age)
        if (!truth.tensors.contains(age))
            throw Error(ErrorKind::InvalidConfiguration,
                        "ground truth has no transition tensor for age " + std::to_string(age));
}

std::string person_id(std::size_t index) {
    std::string digits = std::to_string(index);
    return "S" + std::string(digits.size() < 8 ? 8 - digits.size() : 0, '0') + digits;
}

} // namespace

int final_year(const GenerateOptions &o) noexcept {
    return o.base_year + o.cohort_years - 1 + (o.exit_age - o.entry_age);
}

SimulatedPerson simulate_person(const GroundTruthChain &truth, const GenerateOptions &o, std::size_t index) {
    Rng rng(mix_seed(truth.seed, index));
    SimulatedPerson p;
    p.person_id = person_id(index);
    p.entry_year = o.base_year;
    if (o.cohort_years > 1)
        p.entry_year += static_cast<int>(std::floor(rng.uniform() * o.cohort_years));

    auto emit = [&](HealthState s) {
        p.states.push_back(s);
        p.costs.push_back(truth.samplers[static_cast<std::size_t>(index_of(s))].sample(s, truth.thresholds, rng));
    };

    const auto first = PairState::from_index(rng.categorical(truth.initial.at(o.entry_age)));
    emit(first.past);
    for (int age = o.entry_age + 1; age <= o.exit_age; ++age) {
        if (rng.uniform() < truth.attrition_at(age))
            break;
        if (age == o.entry_age + 1) {
            emit(first.current);
            continue;
        }
        const auto past = index_of(p.states[p.states.size() - 2]);
        const auto current = index_of(p.states.back());
        const auto &t = truth.tensors.at(age);
        emit(state_at(rng.categorical(
            std::span<const double>(t.data() + TransitionTensor::index(past, current, 0), kStateCount))));
    }
    return p;
}

Panel generate_panel(const GroundTruthChain &truth, const GenerateOptions &o) {
    check_options(truth, o);
    std::vector<Trajectory> trajectories;
    trajectories.reserve(o.n_persons);
    for (std::size_t i = 0; i < o.n_persons; ++i) {
        auto p = simulate_person(truth, o, i);
        Trajectory t;
        t.person_id = std::move(p.person_id);
        t.first_year = p.entry_year;
        t.first_age = o.entry_age;
        t.entries.resize(static_cast<std::size_t>(o.exit_age - o.entry_age + 1));
        for (std::size_t k = 0; k < p.states.size(); ++k) {
            t.entries[k].annual_cost = p.costs[k];
            t.entries[k].months_observed = 12;
            t.entries[k].state = p.states[k];
        }
        trajectories.push_back(std::move(t));
    }
    return Panel(std::move(trajectories), final_year(o));
}

std::size_t write_claims_csv(const GroundTruthChain &truth, const GenerateOptions &o, std::ostream &out) {
    check_options(truth, o);
    out << kClaimsHeader << '\n';
    std::size_t rows = 0;
    for (std::size_t i = 0; i < o.n_persons; ++i) {
        const auto p = simulate_person(truth, o, i);
        for (std::size_t k = 0; k < p.states.size(); ++k) {
            const int period = p.entry_year + static_cast<int>(k);
            const int age = o.entry_age + static_cast<int>(k);
            const Yen base = p.costs[k] / 12;
            const Yen remainder = p.costs[k] % 12;
            for (int m = 0; m < 12; ++m) {
                // Fiscal years run April..March of the following calendar year.
                int month = m + 1;
                int year = period;
                if (o.convention == YearConvention::Fiscal) {
                    month = (m + 3) % 12 + 1;
                    year = m < 9 ? period : period + 1;
                }
                out << p.person_id << ",M," << age << ',' << year << ',' << month << ','
                    << base + (m < remainder ? 1 : 0) << '\n';
                ++rows;
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------

EnumerationResult enumerate_expectation(const GroundTruthChain &truth, const CostVector &costs, PairState start,
                                        int start_age, int horizon) {
    if (horizon < 1)
        throw Error(ErrorKind::InvalidArgument, "horizon must be at least one year");
    if (horizon > kMaxEnumerationHorizon)
        throw Error(ErrorKind::InvalidArgument,
                    "path enumeration is limited to " + std::to_string(kMaxEnumerationHorizon) +
                        " years; use the lifted-chain projection for longer horizons");

    std::vector<const std::array<double, 125> *> steps;
    for (int k = 1; k <= horizon; ++k) {
        const auto it = truth.tensors.find(start_age + k);
        if (it == truth.tensors.end())
            throw Error(ErrorKind::HorizonOutOfRange,
                        "ground truth has no tensor for age " + std::to_string(start_age + k));
        steps.push_back(&it->second);
    }

    EnumerationResult r;
    r.per_period.assign(static_cast<std::size_t>(horizon), 0.0);
    long paths = 1;
    for (int k = 0; k < horizon; ++k)
        paths *= kStateCount;

    std::vector<int> path(static_cast<std::size_t>(horizon));
    for (long code = 0; code < paths; ++code) {
        long c = code;
        for (int k = horizon - 1; k >= 0; --k) {
            path[static_cast<std::size_t>(k)] = static_cast<int>(c % kStateCount);
            c /= kStateCount;
        }
        double prob = 1.0;
        int past = index_of(start.past);
        int current = index_of(start.current);
        for (int k = 0; k < horizon && prob != 0.0; ++k) {
            const int next = path[static_cast<std::size_t>(k)];
            prob *= (*steps[static_cast<std::size_t>(k)])[TransitionTensor::index(past, current, next)];
            past = current;
            current = next;
        }
        if (prob == 0.0)
            continue;
        for (int k = 0; k < horizon; ++k)
            r.per_period[static_cast<std::size_t>(k)] += prob * costs[path[static_cast<std::size_t>(k)]];
    }
    for (double v : r.per_period)
        r.cumulative += v;
    return r;
}

GroundTruthChain random_chain(std::uint64_t seed, int entry_age, int exit_age, double concentration, double floor) {
    if (floor < 0.0 || floor * kStateCount >= 1.0)
        throw Error(ErrorKind::InvalidArgument, "floor must lie in [0, 0.2)");
    Rng rng(seed);
    GroundTruthChain truth;
    truth.seed = seed;

    auto draw = [&](std::span<double> out) {
        double sum = 0.0;
        for (auto &v : out) {
            v = std::pow(rng.uniform(), concentration) + 1e-12;
            sum += v;
        }
        const double scale = 1.0 - floor * static_cast<double>(out.size());
        for (auto &v : out)
            v = floor + scale * v / sum;
    };

    auto &init = truth.initial[entry_age];
    draw(init);
    for (int age = entry_age + 2; age <= exit_age; ++age) {
        auto &t = truth.tensors[age];
        for (int s = 0; s < kPairCount; ++s)
            draw(std::span<double>(t.data() + s * kStateCount, kStateCount));
    }
    truth.validate();
    return truth;
}

GroundTruthChain persistence_chain(std::uint64_t seed, int entry_age, int exit_age, double chronic, double newcomer) {
    if (!(chronic >= 0.0 && chronic <= 1.0 && newcomer >= 0.0 && newcomer <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "persistence probabilities must lie in [0, 1]");
    static constexpr double base[kStateCount][kStateCount] = {
        {0.55, 0.20, 0.12, 0.10, 0.03},
        {0.30, 0.30, 0.20, 0.15, 0.05},
        {0.20, 0.22, 0.28, 0.24, 0.06},
        {0.10, 0.15, 0.20, 0.45, 0.10},
        {0.05, 0.07, 0.10, 0.28, 0.50},
    };
    static constexpr double entry_marginal[kStateCount] = {0.40, 0.25, 0.17, 0.13, 0.05};

    GroundTruthChain truth;
    truth.seed = seed;
    auto &init = truth.initial[entry_age];
    for (int i = 0; i < kStateCount; ++i)
        for (int j = 0; j < kStateCount; ++j)
            init[static_cast<std::size_t>(PairState{state_at(i), state_at(j)}.index())] = entry_marginal[i] * base[i][j];

    std::array<double, 125> slices{};
    const int q5 = index_of(HealthState::Q5);
    for (int i = 0; i < kStateCount; ++i) {
        for (int j = 0; j < kStateCount; ++j) {
            double *row = slices.data() + TransitionTensor::index(i, j, 0);
            if (j != q5) {
                std::copy(base[j], base[j] + kStateCount, row);
                continue;
            }
            const double stay = i == q5 ? chronic : (i == index_of(HealthState::Q4) ? (chronic + newcomer) / 2.0 : newcomer);
            const double rest = 1.0 - base[q5][q5];
            for (int k = 0; k < q5; ++k)
                row[k] = (1.0 - stay) * base[q5][k] / rest;
            row[q5] = stay;
        }
    }
    for (int age = entry_age + 2; age <= exit_age; ++age)
        truth.tensors[age] = slices;
    truth.validate();
    return truth;
}

} // namespace hshock
