#pragma once

#include "hshock/estimation.hpp"
#include "hshock/health_state.hpp"
#include "hshock/ingestion.hpp"
#include "hshock/lifted_chain.hpp"
#include "hshock/panel.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <vector>

namespace hshock {

/// Seeded generator with platform-independent output. The engine is
/// std::mt19937_64, whose sequence is fixed by the standard; the
/// distributions are implemented here because the std:: ones are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal by Box-Muller (one draw per call, no caching).
    double normal();

    /// Index drawn with the given weights (which need not be normalized).
    int categorical(std::span<const double> weights);

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used to derive independent per-person seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Draws an annual cost inside one state's interval.
struct CostSampler {
    enum class Kind { PointMass, Lognormal, Uniform };

    Kind kind = Kind::PointMass;
    /// PointMass value; nullopt means the interval midpoint (Q5: its lower bound).
    std::optional<Yen> value;
    /// Lognormal parameters of log(cost); draws outside the interval are rejected.
    double mu = 0.0;
    double sigma = 1.0;
    /// Upper end for Uniform on Q5, which has no upper bound of its own.
    std::optional<Yen> upper;

    Yen sample(HealthState state, const StateThresholds &thresholds, Rng &rng) const;
};

/// A fully known age-dependent order-two process.
struct GroundTruthChain {
    /// p(next | past, current) keyed by the age of `next`, laid out as
    /// TransitionTensor::index().
    std::map<int, std::array<double, 125>> tensors;
    /// Distribution of the first two observed states (entry_age, entry_age+1),
    /// keyed by entry age, laid out as PairState::index().
    std::map<int, std::array<double, kPairCount>> initial;
    std::array<CostSampler, kStateCount> samplers{};
    /// Probability that a person observed at age-1 has left before `age`.
    std::map<int, double> attrition;
    StateThresholds thresholds{};
    std::uint64_t seed = 0;

    /// Throws InvalidConfiguration on unnormalized slices or bad probabilities.
    void validate() const;

    /// Tensor for `age` wrapped as a TransitionTensor with every slice available.
    TransitionTensor tensor(int age) const;

    /// Lifted matrices for every age with a tensor.
    LiftedFamily lifted_family() const;

    double attrition_at(int age) const noexcept {
        auto it = attrition.find(age);
        return it == attrition.end() ? 0.0 : it->second;
    }
};

nlohmann::json to_json(const GroundTruthChain &truth);
GroundTruthChain chain_from_json(const nlohmann::json &doc);

struct GenerateOptions {
    std::size_t n_persons = 1000;
    int entry_age = 20;
    int exit_age = 60;
    int base_year = 2005;
    /// Entry years are spread uniformly over base_year .. base_year+cohort_years-1.
    int cohort_years = 1;
    YearConvention convention = YearConvention::Fiscal;
};

/// One simulated subject: states/costs for each year observed before dropout.
struct SimulatedPerson {
    std::string person_id;
    int entry_year = 0;
    std::vector<HealthState> states;
    std::vector<Yen> costs;
};

/// Deterministic in (truth.seed, index).
SimulatedPerson simulate_person(const GroundTruthChain &truth, const GenerateOptions &options, std::size_t index);

/// Panel of options.n_persons subjects ordered by person_id. Persons who drop
/// out carry missing markers up to exit_age or the panel's final year,
/// whichever comes first. Throws InvalidConfiguration when the truth does
/// not cover entry_age .. exit_age or n_persons is zero.
Panel generate_panel(const GroundTruthChain &truth, const GenerateOptions &options);

/// Same subjects as generate_panel, written as monthly claims: 12 records per
/// observed year whose annualization reproduces the sampled annual cost.
/// Returns the number of rows written.
std::size_t write_claims_csv(const GroundTruthChain &truth, const GenerateOptions &options, std::ostream &out);

/// Last calendar year any generated subject can be observed in.
int final_year(const GenerateOptions &options) noexcept;

struct EnumerationResult {
    std::vector<double> per_period;
    double cumulative = 0.0;
};

inline constexpr int kMaxEnumerationHorizon = 8;

/// Exact expected representative cost in each of the `horizon` years after
/// `start` at `start_age`, by summing over all 5^horizon state paths.
/// Throws InvalidArgument above kMaxEnumerationHorizon.
EnumerationResult enumerate_expectation(const GroundTruthChain &truth, const CostVector &costs, PairState start,
                                        int start_age, int horizon);

/// Random chain over ages entry_age .. exit_age. Every slice is a normalized
/// draw of uniforms raised to `concentration` (higher is more peaked); every
/// entry is at least `floor`.
GroundTruthChain random_chain(std::uint64_t seed, int entry_age, int exit_age, double concentration = 1.0,
                              double floor = 0.0);

/// Age-homogeneous chain in which Q5 is sticky for people already in Q5 two
/// years running (p(Q5 | Q5, Q5) = chronic) but not for newcomers
/// (p(Q5 | i, Q5) = newcomer for i in Q1..Q3).
GroundTruthChain persistence_chain(std::uint64_t seed, int entry_age, int exit_age, double chronic = 0.839,
                                   double newcomer = 1.0 / 3.0);

} // namespace hshock
