// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "support.hpp"

#include "commands.hpp"

#include "hshock/errors.hpp"
#include "hshock/estimation.hpp"
#include "hshock/ingestion.hpp"
#include "hshock/lifted_chain.hpp"
#include "hshock/persistency.hpp"
#include "hshock/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace hshock;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes, fixed.
constexpr double kOracleRelTol = 1e-10;
constexpr double kOracleSeconds = 60.0;
constexpr std::size_t kOracleChains = 100;

constexpr std::size_t kRecoveryPersons = 100'000;
constexpr double kRecoverySe = 3.0;
constexpr double kRecoveryMaxFailRate = 0.01;
constexpr double kRecoverySeconds = 120.0;

constexpr std::size_t kPersistencePersons = 100'000;
constexpr double kPersistenceGap = 0.05;

constexpr double kCollapseTol = 1e-10;
constexpr int kCollapseHorizon = 10;

constexpr double kEstimateSumTol = 1e-12;
constexpr double kForecastSumTol = 1e-10;
constexpr std::size_t kNormalizationPanels = 50;

constexpr std::size_t kArPersons = 50'000;
constexpr double kArMinCoverage = 0.95;
constexpr std::uint64_t kArSeed = 2017;

constexpr std::uint64_t kSeed = 20'240'601;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t comparisons = 0, failures = 0;
    for (std::size_t c = 0; c < kOracleChains; ++c) {
        const auto truth = random_chain(mix_seed(kSeed, c), 20, 28, 0.5 + static_cast<double>(c % 4));
        const auto family = truth.lifted_family();
        const auto costs = CostVector::from_thresholds(267'000.0 + 10'000.0 * static_cast<double>(c));
        const int start_age = 21 + static_cast<int>(c % 3);
        for (int s = 0; s < kPairCount; ++s) {
            const auto start = PairState::from_index(s);
            for (int h = 1; h <= 5; ++h) {
                const double lifted = project_cumulative(family, costs, start_age, start, h).cumulative;
                const double exact = enumerate_expectation(truth, costs, start, start_age, h).cumulative;
                const double rel = std::abs(lifted - exact) / std::max(std::abs(lifted), std::abs(exact));
                worst = std::max(worst, rel);
                ++comparisons;
                if (!(rel <= kOracleRelTol))
                    ++failures;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && secs < kOracleSeconds,
            std::to_string(kOracleChains) + " chains, " + std::to_string(comparisons) +
                " comparisons, worst relative error " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

Outcome estimator_recovery() {
    const auto t0 = Clock::now();
    const auto truth = random_chain(mix_seed(kSeed, 1000), 20, 60);
    GenerateOptions opt;
    opt.n_persons = kRecoveryPersons;
    opt.entry_age = 20;
    opt.exit_age = 60;
    const auto panel = generate_panel(truth, opt);
    const auto family = build_order2_family(panel, {22, 60});

    std::size_t cells = 0, failures = 0;
    double worst_z = 0.0;
    for (const auto &[age, est] : family) {
        const auto &p = truth.tensors.at(age);
        for (int i = 0; i < kStateCount; ++i)
            for (int j = 0; j < kStateCount; ++j) {
                const auto hi = state_at(i), hj = state_at(j);
                if (!est.slice_available(hi, hj) || est.low_support(hi, hj))
                    continue;
                const double n = static_cast<double>(est.slice_count(hi, hj));
                for (int k = 0; k < kStateCount; ++k) {
                    const auto idx = TransitionTensor::index(i, j, k);
                    const double se = std::sqrt(p[idx] * (1.0 - p[idx]) / n);
                    const double err = std::abs(est.probs[idx] - p[idx]);
                    ++cells;
                    if (err > kRecoverySe * se) {
                        ++failures;
                    }
                    if (se > 0.0)
                        worst_z = std::max(worst_z, err / se);
                }
            }
    }
    const double rate = cells == 0 ? 1.0 : static_cast<double>(failures) / static_cast<double>(cells);
    const double secs = seconds_since(t0);
    return {cells > 0 && rate <= kRecoveryMaxFailRate && secs < kRecoverySeconds,
            std::to_string(cells) + " supported cells, " + std::to_string(failures) + " outside " +
                fmt(kRecoverySe, 2) + " SE (rate " + fmt(rate, 3) + "), worst |z| " + fmt(worst_z, 3) + ", " +
                fmt(secs, 3) + " s"};
}

Outcome order1_insufficiency() {
    const auto truth = persistence_chain(mix_seed(kSeed, 2000), 20, 60);
    GenerateOptions opt;
    opt.n_persons = kPersistencePersons;
    opt.entry_age = 20;
    opt.exit_age = 60;
    const auto panel = generate_panel(truth, opt);

    const StateSet q5{HealthState::Q5};
    const AgeGroup starts{25, 54};
    const std::vector<StateSet> condition{q5};
    const auto path = multi_year_state_frequency(panel, starts, condition, q5, 5);
    const auto fitted = estimate_order1(panel, AgeGroup{starts.lo + 1, starts.hi + 1});
    const double p11 = fitted(HealthState::Q5, HealthState::Q5);
    const double predicted = std::pow(p11, 5);
    const auto observed = path.points.back().share;
    if (!observed)
        return {false, "no survivors five years ahead"};
    const double gap = *observed - predicted;
    return {gap >= kPersistenceGap, "fitted p(Q5|Q5) " + fmt(p11, 4) + ", predicted 5-year " + fmt(predicted, 4) +
                                        ", simulated " + fmt(*observed, 4) + ", gap " + fmt(100.0 * gap, 3) +
                                        " pp"};
}

Outcome collapse_equivalence() {
    double worst = 0.0;
    std::size_t curves = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto truth = testing::order1_consistent_chain(mix_seed(kSeed, 3000 + s), 20, 45);
        const auto f1 = testing::order1_family_of(truth);
        const auto f2 = truth.lifted_family();
        for (int start_age : {21, 27, 35})
            for (auto target : {StateSet{HealthState::Q5}, StateSet{HealthState::Q4, HealthState::Q5},
                                StateSet{HealthState::Q1}, StateSet{HealthState::Q2, HealthState::Q3}}) {
                const auto c1 = persistency_difference(f1, start_age, kCollapseHorizon, target);
                const auto c2 = persistency_difference(f2, start_age, kCollapseHorizon, target);
                for (int k = 0; k < kCollapseHorizon; ++k)
                    worst = std::max(worst, std::abs(c1.difference[static_cast<std::size_t>(k)] -
                                                     c2.difference[static_cast<std::size_t>(k)]));
                ++curves;
            }
    }
    return {worst <= kCollapseTol,
            std::to_string(curves) + " curve pairs, horizons 1-10, worst gap " + fmt(worst, 3)};
}

Outcome normalization() {
    double worst_est = 0.0, worst_fc = 0.0;
    std::size_t rows = 0, forecasts = 0;
    auto est = [&](double sum) {
        worst_est = std::max(worst_est, std::abs(sum - 1.0));
        ++rows;
    };
    for (std::size_t s = 0; s < kNormalizationPanels; ++s) {
        const auto truth = random_chain(mix_seed(kSeed, 4000 + s), 20, 40, 0.5 + static_cast<double>(s % 5));
        GenerateOptions opt;
        opt.n_persons = 2'000 + 100 * s;
        opt.entry_age = 20;
        opt.exit_age = 40;
        opt.cohort_years = 1 + static_cast<int>(s % 3);
        const auto panel = generate_panel(truth, opt);

        const auto f1 = build_order1_family(panel, {21, 40}, UnavailablePolicy::PoolAgeGroup);
        for (const auto &[age, m] : f1)
            for (int i = 0; i < kStateCount; ++i)
                if (m.available[static_cast<std::size_t>(i)])
                    est(m.probs.row(i).sum());
        const auto t2 = build_order2_family(panel, {22, 40}, UnavailablePolicy::PoolAgeGroup);
        for (const auto &[age, t] : t2)
            for (int sl = 0; sl < kPairCount; ++sl)
                if (t.available[static_cast<std::size_t>(sl)]) {
                    double sum = 0.0;
                    for (int k = 0; k < kStateCount; ++k)
                        sum += t.probs[static_cast<std::size_t>(sl * kStateCount + k)];
                    est(sum);
                }
        const auto lifted = lift_family(t2);
        for (const auto &[age, m] : lifted)
            for (int c = 0; c < kPairCount; ++c)
                if (m.column_available[static_cast<std::size_t>(c)])
                    est(m.probs.col(c).sum());
        for (const auto &g : five_year_groups(20, 40)) {
            const auto f = state_fractions(panel, g);
            double sum = 0.0;
            for (double x : f.fractions)
                sum += x;
            est(sum);
        }

        auto check_forecast = [&](const ForecastDistribution &d) {
            for (const auto &v : d.distributions) {
                worst_fc = std::max(worst_fc, std::abs(v.sum() - 1.0));
                ++forecasts;
            }
        };
        for (int start_age : {21, 25, 30})
            for (auto st : kAllStates) {
                try {
                    check_forecast(iterate_forward(f1, start_age, st, 40 - start_age));
                } catch (const Error &e) {
                    if (e.kind() != ErrorKind::Unavailable)
                        throw;
                }
            }
        for (int start_age : {22, 26, 30})
            for (int c = 0; c < kPairCount; ++c) {
                try {
                    check_forecast(iterate_forward(lifted, start_age, PairState::from_index(c), 40 - start_age));
                } catch (const Error &e) {
                    if (e.kind() != ErrorKind::Unavailable)
                        throw;
                }
            }
    }
    return {rows > 0 && forecasts > 0 && worst_est <= kEstimateSumTol && worst_fc <= kForecastSumTol,
            std::to_string(rows) + " estimated rows/slices/columns (worst " + fmt(worst_est, 3) + "), " +
                std::to_string(forecasts) + " forecast vectors (worst " + fmt(worst_fc, 3) + ")"};
}

Outcome classification_exactness() {
    const StateThresholds th{};
    const std::vector<std::pair<Yen, HealthState>> boundary{
        {0, HealthState::Q1},      {7'800, HealthState::Q1},   {7'801, HealthState::Q2},
        {24'000, HealthState::Q2}, {24'001, HealthState::Q3},  {54'000, HealthState::Q3},
        {54'001, HealthState::Q4}, {266'999, HealthState::Q4}, {267'000, HealthState::Q5}};
    int bad = 0;
    for (const auto &[cost, want] : boundary)
        if (classify_cost(cost, th) != want)
            ++bad;

    // (months observed, total over those months, annual cost worked out by hand, state)
    struct Case {
        int months;
        Yen total;
        Yen annual;
        HealthState state;
    };
    const std::vector<Case> cases{
        {12, 12'000, 12'000, HealthState::Q2},        {6, 3'000, 6'000, HealthState::Q1},
        {12, 1'200'000, 1'200'000, HealthState::Q5},  {7, 1'000, 1'714, HealthState::Q1},
        {6, 1, 2, HealthState::Q1},                   {3, 0, 0, HealthState::Q1},
        {6, 1'300, 2'600, HealthState::Q1},           {11, 7'150, 7'800, HealthState::Q1},
        {11, 7'151, 7'801, HealthState::Q2},          {9, 200'250, 267'000, HealthState::Q5},
        {9, 200'249, 266'999, HealthState::Q4},       {8, 3, 5, HealthState::Q1},
    };
    int bad_cases = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto &c = cases[i];
        // Months run April onward, so long periods wrap into the next calendar year.
        std::vector<ClaimRecord> records;
        for (int m = 0; m < c.months; ++m) {
            ClaimRecord r;
            r.person_id = "A";
            r.age = 40;
            r.month = (3 + m) % 12 + 1;
            r.year = r.month >= 4 ? 2015 : 2016;
            r.cost = m == 0 ? c.total : 0;
            records.push_back(r);
        }
        const auto py = annualize(records, th, YearConvention::Fiscal);
        if (py.annual_cost != c.annual || py.state != c.state || py.months_observed != c.months ||
            py.year != 2015 || annualized_cost(c.total, c.months) != c.annual)
            ++bad_cases;
    }
    return {bad == 0 && bad_cases == 0,
            std::to_string(boundary.size() - static_cast<std::size_t>(bad)) + "/" +
                std::to_string(boundary.size()) + " boundary costs, " +
                std::to_string(cases.size() - static_cast<std::size_t>(bad_cases)) + "/" +
                std::to_string(cases.size()) + " annualization cases"};
}

// Persons observed every year from age 18 to 60 with an autoregressive cost
// process plus a calendar-year shift.
Panel ar_population(const std::vector<double> &coef, double intercept, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> shock(0.0, 100'000.0);
    std::normal_distribution<double> start(1'000'000.0, 120'000.0);
    const int first_age = 18, last_age = 60;
    std::vector<Trajectory> ts;
    ts.reserve(kArPersons);
    for (std::size_t i = 0; i < kArPersons; ++i) {
        const int first_year = 2005 + static_cast<int>(i % 5);
        std::vector<double> y;
        for (std::size_t k = 0; k < coef.size(); ++k)
            y.push_back(start(rng));
        for (int age = first_age + static_cast<int>(coef.size()); age <= last_age; ++age) {
            const int year = first_year + (age - first_age);
            double v = intercept + 3'000.0 * (year - 2005) + shock(rng);
            for (std::size_t k = 0; k < coef.size(); ++k)
                v += coef[k] * y[y.size() - 1 - k];
            y.push_back(v);
        }
        std::vector<Yen> costs;
        for (double v : y)
            costs.push_back(std::max<Yen>(0, std::llround(v)));
        ts.push_back(testing::cost_trajectory(testing::pid(i), first_age, first_year, costs));
    }
    return testing::panel_of(std::move(ts));
}

Outcome ar_recovery() {
    std::string detail;
    bool pass = true;
    const std::vector<std::vector<double>> models{{0.5}, {0.4, 0.2}};
    const std::vector<double> intercepts{500'000.0, 400'000.0};
    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto &coef = models[m];
        const int order = static_cast<int>(coef.size());
        const auto panel = ar_population(coef, intercepts[m], mix_seed(kArSeed, m));
        std::vector<int> covered(coef.size(), 0);
        int ages = 0, joint = 0;
        std::size_t min_n = kArPersons;
        for (int age = 20; age <= 60; ++age) {
            const auto fit = ar_regression(panel, age, order);
            if (!fit.available)
                continue;
            ++ages;
            min_n = std::min(min_n, fit.n);
            bool all = true;
            for (int k = 1; k <= order; ++k) {
                const auto [lo, hi] = fit.lag_interval(k);
                const double truth = coef[static_cast<std::size_t>(k - 1)];
                if (lo <= truth && truth <= hi)
                    ++covered[static_cast<std::size_t>(k - 1)];
                else
                    all = false;
            }
            joint += all ? 1 : 0;
        }
        detail += (m == 0 ? "" : "; ") + std::string("AR(") + std::to_string(order) + ") over " +
                  std::to_string(ages) + " ages (n >= " + std::to_string(min_n) + "): ";
        for (std::size_t k = 0; k < coef.size(); ++k) {
            const double share = ages == 0 ? 0.0 : static_cast<double>(covered[k]) / ages;
            pass = pass && ages > 0 && share >= kArMinCoverage;
            detail += "lag " + std::to_string(k + 1) + " covered " + std::to_string(covered[k]) + "/" +
                      std::to_string(ages) + " ";
        }
        detail += "(all lags jointly " + std::to_string(joint) + "/" + std::to_string(ages) + ")";
    }
    return {pass, detail};
}

// Next-state distribution Binomial(4, theta) over Q1..Q5, which is
// stochastically increasing in theta.
std::array<double, kStateCount> binomial_row(double theta) {
    std::array<double, kStateCount> row{};
    const double c[] = {1, 4, 6, 4, 1};
    for (int k = 0; k < kStateCount; ++k)
        row[static_cast<std::size_t>(k)] = c[k] * std::pow(theta, k) * std::pow(1.0 - theta, 4 - k);
    return row;
}

Outcome shock_sign() {
    std::mt19937_64 rng(mix_seed(kSeed, 5000));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t chains = 0, costs_checked = 0, failures = 0, premise_failures = 0;
    double smallest = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 30; ++c) {
        // theta increasing in both the t-2 and t-1 state, redrawn per age.
        std::map<int, TransitionTensor> tensors;
        for (int age = 21; age <= 45; ++age) {
            std::array<double, 25> score{};
            const double wp = 0.2 + 0.3 * unit(rng), wc = 0.5 + unit(rng);
            for (int i = 0; i < kStateCount; ++i)
                for (int j = 0; j < kStateCount; ++j)
                    score[static_cast<std::size_t>(i * kStateCount + j)] = wp * i + wc * j;
            const double top = wp * 4 + wc * 4;
            const double lo = 0.03 + 0.1 * unit(rng), span = 0.5 + 0.4 * unit(rng) - lo;
            std::array<double, 125> probs{};
            for (int s = 0; s < kPairCount; ++s) {
                const auto row = binomial_row(lo + span * score[static_cast<std::size_t>(s)] / top);
                for (int k = 0; k < kStateCount; ++k)
                    probs[static_cast<std::size_t>(s * kStateCount + k)] = row[static_cast<std::size_t>(k)];
            }
            tensors.emplace(age, TransitionTensor::from_probabilities(AgeGroup::single(age), probs));
        }
        const auto family = lift_family(tensors);
        ++chains;
        for (int start_age : {20, 28, 35}) {
            const int horizon = 45 - start_age;
            const auto shocked = iterate_forward(family, start_age, kShockStart, horizon);
            const auto healthy = iterate_forward(family, start_age, kHealthyStart, horizon);
            // Premise: upper tails of the shocked forecast dominate at every horizon.
            for (int k = 1; k <= horizon; ++k) {
                const Vector5 a = shocked.state_marginal(k), b = healthy.state_marginal(k);
                double ta = 0.0, tb = 0.0;
                for (int s = kStateCount - 1; s > 0; --s) {
                    ta += a(s);
                    tb += b(s);
                    if (ta < tb - 1e-15)
                        ++premise_failures;
                }
            }
            for (int draw = 0; draw < 40; ++draw) {
                // Non-decreasing with plateaus; a constant vector has no shock effect.
                std::array<double, kStateCount> v{};
                v[0] = 5'000.0 * unit(rng);
                for (std::size_t s = 1; s < v.size(); ++s)
                    v[s] = v[s - 1] + (unit(rng) < 0.3 ? 0.0 : 100'000.0 * unit(rng));
                if (v[4] == v[0])
                    v[4] += 1.0;
                const auto costs = CostVector(v);
                for (int h : {1, 5, horizon}) {
                    const double d = shock_cost_difference(family, costs, start_age, h);
                    ++costs_checked;
                    smallest = std::min(smallest, d);
                    if (!(d > 0.0))
                        ++failures;
                }
            }
        }
    }
    return {premise_failures == 0 && failures == 0,
            std::to_string(chains) + " monotone chains, " + std::to_string(costs_checked) +
                " cost vectors x horizons, dominance violations " + std::to_string(premise_failures) +
                ", smallest difference " + fmt(smallest, 4) + " yen"};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome end_to_end_determinism() {
    const fs::path root = fs::temp_directory_path() / ("hshock_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::string> files{"claims.csv",  "truth.json", "panel.csv",  "ingest_summary.json",
                                         "order1.csv",  "order2.csv", "table6.csv", "report_f02.csv"};
    std::vector<std::vector<std::string>> runs;
    for (const char *leaf : {"a", "b"}) {
        const std::string dir = (root / leaf).string();
        std::ostringstream out, err;
        const std::vector<std::vector<std::string>> steps{
            {"synth", "-o", dir, "--seed", "4242", "--set", "synth.n_persons=20000"},
            {"ingest", "-o", dir, "--input", dir + "/claims.csv"},
            {"estimate", "-o", dir},
            {"report", "f02", "-o", dir},
        };
        for (const auto &step : steps)
            if (const int code = cli::run(step, out, err); code != 0) {
                fs::remove_all(root);
                return {false, step[0] + " exited " + std::to_string(code) + ": " + err.str()};
            }
        std::vector<std::string> contents;
        for (const auto &f : files)
            contents.push_back(slurp(root / leaf / f));
        runs.push_back(std::move(contents));
    }
    fs::remove_all(root);
    std::size_t identical = 0, bytes = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!runs[0][i].empty() && runs[0][i] == runs[1][i])
            ++identical;
        bytes += runs[0][i].size();
    }
    return {identical == files.size(), std::to_string(identical) + "/" + std::to_string(files.size()) +
                                           " output files byte-identical (" + std::to_string(bytes) + " bytes)"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 oracle equivalence", oracle_equivalence},
        {"2 order-two estimator recovery", estimator_recovery},
        {"3 order-one insufficiency", order1_insufficiency},
        {"4 collapse equivalence", collapse_equivalence},
        {"5 normalization", normalization},
        {"6 classification and annualization", classification_exactness},
        {"7 autoregression recovery", ar_recovery},
        {"8 shock cost sign", shock_sign},
        {"9 end-to-end determinism", end_to_end_determinism},
    };
    int failed = 0;
    for (const auto &[name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception &e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
