#pragma once

#include "hshock/estimation.hpp"
#include "hshock/health_state.hpp"
#include "hshock/ingestion.hpp"
#include "hshock/lifted_chain.hpp"
#include "hshock/panel.hpp"
#include "hshock/persistency.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hshock::cli {

/// Flat "dotted.key = value" settings. Later sources override earlier ones.
class Settings {
public:
    /// Parses lines of `key = value`; '#' starts a comment. Throws
    /// InvalidConfiguration naming the offending line.
    void load_file(const std::filesystem::path &path);

    /// "key=value"
    void set(const std::string &assignment);
    void set(const std::string &key, const std::string &value) { values_[key] = value; }

    std::optional<std::string> get(const std::string &key) const;
    const std::map<std::string, std::string> &values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

struct RunConfig {
    std::filesystem::path input;
    std::filesystem::path panel;
    std::filesystem::path output_dir = "out";

    StateThresholds thresholds{};
    std::optional<Sex> sex = Sex::Male;
    int age_min = 0;
    int age_max = 59;
    YearConvention convention = YearConvention::Fiscal;

    std::vector<double> q5_values{267'000.0};
    int horizon = 10;
    std::int64_t min_cell_count = kDefaultMinCellCount;
    bool past_summed_lift = false;
    UnavailablePolicy unavailable_policy = UnavailablePolicy::Error;

    std::vector<int> start_ages{25, 35, 45, 55};
    AgeGroup focus_group{55, 59};
    std::vector<double> quantiles{0.1, 0.25, 0.5, 0.75, 0.9};
    std::vector<Yen> exceedance{500'000, 1'000'000};
    bool ar_log = false;

    std::optional<int> project_start_age;
    PairState project_start = kShockStart;

    std::uint64_t seed = 1;
    std::size_t n_persons = 10'000;
    int entry_age = 20;
    int exit_age = 59;
    int base_year = 2005;
    int cohort_years = 1;
    double attrition = 0.05;
    std::filesystem::path truth;

    std::filesystem::path panel_path() const { return panel.empty() ? output_dir / "panel.csv" : panel; }

    LiftFormula lift_formula() const {
        return past_summed_lift ? LiftFormula::PastSummed : LiftFormula::Conditional;
    }
};

/// Builds a RunConfig from settings; unknown keys and malformed values throw
/// InvalidConfiguration.
RunConfig make_config(const Settings &settings);

/// Keys make_config understands, with their defaults, for --help output.
std::string describe_keys();

} // namespace hshock::cli
