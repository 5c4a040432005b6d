#pragma once

#include "hshock/health_state.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hshock {

enum class Sex : std::uint8_t { Male, Female };

std::string_view to_string(Sex sex) noexcept;
std::optional<Sex> parse_sex(std::string_view text) noexcept;

/// One subject's annualized cost at one age/year.
struct PersonYear {
    std::string person_id;
    Sex sex = Sex::Male;
    int age = 0;
    int year = 0;
    int months_observed = 0;
    Yen annual_cost = 0;
    HealthState state = HealthState::Q1;

    bool operator==(const PersonYear &) const = default;
};

/// A year slot inside a trajectory. months_observed == 0 marks a year in
/// which the subject was not in the database (attrition or a gap), which is
/// distinct from an observed year with zero cost.
struct PanelEntry {
    Yen annual_cost = 0;
    std::uint8_t months_observed = 0;
    HealthState state = HealthState::Q1;

    bool observed() const noexcept { return months_observed > 0; }
    bool operator==(const PanelEntry &) const = default;
};

/// Consecutive years of one subject. entries[k] is at year first_year + k and
/// age first_age + k. The first entry is always observed; missing entries may
/// sit between observed ones and trail up to the panel's final year.
struct Trajectory {
    std::string person_id;
    Sex sex = Sex::Male;
    int first_year = 0;
    int first_age = 0;
    std::vector<PanelEntry> entries;

    int last_age() const noexcept { return first_age + static_cast<int>(entries.size()) - 1; }
    int last_year() const noexcept { return first_year + static_cast<int>(entries.size()) - 1; }

    /// Entry at `age`, or nullptr when the age lies outside the trajectory.
    const PanelEntry *at_age(int age) const noexcept {
        const int k = age - first_age;
        if (k < 0 || k >= static_cast<int>(entries.size()))
            return nullptr;
        return &entries[static_cast<std::size_t>(k)];
    }

    /// State at `age` if observed.
    std::optional<HealthState> state_at_age(int age) const noexcept {
        const auto *e = at_age(age);
        if (e == nullptr || !e->observed())
            return std::nullopt;
        return e->state;
    }

    bool operator==(const Trajectory &) const = default;
};

/// Per-person trajectories ordered by person_id.
class Panel {
public:
    Panel() = default;
    Panel(std::vector<Trajectory> trajectories, int final_year);

    std::span<const Trajectory> trajectories() const noexcept { return trajectories_; }
    int final_year() const noexcept { return final_year_; }
    bool empty() const noexcept { return trajectories_.empty(); }
    std::size_t person_count() const noexcept { return trajectories_.size(); }
    std::size_t observed_count() const noexcept;
    std::size_t missing_count() const noexcept;

    /// Smallest and largest age covered by any entry; nullopt on an empty panel.
    std::optional<std::pair<int, int>> age_range() const noexcept;

    /// Observed person-years in trajectory order.
    std::vector<PersonYear> flatten() const;

    bool operator==(const Panel &) const = default;

private:
    std::vector<Trajectory> trajectories_;
    int final_year_ = 0;
};

/// Groups person-years by person, orders them by year and inserts missing
/// markers for gaps and for attrition up to `final_year` (defaults to the
/// latest year present). Ages are anchored on each person's smallest
/// age-minus-year offset; a person-year more than one year off that anchor is
/// rejected as invalid input. Throws Duplicate on a repeated (person, year).
Panel build_panel(std::vector<PersonYear> person_years, std::optional<int> final_year = std::nullopt);

/// Keeps person-years of the given sex (any when nullopt) whose age lies in
/// [age_min, age_max]. Missing markers outside the range are dropped, as are
/// trajectories left without an observed year.
Panel filter_cohort(const Panel &panel, std::optional<Sex> sex, int age_min, int age_max);

/// Recomputes every observed entry's state under `thresholds`.
Panel reclassify(const Panel &panel, const StateThresholds &thresholds);

/// Panel cache: person_id,sex,age,year,months_observed,annual_cost,state with
/// one row per trajectory slot; missing slots have months_observed 0, an empty
/// annual_cost and state MISSING.
void write_panel_cache(const Panel &panel, std::ostream &out);
Panel read_panel_cache(std::istream &in);

} // namespace hshock
