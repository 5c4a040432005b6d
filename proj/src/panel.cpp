#include "hshock/panel.hpp"
#include "hshock/csv.hpp"
#include "hshock/errors.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace hshock {

std::string_view to_string(Sex sex) noexcept { return sex == Sex::Male ? "M" : "F"; }

std::optional<Sex> parse_sex(std::string_view text) noexcept {
    if (text == "M")
        return Sex::Male;
    if (text == "F")
        return Sex::Female;
    return std::nullopt;
}

Panel::Panel(std::vector<Trajectory> trajectories, int final_year)
    : trajectories_(std::move(trajectories)), final_year_(final_year) {
    std::sort(trajectories_.begin(), trajectories_.end(),
              [](const Trajectory &a, const Trajectory &b) { return a.person_id < b.person_id; });
    for (std::size_t k = 0; k < trajectories_.size(); ++k) {
        const auto &t = trajectories_[k];
        if (t.entries.empty() || !t.entries.front().observed())
            throw Error(ErrorKind::InvalidInput,
                        "trajectory of " + t.person_id + " must start with an observed year");
        if (t.last_year() > final_year_)
            throw Error(ErrorKind::InvalidInput,
                        "trajectory of " + t.person_id + " extends past the panel's final year");
        if (k > 0 && trajectories_[k - 1].person_id == t.person_id)
            throw Error(ErrorKind::Duplicate, "person " + t.person_id + " appears twice");
    }
}

std::size_t Panel::observed_count() const noexcept {
    std::size_t n = 0;
    for (const auto &t : trajectories_)
        n += static_cast<std::size_t>(
            std::count_if(t.entries.begin(), t.entries.end(), [](const auto &e) { return e.observed(); }));
    return n;
}

std::size_t Panel::missing_count() const noexcept {
    std::size_t n = 0;
    for (const auto &t : trajectories_)
        n += t.entries.size();
    return n - observed_count();
}

std::optional<std::pair<int, int>> Panel::age_range() const noexcept {
    if (trajectories_.empty())
        return std::nullopt;
    int lo = trajectories_.front().first_age;
    int hi = trajectories_.front().last_age();
    for (const auto &t : trajectories_) {
        lo = std::min(lo, t.first_age);
        hi = std::max(hi, t.last_age());
    }
    return std::pair{lo, hi};
}

std::vector<PersonYear> Panel::flatten() const {
    std::vector<PersonYear> out;
    out.reserve(observed_count());
    for (const auto &t : trajectories_) {
        for (std::size_t k = 0; k < t.entries.size(); ++k) {
            const auto &e = t.entries[k];
            if (!e.observed())
                continue;
            PersonYear py;
            py.person_id = t.person_id;
            py.sex = t.sex;
            py.age = t.first_age + static_cast<int>(k);
            py.year = t.first_year + static_cast<int>(k);
            py.months_observed = e.months_observed;
            py.annual_cost = e.annual_cost;
            py.state = e.state;
            out.push_back(std::move(py));
        }
    }
    return out;
}

Panel build_panel(std::vector<PersonYear> person_years, std::optional<int> final_year) {
    std::sort(person_years.begin(), person_years.end(), [](const PersonYear &a, const PersonYear &b) {
        return a.person_id != b.person_id ? a.person_id < b.person_id : a.year < b.year;
    });

    int last_year = final_year.value_or(0);
    if (!final_year) {
        for (const auto &py : person_years)
            last_year = std::max(last_year, py.year);
    }

    std::vector<Trajectory> trajectories;
    auto it = person_years.begin();
    while (it != person_years.end()) {
        auto end = std::find_if(it, person_years.end(),
                                [&](const PersonYear &py) { return py.person_id != it->person_id; });

        int offset = it->age - it->year;
        for (auto p = it; p != end; ++p) {
            if (p->months_observed < 1 || p->months_observed > 12)
                throw Error(ErrorKind::InvalidInput, "months_observed must be in 1..12 for person " +
                                                         p->person_id);
            if (p->sex != it->sex)
                throw Error(ErrorKind::InvalidInput, "sex changes across years for person " +
                                                         p->person_id);
            if (std::next(p) != end && std::next(p)->year == p->year)
                throw Error(ErrorKind::Duplicate, "duplicate person-year for person " + p->person_id +
                                                      ", year " + std::to_string(p->year));
            offset = std::min(offset, p->age - p->year);
        }
        for (auto p = it; p != end; ++p) {
            if (p->age - p->year > offset + 1)
                throw Error(ErrorKind::InvalidInput,
                            "ages of person " + p->person_id + " are inconsistent with years");
        }

        Trajectory t;
        t.person_id = it->person_id;
        t.sex = it->sex;
        t.first_year = it->year;
        t.first_age = it->year + offset;
        const int span_end = std::max(last_year, std::prev(end)->year);
        if (span_end > last_year)
            throw Error(ErrorKind::InvalidInput,
                        "person " + t.person_id + " observed after the panel's final year");
        t.entries.assign(static_cast<std::size_t>(span_end - t.first_year + 1), PanelEntry{});
        for (auto p = it; p != end; ++p) {
            auto &e = t.entries[static_cast<std::size_t>(p->year - t.first_year)];
            e.annual_cost = p->annual_cost;
            e.months_observed = static_cast<std::uint8_t>(p->months_observed);
            e.state = p->state;
        }
        trajectories.push_back(std::move(t));
        it = end;
    }
    return Panel(std::move(trajectories), last_year);
}

Panel filter_cohort(const Panel &panel, std::optional<Sex> sex, int age_min, int age_max) {
    if (age_min > age_max)
        throw Error(ErrorKind::InvalidArgument, "age_min must not exceed age_max");
    std::vector<Trajectory> kept;
    for (const auto &t : panel.trajectories()) {
        if (sex && t.sex != *sex)
            continue;
        int first = std::max(age_min, t.first_age);
        const int last = std::min(age_max, t.last_age());
        while (first <= last && !t.at_age(first)->observed())
            ++first;
        if (first > last)
            continue;
        Trajectory out;
        out.person_id = t.person_id;
        out.sex = t.sex;
        out.first_age = first;
        out.first_year = t.first_year + (first - t.first_age);
        const auto begin = t.entries.begin() + (first - t.first_age);
        out.entries.assign(begin, begin + (last - first + 1));
        kept.push_back(std::move(out));
    }
    return Panel(std::move(kept), panel.final_year());
}

Panel reclassify(const Panel &panel, const StateThresholds &thresholds) {
    std::vector<Trajectory> out(panel.trajectories().begin(), panel.trajectories().end());
    for (auto &t : out) {
        for (auto &e : t.entries) {
            if (e.observed())
                e.state = classify_cost(e.annual_cost, thresholds);
        }
    }
    return Panel(std::move(out), panel.final_year());
}

namespace {
constexpr std::string_view kCacheHeader = "person_id,sex,age,year,months_observed,annual_cost,state";
}

void write_panel_cache(const Panel &panel, std::ostream &out) {
    out << kCacheHeader << '\n';
    for (const auto &t : panel.trajectories()) {
        for (std::size_t k = 0; k < t.entries.size(); ++k) {
            const auto &e = t.entries[k];
            out << t.person_id << ',' << to_string(t.sex) << ',' << t.first_age + static_cast<int>(k)
                << ',' << t.first_year + static_cast<int>(k) << ',';
            if (e.observed())
                out << static_cast<int>(e.months_observed) << ',' << e.annual_cost << ','
                    << to_string(e.state) << '\n';
            else
                out << "0,,MISSING\n";
        }
    }
}

Panel read_panel_cache(std::istream &in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(ErrorKind::Parse, 1, "missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kCacheHeader)
        throw ParseError(ErrorKind::Parse, 1, "header must be '" + std::string(kCacheHeader) + "'");

    std::vector<Trajectory> trajectories;
    std::vector<std::string_view> f;
    std::size_t line_no = 1;
    int final_year = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        csv::split(line, f);
        if (f.size() != 7)
            throw ParseError(ErrorKind::Parse, line_no, "expected 7 fields");
        auto sex = parse_sex(f[1]);
        auto age = csv::parse_int<int>(f[2]);
        auto year = csv::parse_int<int>(f[3]);
        auto months = csv::parse_int<int>(f[4]);
        if (f[0].empty() || !sex || !age || !year || !months)
            throw ParseError(ErrorKind::Parse, line_no, "malformed panel row");

        PanelEntry e;
        if (f[6] == "MISSING") {
            if (*months != 0 || !f[5].empty())
                throw ParseError(ErrorKind::Parse, line_no,
                                 "missing rows need months_observed 0 and an empty cost");
        } else {
            auto cost = csv::parse_int<Yen>(f[5]);
            auto state = parse_state(f[6]);
            if (!cost || *cost < 0 || !state || *months < 1 || *months > 12)
                throw ParseError(ErrorKind::Parse, line_no, "malformed observed panel row");
            e.annual_cost = *cost;
            e.months_observed = static_cast<std::uint8_t>(*months);
            e.state = *state;
        }
        final_year = std::max(final_year, *year);

        if (trajectories.empty() || trajectories.back().person_id != f[0]) {
            if (!e.observed())
                throw ParseError(ErrorKind::Parse, line_no, "trajectory starts with a missing row");
            Trajectory t;
            t.person_id = std::string(f[0]);
            t.sex = *sex;
            t.first_age = *age;
            t.first_year = *year;
            trajectories.push_back(std::move(t));
        }
        auto &t = trajectories.back();
        const int k = static_cast<int>(t.entries.size());
        if (*year != t.first_year + k || *age != t.first_age + k || *sex != t.sex)
            throw ParseError(ErrorKind::Parse, line_no,
                             "rows of a person must be contiguous consecutive years");
        t.entries.push_back(e);
    }
    return Panel(std::move(trajectories), final_year);
}

} // namespace hshock
