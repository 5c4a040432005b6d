#include "hshock/ingestion.hpp"
#include "hshock/csv.hpp"
#include "hshock/errors.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <unordered_map>

namespace hshock {

std::optional<YearConvention> parse_year_convention(std::string_view text) noexcept {
    if (text == "fiscal")
        return YearConvention::Fiscal;
    if (text == "calendar")
        return YearConvention::Calendar;
    return std::nullopt;
}

namespace {

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r')
        s.remove_suffix(1);
    return s;
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

ClaimRecord parse_row(std::string_view line, std::size_t line_no,
                      std::vector<std::string_view> &fields) {
    csv::split(line, fields);
    if (fields.size() != 6)
        throw ParseError(ErrorKind::Parse, line_no,
                         "expected 6 fields, found " + std::to_string(fields.size()));
    ClaimRecord r;
    if (fields[0].empty())
        throw ParseError(ErrorKind::Parse, line_no, "empty person_id");
    r.person_id = std::string(fields[0]);

    auto sex = parse_sex(fields[1]);
    if (!sex)
        throw ParseError(ErrorKind::Parse, line_no, "sex must be M or F");
    r.sex = *sex;

    auto age = csv::parse_int<int>(fields[2]);
    if (!age || *age < 0 || *age > 120)
        throw ParseError(ErrorKind::Parse, line_no, "age must be an integer in 0..120");
    r.age = *age;

    auto year = csv::parse_int<int>(fields[3]);
    if (!year)
        throw ParseError(ErrorKind::Parse, line_no, "year must be an integer");
    r.year = *year;

    auto month = csv::parse_int<int>(fields[4]);
    if (!month || *month < 1 || *month > 12)
        throw ParseError(ErrorKind::Parse, line_no, "month must be an integer in 1..12");
    r.month = *month;

    auto cost = csv::parse_int<Yen>(fields[5]);
    if (!cost || *cost < 0)
        throw ParseError(ErrorKind::Parse, line_no, "cost_yen must be a non-negative integer");
    r.cost = *cost;
    return r;
}

} // namespace

ClaimReader::ClaimReader(std::istream &in) : in_(in) {
    if (!std::getline(in_, buffer_))
        throw ParseError(ErrorKind::Parse, 1, "missing header");
    if (strip_cr(buffer_) != kClaimsHeader)
        throw ParseError(ErrorKind::Parse, 1,
                         "header must be '" + std::string(kClaimsHeader) + "'");
}

std::optional<ClaimRecord> ClaimReader::next() {
    static thread_local std::vector<std::string_view> fields;
    while (std::getline(in_, buffer_)) {
        ++line_;
        if (blank(buffer_))
            continue;
        auto record = parse_row(buffer_, line_, fields);
        if (record.person_id != current_person_) {
            current_person_ = record.person_id;
            seen_months_.clear();
        }
        if (!seen_months_.insert(record.year * 16 + record.month).second)
            throw ParseError(ErrorKind::Duplicate, line_,
                             "duplicate record for person " + record.person_id + ", year " +
                                 std::to_string(record.year) + ", month " +
                                 std::to_string(record.month));
        return record;
    }
    return std::nullopt;
}

std::vector<ClaimRecord> parse_claims(std::istream &in) {
    ClaimReader reader(in);
    std::vector<ClaimRecord> out;
    while (auto r = reader.next())
        out.push_back(std::move(*r));
    return out;
}

Yen annualized_cost(Yen total_cost, int months) {
    if (months < 1 || months > 12)
        throw Error(ErrorKind::InvalidArgument, "months observed must be in 1..12");
    if (total_cost < 0)
        throw Error(ErrorKind::InvalidInput, "total cost must be non-negative");
    // floor(total * 12 / months + 1/2) in exact integer arithmetic.
    return (24 * total_cost + months) / (2 * static_cast<Yen>(months));
}

PersonYear annualize(std::span<const ClaimRecord> records, const StateThresholds &thresholds,
                     YearConvention convention) {
    if (records.empty())
        throw Error(ErrorKind::InvalidArgument,
                    "cannot annualize a person-year without records; emit a missing marker");
    if (records.size() > 12)
        throw Error(ErrorKind::InvalidArgument, "more than 12 monthly records in one person-year");

    const auto &first = records.front();
    const int period = period_year(first.year, first.month, convention);
    unsigned month_mask = 0;
    Yen total = 0;
    int age = first.age;
    for (const auto &r : records) {
        if (r.person_id != first.person_id || r.sex != first.sex ||
            period_year(r.year, r.month, convention) != period)
            throw Error(ErrorKind::InvalidArgument,
                        "records of one person-year must share person, sex and year");
        const unsigned bit = 1u << r.month;
        if (month_mask & bit)
            throw Error(ErrorKind::Duplicate, "duplicate month " + std::to_string(r.month) +
                                                  " for person " + r.person_id);
        month_mask |= bit;
        total += r.cost;
        age = std::min(age, r.age);
    }

    PersonYear py;
    py.person_id = first.person_id;
    py.sex = first.sex;
    py.age = age;
    py.year = period;
    py.months_observed = static_cast<int>(records.size());
    py.annual_cost = annualized_cost(total, py.months_observed);
    py.state = classify_cost(py.annual_cost, thresholds);
    return py;
}

namespace {

struct MonthAccumulator {
    Sex sex = Sex::Male;
    int age = 0;
    int months = 0;
    unsigned month_mask = 0;
    Yen total = 0;
};

} // namespace

IngestResult ingest_claims(std::istream &in, const IngestOptions &options) {
    ClaimReader reader(in);
    // person -> period year -> accumulator. std::map keeps output order stable.
    std::unordered_map<std::string, std::map<int, MonthAccumulator>> accumulators;
    IngestSummary summary;

    while (auto record = reader.next()) {
        ++summary.records;
        auto &per_person = accumulators[record->person_id];
        const int period = period_year(record->year, record->month, options.convention);
        auto [it, inserted] = per_person.try_emplace(period);
        auto &acc = it->second;
        if (inserted) {
            acc.sex = record->sex;
            acc.age = record->age;
        } else if (acc.sex != record->sex) {
            throw ParseError(ErrorKind::Parse, reader.line(),
                             "sex changes within a year for person " + record->person_id);
        }
        const unsigned bit = 1u << record->month;
        if (acc.month_mask & bit)
            throw ParseError(ErrorKind::Duplicate, reader.line(),
                             "duplicate record for person " + record->person_id + ", year " +
                                 std::to_string(record->year) + ", month " +
                                 std::to_string(record->month));
        acc.month_mask |= bit;
        acc.months += 1;
        acc.total += record->cost;
        acc.age = std::min(acc.age, record->age);
    }

    std::vector<PersonYear> person_years;
    for (auto &[person, periods] : accumulators) {
        for (const auto &[period, acc] : periods) {
            PersonYear py;
            py.person_id = person;
            py.sex = acc.sex;
            py.age = acc.age;
            py.year = period;
            py.months_observed = acc.months;
            py.annual_cost = annualized_cost(acc.total, acc.months);
            py.state = classify_cost(py.annual_cost, options.thresholds);
            person_years.push_back(std::move(py));
        }
    }
    accumulators.clear();

    IngestResult result;
    result.panel = build_panel(std::move(person_years), options.final_year);
    summary.persons = result.panel.person_count();
    summary.person_years = result.panel.observed_count();
    summary.missing_markers = result.panel.missing_count();
    result.summary = summary;
    return result;
}

} // namespace hshock
