#pragma once

#include "hshock/health_state.hpp"
#include "hshock/panel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace hshock {

/// One monthly receipt.
struct ClaimRecord {
    std::string person_id;
    Sex sex = Sex::Male;
    int age = 0;
    int year = 0;
    int month = 1;
    Yen cost = 0;

    bool operator==(const ClaimRecord &) const = default;
};

inline constexpr std::string_view kClaimsHeader = "person_id,sex,age,year,month,cost_yen";

/// Fiscal years run April to March and are named after the April year.
enum class YearConvention { Fiscal, Calendar };

std::optional<YearConvention> parse_year_convention(std::string_view text) noexcept;

/// Year of the annualization period a (year, month) receipt belongs to.
constexpr int period_year(int year, int month, YearConvention convention) noexcept {
    if (convention == YearConvention::Fiscal && month < 4)
        return year - 1;
    return year;
}

/// Streaming reader over the claims CSV. Rows are yielded in input order.
/// Duplicate (person, year, month) rows are caught while a person's rows are
/// contiguous, so memory stays proportional to one person's history.
class ClaimReader {
public:
    /// Reads and validates the header. Throws ParseError on a bad header.
    explicit ClaimReader(std::istream &in);

    /// Next record, or nullopt at end of input. Throws ParseError on a
    /// malformed row and on a duplicate.
    std::optional<ClaimRecord> next();

    /// 1-based line number of the last row returned.
    std::size_t line() const noexcept { return line_; }

private:
    std::istream &in_;
    std::string buffer_;
    std::size_t line_ = 1;
    std::string current_person_;
    std::unordered_set<int> seen_months_;
};

/// Reads a whole claims stream into memory. Intended for small inputs and
/// tests; the ingest pipeline consumes the reader directly.
std::vector<ClaimRecord> parse_claims(std::istream &in);

/// average monthly cost x 12, rounded half-up to integer yen. `months` in 1..12.
Yen annualized_cost(Yen total_cost, int months);

/// Converts 1..12 records sharing (person, period year) into a person-year.
/// The person-year's age is the smallest age among the records. Throws
/// InvalidArgument when empty or when records disagree on person, sex or
/// period, and Duplicate when a month repeats.
PersonYear annualize(std::span<const ClaimRecord> records, const StateThresholds &thresholds,
                     YearConvention convention = YearConvention::Fiscal);

struct IngestOptions {
    StateThresholds thresholds{};
    YearConvention convention = YearConvention::Fiscal;
    std::optional<int> final_year;
};

struct IngestSummary {
    std::size_t records = 0;
    std::size_t persons = 0;
    std::size_t person_years = 0;
    std::size_t missing_markers = 0;

    /// Share of trajectory slots that are missing markers.
    double missing_share() const noexcept {
        const auto slots = person_years + missing_markers;
        return slots == 0 ? 0.0 : static_cast<double>(missing_markers) / static_cast<double>(slots);
    }
};

struct IngestResult {
    Panel panel;
    IngestSummary summary;
};

/// parse -> annualize -> build_panel over a claims stream. Duplicate months
/// are reported with the line of the repeated row even when a person's rows
/// are not contiguous.
IngestResult ingest_claims(std::istream &in, const IngestOptions &options = {});

} // namespace hshock
