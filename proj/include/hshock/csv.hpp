#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hshock::csv {

/// Splits an unquoted CSV line. A trailing '\r' is dropped.
inline void split(std::string_view line, std::vector<std::string_view> &fields) {
    fields.clear();
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename Int>
std::optional<Int> parse_int(std::string_view text) {
    Int value{};
    const auto *first = text.data();
    const auto *last = text.data() + text.size();
    if (first != last && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last)
        return std::nullopt;
    return value;
}

inline std::optional<double> parse_double(std::string_view text) {
    double value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        return std::nullopt;
    return value;
}

/// Shortest round-trip representation; identical bytes on every platform
/// with a conforming std::to_chars.
inline std::string format(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

inline std::string format(std::int64_t value) { return std::to_string(value); }

/// Empty field for an unavailable value.
inline std::string format(const std::optional<double> &value) {
    return value ? format(*value) : std::string{};
}

} // namespace hshock::csv
