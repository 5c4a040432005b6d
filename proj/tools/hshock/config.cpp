#include "config.hpp"

#include "hshock/csv.hpp"
#include "hshock/errors.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace hshock::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string &key, const std::string &value, const std::string &expected) {
    throw Error(ErrorKind::InvalidConfiguration, "setting '" + key + "' = '" + value + "': expected " + expected);
}

std::vector<std::string> split_list(const std::string &value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

template <typename Int>
Int to_int(const std::string &key, const std::string &value) {
    auto v = csv::parse_int<Int>(trim(value));
    if (!v)
        bad(key, value, "an integer");
    return *v;
}

double to_double(const std::string &key, const std::string &value) {
    auto v = csv::parse_double(trim(value));
    if (!v)
        bad(key, value, "a number");
    return *v;
}

bool to_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    bad(key, value, "true or false");
}

AgeGroup to_group(const std::string &key, const std::string &value) {
    const auto dash = value.find('-');
    if (dash == std::string::npos)
        bad(key, value, "an age range like 55-59");
    auto lo = csv::parse_int<int>(trim(value.substr(0, dash)));
    auto hi = csv::parse_int<int>(trim(value.substr(dash + 1)));
    if (!lo || !hi || *lo > *hi)
        bad(key, value, "an age range like 55-59");
    return {*lo, *hi};
}

using Handler = std::function<void(RunConfig &, const std::string &, const std::string &)>;

struct KeySpec {
    const char *key;
    const char *default_value;
    Handler apply;
};

const std::vector<KeySpec> &key_specs() {
    static const std::vector<KeySpec> specs = {
        {"input", "", [](RunConfig &c, auto &, auto &v) { c.input = v; }},
        {"panel", "<output_dir>/panel.csv", [](RunConfig &c, auto &, auto &v) { c.panel = v; }},
        {"output_dir", "out", [](RunConfig &c, auto &, auto &v) { c.output_dir = v; }},
        {"thresholds", "7800,24000,54000,266999",
         [](RunConfig &c, auto &k, auto &v) {
             auto items = split_list(v);
             if (items.size() != kStateCount - 1)
                 bad(k, v, "four upper bounds");
             std::array<Yen, kStateCount - 1> b{};
             for (std::size_t i = 0; i < b.size(); ++i)
                 b[i] = to_int<Yen>(k, items[i]);
             c.thresholds = StateThresholds(b);
         }},
        {"cohort.sex", "M",
         [](RunConfig &c, auto &k, auto &v) {
             if (v == "any" || v == "all")
                 c.sex.reset();
             else if (auto s = parse_sex(v))
                 c.sex = *s;
             else
                 bad(k, v, "M, F or any");
         }},
        {"cohort.age_min", "0", [](RunConfig &c, auto &k, auto &v) { c.age_min = to_int<int>(k, v); }},
        {"cohort.age_max", "59", [](RunConfig &c, auto &k, auto &v) { c.age_max = to_int<int>(k, v); }},
        {"year_convention", "fiscal",
         [](RunConfig &c, auto &k, auto &v) {
             auto y = parse_year_convention(v);
             if (!y)
                 bad(k, v, "fiscal or calendar");
             c.convention = *y;
         }},
        {"q5_values", "267000",
         [](RunConfig &c, auto &k, auto &v) {
             c.q5_values.clear();
             for (auto &item : split_list(v))
                 c.q5_values.push_back(to_double(k, item));
         }},
        {"horizon", "10", [](RunConfig &c, auto &k, auto &v) { c.horizon = to_int<int>(k, v); }},
        {"min_cell_count", "30",
         [](RunConfig &c, auto &k, auto &v) { c.min_cell_count = to_int<std::int64_t>(k, v); }},
        {"lift.past_summed", "false",
         [](RunConfig &c, auto &k, auto &v) { c.past_summed_lift = to_bool(k, v); }},
        {"unavailable_policy", "error",
         [](RunConfig &c, auto &k, auto &v) {
             if (v == "error")
                 c.unavailable_policy = UnavailablePolicy::Error;
             else if (v == "pool")
                 c.unavailable_policy = UnavailablePolicy::PoolAgeGroup;
             else
                 bad(k, v, "error or pool");
         }},
        {"report.start_ages", "25,35,45,55",
         [](RunConfig &c, auto &k, auto &v) {
             c.start_ages.clear();
             for (auto &item : split_list(v))
                 c.start_ages.push_back(to_int<int>(k, item));
         }},
        {"report.age_group", "55-59", [](RunConfig &c, auto &k, auto &v) { c.focus_group = to_group(k, v); }},
        {"report.quantiles", "0.1,0.25,0.5,0.75,0.9",
         [](RunConfig &c, auto &k, auto &v) {
             c.quantiles.clear();
             for (auto &item : split_list(v))
                 c.quantiles.push_back(to_double(k, item));
         }},
        {"report.exceedance", "500000,1000000",
         [](RunConfig &c, auto &k, auto &v) {
             c.exceedance.clear();
             for (auto &item : split_list(v))
                 c.exceedance.push_back(to_int<Yen>(k, item));
         }},
        {"ar.log_transform", "false", [](RunConfig &c, auto &k, auto &v) { c.ar_log = to_bool(k, v); }},
        {"project.start_age", "(every covered age)",
         [](RunConfig &c, auto &k, auto &v) { c.project_start_age = to_int<int>(k, v); }},
        {"project.start_pair", "Q1>Q5",
         [](RunConfig &c, auto &k, auto &v) {
             auto p = PairState::parse(v);
             if (!p)
                 bad(k, v, "a pair like Q1>Q5");
             c.project_start = *p;
         }},
        {"seed", "1", [](RunConfig &c, auto &k, auto &v) { c.seed = to_int<std::uint64_t>(k, v); }},
        {"synth.n_persons", "10000",
         [](RunConfig &c, auto &k, auto &v) { c.n_persons = to_int<std::size_t>(k, v); }},
        {"synth.entry_age", "20", [](RunConfig &c, auto &k, auto &v) { c.entry_age = to_int<int>(k, v); }},
        {"synth.exit_age", "59", [](RunConfig &c, auto &k, auto &v) { c.exit_age = to_int<int>(k, v); }},
        {"synth.base_year", "2005", [](RunConfig &c, auto &k, auto &v) { c.base_year = to_int<int>(k, v); }},
        {"synth.cohort_years", "1",
         [](RunConfig &c, auto &k, auto &v) { c.cohort_years = to_int<int>(k, v); }},
        {"synth.attrition", "0.05",
         [](RunConfig &c, auto &k, auto &v) {
             c.attrition = to_double(k, v);
             if (c.attrition < 0.0 || c.attrition > 1.0)
                 bad(k, v, "a probability");
         }},
        {"synth.truth", "(built-in persistence chain)", [](RunConfig &c, auto &, auto &v) { c.truth = v; }},
    };
    return specs;
}

} // namespace

void Settings::load_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::InvalidConfiguration, "cannot open config file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::InvalidConfiguration,
                        path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
}

void Settings::set(const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw Error(ErrorKind::InvalidConfiguration, "expected key=value, got '" + assignment + "'");
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::optional<std::string> Settings::get(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return std::nullopt;
    return it->second;
}

RunConfig make_config(const Settings &settings) {
    RunConfig config;
    for (const auto &[key, value] : settings.values()) {
        const auto &specs = key_specs();
        auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec &s) { return key == s.key; });
        if (it == specs.end())
            throw Error(ErrorKind::InvalidConfiguration, "unknown setting '" + key + "'");
        it->apply(config, key, value);
    }
    if (config.age_min > config.age_max)
        throw Error(ErrorKind::InvalidConfiguration, "cohort.age_min exceeds cohort.age_max");
    if (config.horizon < 1)
        throw Error(ErrorKind::InvalidConfiguration, "horizon must be at least one year");
    return config;
}

std::string describe_keys() {
    std::string out = "Settings (config file `key = value`, or --set key=value):\n";
    for (const auto &s : key_specs()) {
        out += "  ";
        out += s.key;
        if (*s.default_value) {
            out += " [";
            out += s.default_value;
            out += "]";
        }
        out += '\n';
    }
    return out;
}

} // namespace hshock::cli
