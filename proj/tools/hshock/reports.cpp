#include "commands.hpp"

#include "hshock/csv.hpp"
#include "hshock/errors.hpp"
#include "hshock/estimation.hpp"
#include "hshock/lifted_chain.hpp"
#include "hshock/persistency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <ostream>

namespace hshock::cli {

namespace {

using csv::format;

void line(std::ostream &out, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto &f : fields) {
        if (!first)
            out << ',';
        out << f;
        first = false;
    }
    out << '\n';
}

std::string path_label(std::span<const StateSet> sets) {
    std::string out;
    for (const auto &s : sets) {
        if (!out.empty())
            out += '>';
        out += s.label();
    }
    return out;
}

std::string category_label(int c) {
    return c == kMissingCategory ? std::string("MISSING") : std::string(to_string(state_at(c)));
}

std::string opt(const std::optional<double> &v) { return format(v); }

struct Context {
    const Panel &cohort;
    const RunConfig &config;
    std::ostream &csv;
    std::ostream &log;
    int age_lo;
    int age_hi;

    std::vector<AgeGroup> groups() const { return five_year_groups(age_lo, age_hi); }

    Order1Family order1() const {
        return build_order1_family(cohort, {age_lo + 1, age_hi}, config.unavailable_policy);
    }
    LiftedFamily order2() const {
        return lift_family(build_order2_family(cohort, {age_lo + 2, age_hi}, config.unavailable_policy),
                           config.lift_formula());
    }
};

void categories(const Context &c, std::vector<StateSet> condition) {
    line(c.csv, {"age", "condition", "category", "count", "conditioned", "share"});
    const auto curve = shock_frequency(c.cohort, condition, StateSet::all());
    for (const auto &p : curve.points)
        for (int k = 0; k < kCategoryCount; ++k)
            line(c.csv, {std::to_string(p.age), path_label(condition), category_label(k),
                         std::to_string(p.category_counts[static_cast<std::size_t>(k)]),
                         std::to_string(p.conditioned), format(p.share(k))});
}

void target_curve(const Context &c, std::vector<StateSet> condition, StateSet target) {
    line(c.csv, {"age", "condition", "target", "conditioned", "in_target", "share", "share_observed"});
    const auto curve = shock_frequency(c.cohort, condition, target);
    for (const auto &p : curve.points)
        line(c.csv, {std::to_string(p.age), path_label(condition), target.label(), std::to_string(p.conditioned),
                     std::to_string(p.in_target), format(p.target_share()), opt(p.target_share_observed())});
}

void persistence_header(const Context &c) {
    line(c.csv, {"age_group", "start_condition", "target", "years_ahead", "starts", "survivors", "in_target",
                 "share"});
}

void persistence_rows(const Context &c, AgeGroup g, std::vector<StateSet> start, StateSet target) {
    const auto path = multi_year_state_frequency(c.cohort, g, start, target, c.config.horizon);
    for (const auto &p : path.points)
        line(c.csv, {g.label(), path_label(start), target.label(), std::to_string(p.years_ahead),
                     std::to_string(path.starts), std::to_string(p.survivors), std::to_string(p.in_target),
                     opt(p.share)});
}

void k01(const Context &c) {
    persistence_header(c);
    for (const auto &g : c.groups())
        persistence_rows(c, g, {StateSet{HealthState::Q5}}, StateSet{HealthState::Q5});
}

void k02(const Context &c) {
    persistence_header(c);
    const StateSet q5{HealthState::Q5};
    const std::array<StateSet, 3> priors{StateSet{HealthState::Q1, HealthState::Q2, HealthState::Q3},
                                         StateSet{HealthState::Q4}, StateSet{HealthState::Q5}};
    for (const auto &g : c.groups()) {
        persistence_rows(c, g, {q5}, q5);
        for (const auto &prior : priors)
            persistence_rows(c, g, {prior, q5}, q5);
    }
}

void k17(const Context &c) {
    line(c.csv, {"age_group", "years_ahead", "observed", "order1_geometric"});
    const StateSet q5{HealthState::Q5};
    const std::vector<StateSet> start{q5};
    const auto g = c.config.focus_group;
    const auto path = multi_year_state_frequency(c.cohort, g, start, q5, c.config.horizon);
    const auto first = path.points.front().share;
    for (const auto &p : path.points) {
        std::optional<double> geometric;
        if (first)
            geometric = std::pow(*first, p.years_ahead);
        line(c.csv, {g.label(), std::to_string(p.years_ahead), opt(p.share), opt(geometric)});
    }
}

void k03(const Context &c) {
    std::string header = "age_group,available,n,mean,sd,min";
    for (double q : c.config.quantiles)
        header += ",q" + format(q);
    header += ",max";
    c.csv << header << '\n';
    for (const auto &g : c.groups()) {
        const auto s = conditional_cost_quantiles(c.cohort, g, StateSet{HealthState::Q1}, std::nullopt,
                                                  c.config.quantiles);
        c.csv << g.label() << ',' << (s.available ? 1 : 0) << ',' << s.n;
        auto field = [&](double v) { c.csv << ',' << (s.available ? format(v) : std::string{}); };
        field(s.mean);
        field(s.sd);
        field(s.min);
        for (std::size_t k = 0; k < c.config.quantiles.size(); ++k)
            field(s.available ? s.quantiles[k].second : 0.0);
        field(s.max);
        c.csv << '\n';
    }
}

void k04(const Context &c) {
    line(c.csv, {"age_group", "log_cost", "cumulative"});
    for (const auto &g : c.groups()) {
        const auto s = conditional_cost_quantiles(c.cohort, g, StateSet{HealthState::Q1}, std::nullopt, {});
        for (const auto &p : s.log_cdf)
            line(c.csv, {g.label(), format(p.log_cost), format(p.cumulative)});
    }
}

void difference_rows(const Context &c, const std::function<DifferenceCurve(int)> &curve_at) {
    line(c.csv, {"start_age", "years_elapsed", "target_set", "model_order", "shocked", "baseline", "difference"});
    int written = 0;
    for (int start_age : c.config.start_ages) {
        DifferenceCurve curve;
        try {
            curve = curve_at(start_age);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::HorizonOutOfRange && e.kind() != ErrorKind::Unavailable)
                throw;
            c.log << "skipping start age " << start_age << ": " << e.what() << '\n';
            continue;
        }
        ++written;
        for (std::size_t k = 0; k < curve.difference.size(); ++k)
            line(c.csv, {std::to_string(start_age), std::to_string(k + 1), curve.target.label(),
                         std::to_string(curve.model_order), curve.shocked, curve.baseline,
                         format(curve.difference[k])});
    }
    if (written == 0)
        throw Error(ErrorKind::Unavailable, "no configured start age is covered by the estimates for horizon " +
                                                std::to_string(c.config.horizon));
}

void order1_difference(const Context &c, StateSet target) {
    const auto family = c.order1();
    difference_rows(c, [&](int a) { return persistency_difference(family, a, c.config.horizon, target); });
}

void k14(const Context &c) {
    const auto family = c.order2();
    difference_rows(c, [&](int a) {
        return persistency_difference(family, a, c.config.horizon, StateSet{HealthState::Q5});
    });
}

void ar(const Context &c, int order) {
    line(c.csv, {"age", "order", "log_transform", "available", "n", "coefficient", "estimate", "std_error",
                 "ci_low", "ci_high"});
    for (int age = c.age_lo + order; age <= c.age_hi; ++age) {
        ARFit fit;
        bool degenerate = false;
        try {
            fit = ar_regression(c.cohort, age, order, c.config.ar_log);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::DegenerateFit)
                throw;
            degenerate = true;
            fit.n = build_ar_design(c.cohort, age, order, c.config.ar_log).x.rows();
        }
        const std::string head_order = std::to_string(order);
        const std::string log_flag = c.config.ar_log ? "1" : "0";
        const bool ok = fit.available && !degenerate;
        for (int k = 1; k <= order; ++k) {
            std::optional<double> est, se, lo, hi;
            if (ok) {
                est = fit.lag_coefficients[static_cast<std::size_t>(k - 1)];
                se = fit.lag_std_errors[static_cast<std::size_t>(k - 1)];
                std::tie(lo, hi) = fit.lag_interval(k);
            }
            line(c.csv, {std::to_string(age), head_order, log_flag, ok ? "1" : "0", std::to_string(fit.n),
                         "lag" + std::to_string(k), opt(est), opt(se), opt(lo), opt(hi)});
        }
        std::optional<double> icpt, icpt_se;
        if (ok) {
            icpt = fit.intercept;
            icpt_se = fit.intercept_se;
        }
        line(c.csv, {std::to_string(age), head_order, log_flag, ok ? "1" : "0", std::to_string(fit.n), "intercept",
                     opt(icpt), opt(icpt_se), "", ""});
    }
}

void projections(const Context &c, std::span<const double> q5_values) {
    line(c.csv, {"start_age", "q5_value", "horizon", "shock_cumulative", "healthy_cumulative", "difference"});
    const auto family = c.order2();
    if (family.empty())
        throw Error(ErrorKind::EmptyCohort, "no order-two estimates in the cohort");
    const int first = family.begin()->first - 1;
    const int last = family.rbegin()->first - c.config.horizon;
    for (double q5 : q5_values) {
        const auto costs = CostVector::from_thresholds(q5, c.config.thresholds);
        for (int a = first; a <= last; ++a) {
            std::optional<double> shock, healthy;
            try {
                shock = project_cumulative(family, costs, a, kShockStart, c.config.horizon).cumulative;
                healthy = project_cumulative(family, costs, a, kHealthyStart, c.config.horizon).cumulative;
            } catch (const Error &e) {
                if (e.kind() != ErrorKind::Unavailable && e.kind() != ErrorKind::HorizonOutOfRange)
                    throw;
                shock.reset();
                healthy.reset();
            }
            std::optional<double> diff;
            if (shock && healthy)
                diff = *shock - *healthy;
            line(c.csv, {std::to_string(a), format(q5), std::to_string(c.config.horizon), opt(shock), opt(healthy),
                         opt(diff)});
        }
    }
}

void table6(const Context &c) {
    line(c.csv, {"age_group", "state", "count", "total", "fraction"});
    for (const auto &g : c.groups()) {
        StateFractions f;
        try {
            f = state_fractions(c.cohort, g);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::EmptyCohort)
                throw;
            continue;
        }
        for (auto s : kAllStates) {
            const auto i = static_cast<std::size_t>(index_of(s));
            line(c.csv, {g.label(), std::string(to_string(s)), std::to_string(f.counts[i]), std::to_string(f.total),
                         format(f.fractions[i])});
        }
    }
}

void table7(const Context &c) {
    line(c.csv, {"age_group", "path", "available", "n", "mean", "sd", "median", "min", "max"});
    const StateSet q5{HealthState::Q5};
    const std::array<double, 1> median{0.5};
    for (const auto &g : c.groups()) {
        for (auto from : {HealthState::Q1, HealthState::Q5}) {
            const auto s = conditional_cost_quantiles(c.cohort, g, StateSet{from}, q5, median);
            auto f = [&](double v) { return s.available ? format(v) : std::string{}; };
            line(c.csv, {g.label(), std::string(to_string(from)) + ">Q5", s.available ? "1" : "0",
                         std::to_string(s.n), f(s.mean), f(s.sd), f(s.available ? s.quantiles[0].second : 0.0),
                         f(s.min), f(s.max)});
        }
    }
}

void table8(const Context &c) {
    line(c.csv, {"age_group", "threshold", "n", "proportion"});
    const auto groups = c.groups();
    const auto rows = exceedance_proportions(c.cohort, HealthState::Q1, HealthState::Q5, c.config.exceedance, groups,
                                             c.config.thresholds);
    for (const auto &r : rows)
        for (std::size_t k = 0; k < c.config.exceedance.size(); ++k)
            line(c.csv, {r.group.label(), std::to_string(c.config.exceedance[k]), std::to_string(r.n),
                         opt(r.proportions[k])});
}

constexpr std::array<std::string_view, 23> kFigureIds{
    "k01", "k02", "k03", "k04", "k05", "k06", "k07", "k08", "k09", "k10", "k11", "k12",
    "k13", "k14", "k15", "k16", "k17", "f02", "f03", "table6", "table7", "table8", "all"};

} // namespace

std::span<const std::string_view> figure_ids() noexcept {
    // "all" is handled by cmd_report.
    return std::span<const std::string_view>(kFigureIds.data(), kFigureIds.size() - 1);
}

void write_report(const std::string &id, const Panel &cohort, const RunConfig &config, std::ostream &csv,
                  std::ostream &log) {
    if (std::find(kFigureIds.begin(), kFigureIds.end() - 1, id) == kFigureIds.end() - 1) {
        std::string valid;
        for (auto v : figure_ids()) {
            if (!valid.empty())
                valid += ", ";
            valid += v;
        }
        throw Error(ErrorKind::InvalidArgument, "unknown figure id '" + id + "'; valid ids: " + valid + ", all");
    }
    const auto range = cohort.age_range();
    if (!range)
        throw Error(ErrorKind::EmptyCohort, "the cohort is empty");
    const Context c{cohort, config, csv, log, range->first, range->second};
    const StateSet q1{HealthState::Q1};
    const StateSet q5{HealthState::Q5};
    const StateSet q45{HealthState::Q4, HealthState::Q5};

    if (id == "k01") k01(c);
    else if (id == "k02") k02(c);
    else if (id == "k03") k03(c);
    else if (id == "k04") k04(c);
    else if (id == "k05") categories(c, {q1});
    else if (id == "k06") target_curve(c, {q1}, q5);
    else if (id == "k07") target_curve(c, {q1}, q45);
    else if (id == "k08") target_curve(c, {q1, q1}, q5);
    else if (id == "k09") categories(c, {q5});
    else if (id == "k10") target_curve(c, {q5}, q45);
    else if (id == "k11") target_curve(c, {q1, q5}, q5);
    else if (id == "k12") order1_difference(c, q5);
    else if (id == "k13") order1_difference(c, q45);
    else if (id == "k14") k14(c);
    else if (id == "k15") ar(c, 1);
    else if (id == "k16") ar(c, 2);
    else if (id == "k17") k17(c);
    else if (id == "f02") projections(c, std::span<const double>(config.q5_values.data(), 1));
    else if (id == "f03") projections(c, config.q5_values);
    else if (id == "table6") table6(c);
    else if (id == "table7") table7(c);
    else table8(c);
}

} // namespace hshock::cli
