#include "commands.hpp"

#include "hshock/csv.hpp"
#include "hshock/estimation.hpp"
#include "hshock/ingestion.hpp"
#include "hshock/lifted_chain.hpp"
#include "hshock/synthetic.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hshock::cli {

namespace fs = std::filesystem;
using csv::format;

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidConfiguration:
    case ErrorKind::InvalidArgument:
        return kExitUsage;
    case ErrorKind::InvalidInput:
    case ErrorKind::Parse:
    case ErrorKind::Duplicate:
        return kExitDataError;
    case ErrorKind::EmptyCohort:
    case ErrorKind::Unavailable:
    case ErrorKind::DegenerateFit:
    case ErrorKind::HorizonOutOfRange:
        return kExitInsufficientSupport;
    }
    return kExitFailure;
}

namespace {

void require_file(const fs::path &path, const char *what) {
    if (path.empty())
        throw Error(ErrorKind::InvalidConfiguration, std::string("no ") + what + " path configured");
    if (!fs::is_regular_file(path))
        throw Error(ErrorKind::InvalidConfiguration, std::string(what) + " '" + path.string() + "' does not exist");
}

std::ofstream open_output(const fs::path &path) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::InvalidConfiguration, "cannot write '" + path.string() + "'");
    return out;
}

void close_output(std::ofstream &out, const fs::path &path) {
    out.close();
    if (!out)
        throw Error(ErrorKind::InvalidConfiguration, "failed writing '" + path.string() + "'");
}

std::string state_name(int i) { return std::string(to_string(state_at(i))); }

} // namespace

Panel load_cohort(const RunConfig &config) {
    const auto path = config.panel_path();
    require_file(path, "panel cache");
    std::ifstream in(path, std::ios::binary);
    auto panel = read_panel_cache(in);
    panel = reclassify(panel, config.thresholds);
    auto cohort = filter_cohort(panel, config.sex, config.age_min, config.age_max);
    if (cohort.trajectories().empty())
        throw Error(ErrorKind::EmptyCohort, "no person in the cohort (sex " +
                                                std::string(config.sex ? to_string(*config.sex) : "any") +
                                                ", ages " + std::to_string(config.age_min) + "-" +
                                                std::to_string(config.age_max) + ")");
    return cohort;
}

void cmd_ingest(const RunConfig &config, std::ostream &log) {
    require_file(config.input, "input");
    std::ifstream in(config.input, std::ios::binary);
    IngestOptions options;
    options.thresholds = config.thresholds;
    options.convention = config.convention;
    const auto result = ingest_claims(in, options);

    const auto panel_path = config.panel_path();
    auto out = open_output(panel_path);
    write_panel_cache(result.panel, out);
    close_output(out, panel_path);

    const auto &s = result.summary;
    nlohmann::ordered_json doc;
    doc["records"] = s.records;
    doc["persons"] = s.persons;
    doc["person_years"] = s.person_years;
    doc["missing_markers"] = s.missing_markers;
    doc["missing_share"] = s.missing_share();
    const auto summary_path = config.output_dir / "ingest_summary.json";
    auto summary = open_output(summary_path);
    summary << doc.dump(2) << '\n';
    close_output(summary, summary_path);

    log << "records " << s.records << ", persons " << s.persons << ", person-years " << s.person_years
        << ", missing share " << format(s.missing_share()) << '\n';
}

void cmd_estimate(const RunConfig &config, std::ostream &log) {
    const auto cohort = load_cohort(config);
    const auto [lo, hi] = *cohort.age_range();
    const AgeGroup ages{lo, hi};

    const auto order1 = estimate_order1_by_age(cohort, ages);
    const auto order2 = estimate_order2_by_age(cohort, ages);
    if (order1.empty())
        throw Error(ErrorKind::EmptyCohort, "the cohort has no consecutive observed years");

    const auto p1 = config.output_dir / "order1.csv";
    auto o1 = open_output(p1);
    o1 << "age,from,to,count,row_count,available,low_support,probability\n";
    for (const auto &[age, m] : order1)
        for (int i = 0; i < kStateCount; ++i) {
            const auto from = state_at(i);
            const bool low = m.low_support(from, config.min_cell_count);
            for (int j = 0; j < kStateCount; ++j)
                o1 << age << ',' << state_name(i) << ',' << state_name(j) << ','
                   << m.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] << ',' << m.row_count(from)
                   << ',' << (m.available[static_cast<std::size_t>(i)] ? 1 : 0) << ',' << (low ? 1 : 0) << ','
                   << (m.available[static_cast<std::size_t>(i)] ? format(m.probs(i, j)) : std::string{}) << '\n';
        }
    close_output(o1, p1);

    const auto p2 = config.output_dir / "order2.csv";
    auto o2 = open_output(p2);
    o2 << "age,past,current,next,count,slice_count,available,low_support,probability\n";
    for (const auto &[age, t] : order2)
        for (int i = 0; i < kStateCount; ++i)
            for (int j = 0; j < kStateCount; ++j) {
                const bool avail = t.available[TransitionTensor::slice(i, j)];
                const auto n = t.slice_count(state_at(i), state_at(j));
                for (int k = 0; k < kStateCount; ++k) {
                    const auto idx = TransitionTensor::index(i, j, k);
                    o2 << age << ',' << state_name(i) << ',' << state_name(j) << ',' << state_name(k) << ','
                       << t.counts[idx] << ',' << n << ',' << (avail ? 1 : 0) << ','
                       << (n < config.min_cell_count ? 1 : 0) << ',' << (avail ? format(t.probs[idx]) : std::string{})
                       << '\n';
                }
            }
    close_output(o2, p2);

    const auto p6 = config.output_dir / "table6.csv";
    auto o6 = open_output(p6);
    write_report("table6", cohort, config, o6, log);
    close_output(o6, p6);

    log << "order-one ages " << order1.begin()->first << "-" << order1.rbegin()->first << ", order-two ages "
        << (order2.empty() ? std::string("none")
                           : std::to_string(order2.begin()->first) + "-" + std::to_string(order2.rbegin()->first))
        << '\n';
}

void cmd_report(const RunConfig &config, const std::string &figure_id, std::ostream &log) {
    std::vector<std::string> ids;
    if (figure_id == "all") {
        for (auto id : figure_ids())
            ids.emplace_back(id);
    } else {
        bool known = false;
        for (auto id : figure_ids())
            known = known || id == figure_id;
        if (!known) {
            // write_report produces the message listing the valid ids.
            std::ostringstream sink;
            write_report(figure_id, Panel{}, config, sink, log);
        }
        ids.push_back(figure_id);
    }
    const auto cohort = load_cohort(config);
    for (const auto &id : ids) {
        // Render in memory first so a failing report leaves no partial file.
        std::ostringstream buffer;
        try {
            write_report(id, cohort, config, buffer, log);
        } catch (const Error &e) {
            if (ids.size() == 1 || exit_code_for(e.kind()) != kExitInsufficientSupport)
                throw;
            log << "report " << id << " skipped: " << e.what() << '\n';
            continue;
        }
        const auto path = config.output_dir / ("report_" + id + ".csv");
        auto out = open_output(path);
        out << buffer.str();
        close_output(out, path);
        log << "wrote " << path.string() << '\n';
    }
}

void cmd_project(const RunConfig &config, std::ostream &log) {
    if (config.q5_values.empty())
        throw Error(ErrorKind::InvalidConfiguration, "q5_values is empty");
    const auto cohort = load_cohort(config);
    const auto [lo, hi] = *cohort.age_range();
    const auto family =
        lift_family(build_order2_family(cohort, {lo + 2, hi}, config.unavailable_policy), config.lift_formula());
    if (family.empty())
        throw Error(ErrorKind::EmptyCohort, "no order-two estimates in the cohort");

    std::vector<int> start_ages;
    if (config.project_start_age) {
        start_ages.push_back(*config.project_start_age);
    } else {
        for (int a = family.begin()->first - 1; a + config.horizon <= family.rbegin()->first; ++a)
            start_ages.push_back(a);
        if (start_ages.empty())
            throw Error(ErrorKind::HorizonOutOfRange, "estimates cover ages " +
                                                          std::to_string(family.begin()->first) + "-" +
                                                          std::to_string(family.rbegin()->first) +
                                                          ", too few for horizon " + std::to_string(config.horizon));
    }

    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    std::size_t skipped = 0;
    for (double q5 : config.q5_values) {
        const auto costs = CostVector::from_thresholds(q5, config.thresholds);
        for (int a : start_ages) {
            ProjectionResult r;
            try {
                r = project_cumulative(family, costs, a, config.project_start, config.horizon);
            } catch (const Error &e) {
                if (config.project_start_age || e.kind() != ErrorKind::Unavailable)
                    throw;
                ++skipped;
                continue;
            }
            nlohmann::ordered_json item;
            item["start_age"] = r.start_age;
            item["start_pair"] = r.start.label();
            item["q5_value"] = q5;
            item["horizon"] = r.horizon;
            item["per_period"] = r.per_period;
            item["cumulative"] = r.cumulative;
            doc.push_back(std::move(item));
        }
    }
    if (doc.empty())
        throw Error(ErrorKind::Unavailable, "no start age has estimates along the whole horizon");
    const auto path = config.output_dir / "projection.json";
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    close_output(out, path);
    log << "wrote " << doc.size() << " projections to " << path.string();
    if (skipped)
        log << " (" << skipped << " start ages without support skipped)";
    log << '\n';
}

void cmd_synth(const RunConfig &config, std::ostream &log) {
    if (config.n_persons == 0)
        throw Error(ErrorKind::InvalidConfiguration, "synth.n_persons must be positive");
    if (config.exit_age < config.entry_age + 2)
        throw Error(ErrorKind::InvalidConfiguration, "synth.exit_age must be at least synth.entry_age + 2");

    GroundTruthChain truth;
    if (!config.truth.empty()) {
        require_file(config.truth, "ground truth");
        std::ifstream in(config.truth, std::ios::binary);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception &e) {
            throw Error(ErrorKind::InvalidConfiguration, "ground truth: " + std::string(e.what()));
        }
        truth = chain_from_json(doc);
        truth.seed = config.seed;
    } else {
        truth = persistence_chain(config.seed, config.entry_age, config.exit_age);
        for (int age = config.entry_age + 1; age <= config.exit_age; ++age)
            truth.attrition[age] = config.attrition;
        truth.thresholds = config.thresholds;
    }
    truth.validate();

    GenerateOptions options;
    options.n_persons = config.n_persons;
    options.entry_age = config.entry_age;
    options.exit_age = config.exit_age;
    options.base_year = config.base_year;
    options.cohort_years = config.cohort_years;
    options.convention = config.convention;

    const auto claims_path = config.output_dir / "claims.csv";
    auto claims = open_output(claims_path);
    const auto rows = write_claims_csv(truth, options, claims);
    close_output(claims, claims_path);

    const auto truth_path = config.output_dir / "truth.json";
    auto out = open_output(truth_path);
    out << to_json(truth).dump(2) << '\n';
    close_output(out, truth_path);

    log << "wrote " << rows << " claim rows for " << config.n_persons << " persons to " << claims_path.string()
        << '\n';
}

bool cmd_selftest(const RunConfig &config, std::ostream &log) {
    constexpr int kChains = 100;
    constexpr int kMaxHorizon = 5;
    constexpr double kRelTol = 1e-10;
    int failures = 0;
    double worst = 0.0;
    for (int c = 0; c < kChains; ++c) {
        const auto seed = mix_seed(config.seed, static_cast<std::uint64_t>(c));
        const auto truth = random_chain(seed, 20, 20 + kMaxHorizon + 3, 0.5 + (c % 4));
        const auto family = truth.lifted_family();
        Rng rng(seed);
        const auto costs = CostVector::from_thresholds(267'000.0 + 1000.0 * (c % 7), truth.thresholds);
        const auto start = PairState::from_index(static_cast<int>(rng.bits() % kPairCount));
        const int start_age = 21 + c % 3;
        for (int h = 1; h <= kMaxHorizon; ++h) {
            const auto lifted = project_cumulative(family, costs, start_age, start, h);
            const auto exact = enumerate_expectation(truth, costs, start, start_age, h);
            const double rel = std::abs(lifted.cumulative - exact.cumulative) / std::abs(exact.cumulative);
            worst = std::max(worst, rel);
            if (!(rel <= kRelTol)) {
                ++failures;
                log << "chain " << c << " horizon " << h << ": lifted " << format(lifted.cumulative)
                    << " enumeration " << format(exact.cumulative) << '\n';
            }
        }
    }
    log << "selftest: " << kChains * kMaxHorizon << " comparisons, " << failures
        << " failures, worst relative error " << format(worst) << '\n';
    return failures == 0;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Health-expenditure transition analysis on claims panels", "hshock"};
    app.require_subcommand(1);
    app.footer(describe_keys());

    std::string config_file;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::string input;
    std::string panel;
    std::optional<std::uint64_t> seed;
    std::optional<int> horizon;
    app.add_option("-c,--config", config_file, "settings file of `key = value` lines");
    app.add_option("-s,--set", overrides, "override one setting, key=value (repeatable)");
    app.add_option("-o,--output-dir", output_dir, "directory for generated files (env HSHOCK_OUTPUT_DIR)");
    app.add_option("--input", input, "claims CSV");
    app.add_option("--panel", panel, "panel cache (default <output_dir>/panel.csv)");
    app.add_option("--seed", seed, "seed for synth and selftest");
    app.add_option("--horizon", horizon, "projection horizon in years");

    auto *ingest = app.add_subcommand("ingest", "claims CSV to panel cache");
    auto *estimate = app.add_subcommand("estimate", "per-age transition estimates and state fractions");
    auto *report = app.add_subcommand("report", "tidy CSV behind one exhibit, or `all`");
    std::string figure_id;
    report->add_option("figure_id", figure_id, "exhibit id")->required();
    auto *project = app.add_subcommand("project", "cumulative expected-cost projections");
    auto *synth = app.add_subcommand("synth", "synthetic claims and their ground truth");
    auto *selftest = app.add_subcommand("selftest", "lifted chain against exhaustive path enumeration");
    for (auto *sub : {ingest, estimate, report, project, synth, selftest})
        sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        Settings settings;
        if (!config_file.empty())
            settings.load_file(config_file);
        if (const char *env = std::getenv("HSHOCK_OUTPUT_DIR"); env && *env)
            settings.set("output_dir", env);
        for (const auto &o : overrides)
            settings.set(o);
        if (!output_dir.empty())
            settings.set("output_dir", output_dir);
        if (!input.empty())
            settings.set("input", input);
        if (!panel.empty())
            settings.set("panel", panel);
        if (seed)
            settings.set("seed", std::to_string(*seed));
        if (horizon)
            settings.set("horizon", std::to_string(*horizon));
        const auto config = make_config(settings);

        if (*ingest)
            cmd_ingest(config, out);
        else if (*estimate)
            cmd_estimate(config, out);
        else if (*report)
            cmd_report(config, figure_id, err);
        else if (*project)
            cmd_project(config, out);
        else if (*synth)
            cmd_synth(config, out);
        else if (*selftest)
            return cmd_selftest(config, out) ? kExitOk : kExitFailure;
        return kExitOk;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace hshock::cli
