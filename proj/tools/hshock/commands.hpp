#pragma once

#include "config.hpp"

#include "hshock/errors.hpp"
#include "hshock/panel.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hshock::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitDataError = 3,
    kExitInsufficientSupport = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

/// Entry point shared by main() and the tests. `args` excludes the program
/// name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// claims CSV -> panel.csv + ingest_summary.json
void cmd_ingest(const RunConfig &config, std::ostream &log);

/// panel -> order1.csv, order2.csv, table6.csv
void cmd_estimate(const RunConfig &config, std::ostream &log);

/// panel -> report_<figure_id>.csv
void cmd_report(const RunConfig &config, const std::string &figure_id, std::ostream &log);

/// panel -> projection.json
void cmd_project(const RunConfig &config, std::ostream &log);

/// -> claims.csv + truth.json
void cmd_synth(const RunConfig &config, std::ostream &log);

/// Lifted-chain projections against exhaustive path enumeration on random
/// chains. Returns false on any mismatch.
bool cmd_selftest(const RunConfig &config, std::ostream &log);

/// Panel cache reclassified under the configured thresholds and restricted
/// to the configured cohort. Throws EmptyCohort when nothing is left.
Panel load_cohort(const RunConfig &config);

std::span<const std::string_view> figure_ids() noexcept;

/// Writes the plot-ready table behind one exhibit. Throws InvalidArgument
/// for an unknown id.
void write_report(const std::string &figure_id, const Panel &cohort, const RunConfig &config, std::ostream &csv,
                  std::ostream &log);

} // namespace hshock::cli
