#pragma once

#include <iosfwd>
#include <string>

#include "kljn/cli/config.hpp"
#include "kljn/montecarlo.hpp"
#include "kljn/noise_database.hpp"

namespace kljn::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInvalid = 1,       // bad config, I/O failure, failed verdicts
    kExitNonPhysical = 2,   // VMG amplitudes not realizable
    kExitPairing = 3,       // defense pairing exhausted
};

/// Entry point of the kljn_sim tool. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Loads the database from config.database_dir when it holds records,
/// otherwise synthesizes one in memory. Loaded records must match the
/// configured sample rate, bandwidth and per-role RMS.
noise::NoiseDatabase obtain_database(const RunConfig& config, const physics::NoiseTemperatures& temps,
                                     std::ostream& log);

/// Structured report (JSON) for a table reproduction.
std::string report_json(const RunConfig& config, const mc::TablesReport& report);

}  // namespace kljn::cli
