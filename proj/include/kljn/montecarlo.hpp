#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kljn/eve_attack.hpp"
#include "kljn/noise_database.hpp"
#include "kljn/noise_synth.hpp"
#include "kljn/vmg_physics.hpp"
#include "kljn/wireline.hpp"

namespace kljn::mc {

/// One table row: a loop state, defended or not, observed for some number
/// of fly times, over repeats x runs independent bit exchange periods.
struct Scenario {
    std::string case_label = "custom";
    physics::LoopState state = physics::LoopState::HL;
    bool defense = false;
    double tau_fly_multiples = 1.0;
    std::size_t runs_per_batch = 1000;
    std::size_t repeats = 10;
    std::uint64_t master_seed = 1;

    void validate() const;
    std::size_t sim_steps(std::size_t n_delay) const;     // ceil(tau * n_delay)
    std::size_t window_steps(std::size_t n_delay) const;  // round(tau * n_delay)
};

/// Everything a scenario needs besides its own row description.
struct Experiment {
    physics::ResistorQuad quad;
    physics::NoiseTemperatures temps;
    wire::CableParams cable;
    const noise::NoiseDatabase* database = nullptr;
    noise::PairingOptions pairing;
    unsigned workers = 1;
};

struct RepeatResult {
    double p_ev = 0;
    double p_ei = 0;
};

struct ScenarioResult {
    double p_ev_mean = 0, p_ev_std = 0;
    double p_ei_mean = 0, p_ei_std = 0;
    std::vector<RepeatResult> per_repeat;
    std::size_t channel_disagreements = 0;  // runs whose voltage and current guesses differ
    std::size_t ties = 0;
    double runtime_s = 0;
};

/// Outcome of a single bit exchange period.
struct RunOutcome {
    physics::LoopState voltage_guess;
    physics::LoopState current_guess;
    bool tie = false;
};

/// Seeds: run (k, r) draws every random number from
/// derive_seed(master_seed, {Repeat, k, Run, r}) and its Alice/Bob/pairing/tie
/// children, so results do not depend on how runs are scheduled.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t repeat, std::size_t run);

RunOutcome run_once(const Scenario& s, const Experiment& ex, std::uint64_t seed);

/// Traces of one run, for inspection and CSV dumps.
wire::TraceSet run_traces(const Scenario& s, const Experiment& ex, std::uint64_t seed);

ScenarioResult run_scenario(const Scenario& s, const Experiment& ex);

/// Sample standard deviation (n - 1); zero for fewer than two values.
double sample_std(std::span<const double> values);

// ---------------------------------------------------------------------------
// Tables

/// Published reference row for one case.
struct ReferenceCase {
    char label;
    physics::LoopState state;
    bool defense;
    double tau_fly;
    double p_v, p_v_std;
    double p_i, p_i_std;
};

std::span<const ReferenceCase> reference_cases();

/// Acceptance thresholds, pinned.
inline constexpr double kNoDefenseAbsTol = 0.05;
inline constexpr double kNoDefenseFloor = 0.60;
inline constexpr double kDefenseTolShort = 0.05;  // tau = 1 fly time
inline constexpr double kDefenseTolLong = 0.06;   // tau = 4 fly times

double reference_value(const ReferenceCase& ref, eve::Channel channel);

/// Undefended: within kNoDefenseAbsTol of the reference and at least
/// kNoDefenseFloor. Defended: within kDefenseTolShort (tau = 1) or
/// kDefenseTolLong (tau > 1) of 0.5.
bool verdict(const ReferenceCase& ref, eve::Channel channel, double measured_mean);

struct ChannelVerdict {
    eve::Channel channel;
    double mean = 0, std = 0;
    double reference = 0, reference_std = 0;
    bool pass = false;
};

struct CaseReport {
    ReferenceCase reference;
    ScenarioResult result;
    ChannelVerdict voltage, current;
};

struct TablesOptions {
    std::size_t runs = 1000;
    std::size_t repeats = 10;
    std::uint64_t master_seed = 1;
    std::string cases = "ABCDEFGH";
    bool smoke = false;  // verdicts carry no statistical meaning
};

struct TablesReport {
    std::vector<CaseReport> cases;
    bool statistically_void = false;
    bool all_pass() const;
};

/// Runs each selected reference case on `ex`. A failing scenario is rethrown
/// with its case label prefixed.
TablesReport reproduce_tables(const Experiment& ex, const TablesOptions& options);

void write_results_csv(std::ostream& out, const TablesReport& report);
void write_summary_csv(std::ostream& out, const TablesReport& report);
void print_tables(std::ostream& out, const TablesReport& report);

// ---------------------------------------------------------------------------
// Steady state

struct SteadyStateOptions {
    std::uint64_t seed = 1;
    std::size_t chunk_length = std::size_t{1} << 20;
    std::size_t batches = 20;
    double settle_fly_times = 10;
};

struct StateMeasurement {
    physics::LoopState state;
    double u_ms = 0, i_ms = 0, p_flow = 0;           // at Alice's terminal
    double u_ms_se = 0, i_ms_se = 0, p_flow_se = 0;  // batch-means standard errors
    physics::SteadyStateObservables lumped;
};

struct SteadyStateReport {
    StateMeasurement hl, lh;
    double duration = 0;
    std::size_t samples = 0;
    // Batch-means standard errors of the paired differences HL - LH.
    double diff_u_se = 0, diff_i_se = 0, diff_p_se = 0;

    /// |HL - LH| / |mean of the two|, per observable.
    double rel_diff_u() const;
    double rel_diff_i() const;
    double rel_diff_p() const;
};

/// Drives HL and LH loops with stationary noise, discards a settling period,
/// and measures wire statistics. Both states share the same underlying unit
/// noise at each end (common random numbers), so their difference isolates
/// the physics rather than sampling noise.
SteadyStateReport steady_state_check(const physics::ResistorQuad& quad,
                                     const physics::NoiseTemperatures& temps,
                                     const wire::CableParams& cable, double duration,
                                     const SteadyStateOptions& options = {});

void print_steady_state(std::ostream& out, const SteadyStateReport& report);

}  // namespace kljn::mc
