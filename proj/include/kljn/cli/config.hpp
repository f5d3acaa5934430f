#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kljn/montecarlo.hpp"
#include "kljn/noise_database.hpp"
#include "kljn/vmg_physics.hpp"
#include "kljn/wireline.hpp"

namespace kljn::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Flat key = value configuration. Defaults reproduce the published setup:
/// 11/3/9/2 kOhm resistors, U_LA = 1 V, B = 5 kHz, Z0 = 50 Ohm, 10 us fly time.
struct RunConfig {
    physics::ResistorQuad quad;
    double u_la = 1.0;
    double bandwidth = 5e3;
    double z0 = 50.0;
    std::optional<double> fly_time = 1e-5;
    std::optional<double> cable_length;
    std::optional<double> velocity;
    std::size_t samples_per_fly = 100;

    std::size_t runs = 1000;
    std::size_t repeats = 10;
    std::uint64_t master_seed = 20230414;
    std::vector<double> tau_multiples{1.0, 4.0};
    bool defense = false;
    physics::LoopState state = physics::LoopState::HL;

    double slope_tolerance = 0.01;
    double start_threshold = 1e-3;
    std::size_t fit_window = 0;  // 0 = one fly time of samples
    std::size_t attempt_budget = 1000;
    std::size_t record_length = std::size_t{1} << 22;
    std::size_t records_per_role = 1;
    double steady_duration = 10.0;  // s

    std::string database_dir;  // empty = build in memory
    std::string output_dir = ".";

    bool operator==(const RunConfig&) const = default;

    /// Throws InvalidParameter on any violated constraint.
    void validate() const;

    double effective_fly_time() const;
    std::size_t effective_fit_window() const;
    wire::CableParams cable() const;
    noise::NoiseSpec noise_shape() const;
    noise::DatabaseOptions database_options() const;
    noise::PairingOptions pairing_options() const;
};

/// Sets one key from its textual value. Unknown keys throw InvalidParameter.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Parses key = value lines ('#' starts a comment) on top of `base`. A key
/// given later overrides an earlier one; fly_time and (cable_length,
/// velocity) replace each other, but one text may not contain both.
RunConfig parse_config(std::string_view text, RunConfig base = {});

RunConfig load_config_file(const std::string& path, RunConfig base = {});

/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

}  // namespace kljn::cli
