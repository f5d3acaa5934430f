#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kljn/noise_synth.hpp"
#include "kljn/vmg_physics.hpp"

namespace kljn::noise {

/// On-disk record format (.knr), all fields little-endian:
///
///   0   char[8]  magic "KLJNNOIS"
///   8   u32      format version
///   12  u32      reserved, zero
///   16  f64      sample_rate
///   24  f64      bandwidth
///   32  f64      target_rms
///   40  u64      length
///   48  u64      seed
///   56  f64[length] samples
inline constexpr char kRecordMagic[8] = {'K', 'L', 'J', 'N', 'N', 'O', 'I', 'S'};
inline constexpr std::uint32_t kRecordFormatVersion = 1;
inline constexpr std::size_t kRecordHeaderBytes = 16;
inline constexpr std::size_t kRecordPreambleBytes = 56;

void write_record(std::ostream& out, const NoiseRecord& record);
NoiseRecord read_record(std::istream& in);

/// `noise_<role>_<seed>.knr`
std::string record_filename(physics::Role role, std::uint64_t seed);

void save_record(const std::filesystem::path& path, const NoiseRecord& record);
NoiseRecord load_record(const std::filesystem::path& path);

struct DatabaseOptions {
    NoiseSpec shape;                  // target_rms is replaced per role
    std::size_t records_per_role = 1;
    std::uint64_t seed = 1;
    std::size_t fit_window = 100;     // samples
    double start_threshold = 1e-3;    // fraction of target_rms
};

/// Per-role noise records plus their defense start candidates. Built once,
/// then shared read-only by Monte Carlo workers.
class NoiseDatabase {
public:
    /// Synthesizes records_per_role records for each generator role with that
    /// role's VMG RMS amplitude. Records of a role are ordered by seed.
    static NoiseDatabase build(const physics::NoiseTemperatures& temps, const DatabaseOptions& options);

    /// Reads every noise_<role>_<seed>.knr in `dir`.
    static NoiseDatabase load(const std::filesystem::path& dir, std::size_t fit_window,
                              double start_threshold);

    /// Writes one file per record; returns the written paths.
    std::vector<std::filesystem::path> save(const std::filesystem::path& dir) const;

    const std::vector<NoiseRecord>& records(physics::Role role) const;
    const std::vector<StartCandidate>& candidates(physics::Role role) const;
    const NoiseRecord& record(physics::Role role, std::size_t index) const;

private:
    NoiseDatabase() = default;
    void add(physics::Role role, NoiseRecord record);
    void finalize(std::size_t fit_window, double start_threshold);

    std::array<std::vector<NoiseRecord>, 4> records_;
    std::array<std::vector<StartCandidate>, 4> candidates_;
};

}  // namespace kljn::noise
