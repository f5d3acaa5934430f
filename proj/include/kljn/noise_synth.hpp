#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kljn/rng.hpp"

namespace kljn::noise {

/// Shape of a band-limited Gaussian record.
struct NoiseSpec {
    double sample_rate = 1e7;  // Hz
    double bandwidth = 5e3;    // Hz, flat from DC up to here, zero above
    double target_rms = 1.0;   // V
    std::size_t length = std::size_t{1} << 20;

    /// bandwidth < sample_rate / 2, length a power of two >= 2^16, target_rms > 0.
    void validate() const;

    /// Number of positive-frequency DFT bins inside the band (k * fs / n <= B).
    std::size_t band_bins() const;

    bool operator==(const NoiseSpec&) const = default;
};

/// One pre-generated generator waveform. Immutable once built.
class NoiseRecord {
public:
    NoiseRecord(NoiseSpec spec, std::uint64_t seed, std::vector<double> samples);

    const NoiseSpec& spec() const noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }

    /// Copies `out.size()` samples starting at `start`. Synthesized records are
    /// periodic, so reads past the end wrap to the beginning.
    void copy_segment(std::size_t start, std::span<double> out) const;

private:
    NoiseSpec spec_;
    std::uint64_t seed_;
    std::vector<double> samples_;
};

/// Frequency-domain Hermitian synthesis: independent complex Gaussian
/// coefficients in every bin up to the bandwidth, zero DC and zero above,
/// inverse real FFT, then scaled by the theoretical factor so the ensemble
/// RMS equals target_rms. Deterministic in (spec, seed).
NoiseRecord synthesize(const NoiseSpec& spec, std::uint64_t seed);

/// Required ratio of starting slopes, (r_high + z0) / (r_low + z0).
double target_slope_ratio(double r_high, double r_low, double z0);

/// A zero-crossing sample usable as a defended start point.
struct StartCandidate {
    std::size_t record = 0;  // index of the record within its role's list
    std::size_t start_index = 0;
    double slope = 0;        // V/s, least-squares over the fit window

    int slope_sign() const noexcept { return slope > 0 ? 1 : -1; }
};

/// Zero crossings whose nearer sample is within `delta * target_rms` of zero
/// and whose fit window fits inside the record. Sorted by start_index.
std::vector<StartCandidate> scan_start_candidates(const NoiseRecord& record, std::size_t fit_window,
                                                  double delta, std::size_t record_id = 0);

/// A slope-matched pair, achieved_ratio = alice.slope / bob.slope.
struct DefensePairing {
    StartCandidate alice;
    StartCandidate bob;
    double achieved_ratio = 0;
    double target_ratio = 0;
};

struct PairingOptions {
    double tolerance = 0.01;            // relative, on the slope ratio
    std::size_t attempt_budget = 1000;  // draws from the high side
};

/// Draws a uniformly random `high` candidate, then scans `low` in random
/// order for the first same-sign candidate whose ratio is within tolerance.
/// Throws PairingExhausted after attempt_budget draws.
DefensePairing select_defense_pair(std::span<const StartCandidate> high,
                                   std::span<const StartCandidate> low, double target_ratio,
                                   const PairingOptions& options, Rng& rng);

/// Uniform index in [0, length - min_headroom).
std::size_t random_start(const NoiseRecord& record, std::size_t min_headroom, Rng& rng);

}  // namespace kljn::noise
