#include "kljn/noise_synth.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>

#include "kljn/error.hpp"

namespace kljn::noise {

using detail::require;

void NoiseSpec::validate() const {
    require(sample_rate > 0 && std::isfinite(sample_rate), "sample rate must be positive");
    require(bandwidth > 0 && bandwidth < sample_rate / 2, "bandwidth must lie in (0, sample_rate/2)");
    require(target_rms > 0 && std::isfinite(target_rms), "target RMS must be positive");
    require(length >= (std::size_t{1} << 16) && std::has_single_bit(length),
            "record length must be a power of two >= 65536");
}

std::size_t NoiseSpec::band_bins() const {
    return static_cast<std::size_t>(std::floor(bandwidth * static_cast<double>(length) / sample_rate));
}

NoiseRecord::NoiseRecord(NoiseSpec spec, std::uint64_t seed, std::vector<double> samples)
    : spec_(spec), seed_(seed), samples_(std::move(samples)) {
    require(samples_.size() == spec_.length, "sample count does not match spec length");
    require(spec_.sample_rate > 0 && spec_.target_rms > 0, "record spec must have positive rate and RMS");
}

void NoiseRecord::copy_segment(std::size_t start, std::span<double> out) const {
    require(!samples_.empty(), "empty record");
    const std::size_t n = samples_.size();
    std::size_t pos = start % n;
    for (double& v : out) {
        v = samples_[pos];
        if (++pos == n) pos = 0;
    }
}

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace

NoiseRecord synthesize(const NoiseSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t n = spec.length;
    const std::size_t bins = spec.band_bins();
    require(bins >= 1, "bandwidth resolves to zero DFT bins at this record length");

    std::unique_ptr<fftw_complex[], FftwFree> freq(fftw_alloc_complex(n / 2 + 1));
    std::unique_ptr<double[], FftwFree> time(fftw_alloc_real(n));
    if (!freq || !time) throw std::bad_alloc();

    std::fill_n(&freq[0][0], 2 * (n / 2 + 1), 0.0);
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t k = 1; k <= bins; ++k) {
        freq[k][0] = gauss(rng);
        freq[k][1] = gauss(rng);
    }

    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), freq.get(), time.get(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    // Each occupied bin contributes 2(a cos - b sin), variance 4.
    const double scale = spec.target_rms / std::sqrt(4.0 * static_cast<double>(bins));
    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i) samples[i] = time[i] * scale;
    return NoiseRecord(spec, seed, std::move(samples));
}

double target_slope_ratio(double r_high, double r_low, double z0) {
    require(r_high > 0 && r_low > 0 && z0 > 0, "resistances and impedance must be positive");
    return (r_high + z0) / (r_low + z0);
}

std::vector<StartCandidate> scan_start_candidates(const NoiseRecord& record, std::size_t fit_window,
                                                  double delta, std::size_t record_id) {
    require(fit_window >= 2, "fit window must be at least 2 samples");
    require(delta >= 0, "start threshold must be non-negative");
    const auto x = record.samples();
    require(x.size() >= fit_window, "record shorter than the fit window");

    const double threshold = delta * record.spec().target_rms;
    const double w = static_cast<double>(fit_window);
    const double x_mean = (w - 1.0) / 2.0;
    const double sxx = w * (w * w - 1.0) / 12.0;

    std::vector<StartCandidate> out;
    std::size_t last = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        if (!(x[i] * x[i + 1] < 0)) continue;
        const std::size_t s = std::abs(x[i + 1]) < std::abs(x[i]) ? i + 1 : i;
        if (s == last) continue;
        if (std::abs(x[s]) > threshold) continue;
        if (s + fit_window > x.size()) continue;

        double sxy = 0;
        for (std::size_t k = 0; k < fit_window; ++k)
            sxy += (static_cast<double>(k) - x_mean) * x[s + k];
        const double slope = sxy / sxx * record.spec().sample_rate;
        if (slope == 0) continue;

        out.push_back({record_id, s, slope});
        last = s;
    }
    return out;
}

DefensePairing select_defense_pair(std::span<const StartCandidate> alice,
                                   std::span<const StartCandidate> bob, double target_ratio,
                                   const PairingOptions& options, Rng& rng) {
    require(!alice.empty() && !bob.empty(), "candidate lists must be non-empty");
    require(target_ratio > 0, "target ratio must be positive");
    require(options.tolerance > 0 && options.tolerance < 1, "slope tolerance must lie in (0, 1)");

    std::uniform_int_distribution<std::size_t> pick_alice(0, alice.size() - 1);
    std::vector<std::size_t> order(bob.size());

    for (std::size_t attempt = 0; attempt < options.attempt_budget; ++attempt) {
        const StartCandidate& a = alice[pick_alice(rng)];
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Lazy Fisher-Yates: each step exposes the next element of a uniform permutation.
        for (std::size_t k = 0; k < order.size(); ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
            std::swap(order[k], order[pick(rng)]);
            const StartCandidate& b = bob[order[k]];
            if (a.slope_sign() != b.slope_sign()) continue;
            const double ratio = a.slope / b.slope;
            if (std::abs(ratio - target_ratio) / target_ratio <= options.tolerance)
                return {a, b, ratio, target_ratio};
        }
    }
    throw PairingExhausted("no slope-matched start pair found within " +
                           std::to_string(options.attempt_budget) + " attempts (target ratio " +
                           std::to_string(target_ratio) + "); enlarge the noise database");
}

std::size_t random_start(const NoiseRecord& record, std::size_t min_headroom, Rng& rng) {
    require(record.size() > min_headroom, "record is not longer than the requested headroom");
    std::uniform_int_distribution<std::size_t> dist(0, record.size() - min_headroom - 1);
    return dist(rng);
}

}  // namespace kljn::noise
