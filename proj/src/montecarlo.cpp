#include "kljn/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "kljn/error.hpp"
#include "kljn/rng.hpp"

namespace kljn::mc {

using physics::LoopState;
using physics::Role;

void Scenario::validate() const {
    detail::require(runs_per_batch >= 1, "runs_per_batch must be at least 1");
    detail::require(repeats >= 1, "repeats must be at least 1");
    detail::require(tau_fly_multiples > 0 && std::isfinite(tau_fly_multiples),
                    "tau_fly_multiples must be positive");
}

std::size_t Scenario::sim_steps(std::size_t n_delay) const {
    return static_cast<std::size_t>(std::ceil(tau_fly_multiples * static_cast<double>(n_delay) - 1e-9));
}

std::size_t Scenario::window_steps(std::size_t n_delay) const {
    const auto n = static_cast<std::size_t>(std::llround(tau_fly_multiples * static_cast<double>(n_delay)));
    return n < 1 ? 1 : n;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t repeat, std::size_t run) {
    return derive_seed(master_seed, {tag(Stream::Repeat), repeat, tag(Stream::Run), run});
}

namespace {

struct Drives {
    std::vector<double> alice, bob;
};

Drives draw_drives(const Scenario& s, const Experiment& ex, std::uint64_t seed, std::size_t n_steps) {
    const auto roles = physics::roles_for(s.state);
    const auto& db = *ex.database;
    Drives d{std::vector<double>(n_steps), std::vector<double>(n_steps)};

    if (!s.defense) {
        auto draw = [&](Role role, Stream stream, std::vector<double>& out) {
            Rng rng(derive_seed(seed, {tag(stream)}));
            const auto& recs = db.records(role);
            std::uniform_int_distribution<std::size_t> pick(0, recs.size() - 1);
            const auto& rec = recs[pick(rng)];
            rec.copy_segment(noise::random_start(rec, n_steps, rng), out);
        };
        draw(roles.alice, Stream::AliceNoise, d.alice);
        draw(roles.bob, Stream::BobNoise, d.bob);
        return d;
    }

    // Slopes must stand in the ratio (R_high + z0) / (R_low + z0), high side
    // over low side; expressed here as Alice over Bob.
    const double m = noise::target_slope_ratio(
        physics::resistance(ex.quad, s.state == LoopState::HL ? roles.alice : roles.bob),
        physics::resistance(ex.quad, s.state == LoopState::HL ? roles.bob : roles.alice), ex.cable.z0);
    const double target = s.state == LoopState::HL ? m : 1.0 / m;
    Rng rng(derive_seed(seed, {tag(Stream::Pairing)}));
    const auto pair = noise::select_defense_pair(db.candidates(roles.alice), db.candidates(roles.bob), target,
                                                 ex.pairing, rng);
    db.record(roles.alice, pair.alice.record).copy_segment(pair.alice.start_index, d.alice);
    db.record(roles.bob, pair.bob.record).copy_segment(pair.bob.start_index, d.bob);
    return d;
}

}  // namespace

wire::TraceSet run_traces(const Scenario& s, const Experiment& ex, std::uint64_t seed) {
    detail::require(ex.database != nullptr, "experiment has no noise database");
    const std::size_t n_steps = s.sim_steps(ex.cable.n_delay);
    const auto roles = physics::roles_for(s.state);
    const Drives d = draw_drives(s, ex, seed, n_steps);
    return wire::simulate_loop(ex.cable, {physics::resistance(ex.quad, roles.alice), d.alice},
                               {physics::resistance(ex.quad, roles.bob), d.bob}, n_steps);
}

RunOutcome run_once(const Scenario& s, const Experiment& ex, std::uint64_t seed) {
    const auto traces = run_traces(s, ex, seed);
    const auto ms = eve::mean_squares(traces, {s.window_steps(ex.cable.n_delay)});

    // Both channels see the same tie-break draw.
    const std::uint64_t tie_seed = derive_seed(seed, {tag(Stream::TieBreak)});
    Rng tie_v(tie_seed), tie_i(tie_seed);
    const auto dv = eve::decide(ms, eve::Channel::Voltage, tie_v);
    const auto di = eve::decide(ms, eve::Channel::Current, tie_i);
    return {dv.guess, di.guess, dv.tie_broken || di.tie_broken};
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ScenarioResult run_scenario(const Scenario& s, const Experiment& ex) {
    s.validate();
    detail::require(ex.database != nullptr, "experiment has no noise database");
    ex.cable.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const std::size_t total = s.repeats * s.runs_per_batch;
    std::vector<RunOutcome> outcomes(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        constexpr std::size_t kChunk = 64;
        for (;;) {
            const std::size_t begin = next.fetch_add(kChunk);
            if (begin >= total) return;
            const std::size_t end = std::min(total, begin + kChunk);
            try {
                for (std::size_t idx = begin; idx < end; ++idx) {
                    const std::size_t k = idx / s.runs_per_batch;
                    const std::size_t r = idx % s.runs_per_batch;
                    outcomes[idx] = run_once(s, ex, run_seed(s.master_seed, k, r));
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(total);
                return;
            }
        }
    };

    const unsigned n_workers = std::max(1u, ex.workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    // Fixed reduction order: by run within repeat, then by repeat.
    ScenarioResult out;
    std::vector<double> pv, pi;
    for (std::size_t k = 0; k < s.repeats; ++k) {
        std::size_t cv = 0, ci = 0;
        for (std::size_t r = 0; r < s.runs_per_batch; ++r) {
            const auto& o = outcomes[k * s.runs_per_batch + r];
            cv += o.voltage_guess == s.state;
            ci += o.current_guess == s.state;
            out.channel_disagreements += o.voltage_guess != o.current_guess;
            out.ties += o.tie;
        }
        const double n = static_cast<double>(s.runs_per_batch);
        out.per_repeat.push_back({static_cast<double>(cv) / n, static_cast<double>(ci) / n});
        pv.push_back(out.per_repeat.back().p_ev);
        pi.push_back(out.per_repeat.back().p_ei);
    }
    double sv = 0, si = 0;
    for (std::size_t k = 0; k < s.repeats; ++k) {
        sv += pv[k];
        si += pi[k];
    }
    out.p_ev_mean = sv / static_cast<double>(s.repeats);
    out.p_ei_mean = si / static_cast<double>(s.repeats);
    out.p_ev_std = sample_std(pv);
    out.p_ei_std = sample_std(pi);
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace kljn::mc
