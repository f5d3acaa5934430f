#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "kljn/error.hpp"
#include "kljn/montecarlo.hpp"
#include "kljn/rng.hpp"

namespace kljn::mc {

using physics::LoopState;

namespace {

struct Accumulator {
    std::vector<double> u2, i2, ui;  // per batch sums
    std::vector<std::size_t> count;

    explicit Accumulator(std::size_t batches) : u2(batches), i2(batches), ui(batches), count(batches) {}

    void add(std::size_t batch, double u, double i) {
        u2[batch] += u * u;
        i2[batch] += i * i;
        ui[batch] += u * i;
        ++count[batch];
    }
};

struct MeanAndError {
    double mean;
    double se;
};

MeanAndError summarize(const std::vector<double>& sums, const std::vector<std::size_t>& count) {
    double total = 0;
    std::size_t n = 0;
    std::vector<double> means;
    for (std::size_t b = 0; b < sums.size(); ++b) {
        total += sums[b];
        n += count[b];
        if (count[b] > 0) means.push_back(sums[b] / static_cast<double>(count[b]));
    }
    const double se = means.size() > 1 ? sample_std(means) / std::sqrt(static_cast<double>(means.size())) : 0.0;
    return {total / static_cast<double>(n), se};
}

StateMeasurement finish(LoopState state, const Accumulator& acc, const physics::ResistorQuad& quad,
                        const physics::NoiseTemperatures& temps) {
    StateMeasurement m;
    m.state = state;
    const auto u = summarize(acc.u2, acc.count);
    const auto i = summarize(acc.i2, acc.count);
    const auto p = summarize(acc.ui, acc.count);
    m.u_ms = u.mean;
    m.u_ms_se = u.se;
    m.i_ms = i.mean;
    m.i_ms_se = i.se;
    m.p_flow = p.mean;
    m.p_flow_se = p.se;
    m.lumped = physics::steady_state_observables(state, quad, temps);
    return m;
}

double paired_se(const std::vector<double>& a, const std::vector<double>& b, const std::vector<std::size_t>& count) {
    std::vector<double> d;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (count[k] > 0) d.push_back((a[k] - b[k]) / static_cast<double>(count[k]));
    return d.size() > 1 ? sample_std(d) / std::sqrt(static_cast<double>(d.size())) : 0.0;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(0.5 * (a + b)); }

}  // namespace

double SteadyStateReport::rel_diff_u() const { return rel_diff(hl.u_ms, lh.u_ms); }
double SteadyStateReport::rel_diff_i() const { return rel_diff(hl.i_ms, lh.i_ms); }
double SteadyStateReport::rel_diff_p() const { return rel_diff(hl.p_flow, lh.p_flow); }

SteadyStateReport steady_state_check(const physics::ResistorQuad& quad,
                                     const physics::NoiseTemperatures& temps,
                                     const wire::CableParams& cable, double duration,
                                     const SteadyStateOptions& options) {
    cable.validate();
    quad.validate();
    detail::require(temps.bandwidth > 0, "noise temperatures carry no bandwidth");
    detail::require(duration >= 100.0 / (2.0 * temps.bandwidth),
                    "duration must cover at least 100 noise correlation times");
    detail::require(options.batches >= 2, "need at least two batches for an error estimate");

    const double fs = cable.sample_rate();
    const auto settle =
        static_cast<std::size_t>(std::ceil(options.settle_fly_times * static_cast<double>(cable.n_delay)));
    const auto measured = static_cast<std::size_t>(std::ceil(duration * fs));
    const std::size_t total = settle + measured;

    noise::NoiseSpec unit{fs, temps.bandwidth, 1.0, options.chunk_length};
    unit.validate();

    const auto hl_roles = physics::roles_for(LoopState::HL);
    const auto lh_roles = physics::roles_for(LoopState::LH);
    wire::LineStepper hl(cable, physics::resistance(quad, hl_roles.alice), physics::resistance(quad, hl_roles.bob));
    wire::LineStepper lh(cable, physics::resistance(quad, lh_roles.alice), physics::resistance(quad, lh_roles.bob));
    const double hl_a = temps.rms(hl_roles.alice), hl_b = temps.rms(hl_roles.bob);
    const double lh_a = temps.rms(lh_roles.alice), lh_b = temps.rms(lh_roles.bob);

    Accumulator acc_hl(options.batches), acc_lh(options.batches);
    const std::size_t per_batch = (measured + options.batches - 1) / options.batches;

    std::size_t t = 0;
    for (std::size_t chunk = 0; t < total; ++chunk) {
        // Records are periodic; consecutive chunks are independent draws.
        const auto xa = noise::synthesize(unit, derive_seed(options.seed, {tag(Stream::SteadyAlice), chunk}));
        const auto xb = noise::synthesize(unit, derive_seed(options.seed, {tag(Stream::SteadyBob), chunk}));
        const auto sa = xa.samples();
        const auto sb = xb.samples();
        for (std::size_t k = 0; k < sa.size() && t < total; ++k, ++t) {
            const auto s1 = hl.step(hl_a * sa[k], hl_b * sb[k]);
            const auto s2 = lh.step(lh_a * sa[k], lh_b * sb[k]);
            if (t < settle) continue;
            const std::size_t batch = (t - settle) / per_batch;
            acc_hl.add(batch, s1.u_a, s1.i_a);
            acc_lh.add(batch, s2.u_a, s2.i_a);
        }
    }

    SteadyStateReport report;
    report.hl = finish(LoopState::HL, acc_hl, quad, temps);
    report.lh = finish(LoopState::LH, acc_lh, quad, temps);
    report.diff_u_se = paired_se(acc_hl.u2, acc_lh.u2, acc_hl.count);
    report.diff_i_se = paired_se(acc_hl.i2, acc_lh.i2, acc_hl.count);
    report.diff_p_se = paired_se(acc_hl.ui, acc_lh.ui, acc_hl.count);
    report.duration = static_cast<double>(measured) / fs;
    report.samples = measured;
    return report;
}

void print_steady_state(std::ostream& out, const SteadyStateReport& r) {
    char line[200];
    std::snprintf(line, sizeof line, "steady state over %.6g s (%zu samples at Alice's terminal)\n", r.duration,
                  r.samples);
    out << line;
    std::snprintf(line, sizeof line, "%-6s %-14s %-12s %-12s %-14s %-12s\n", "state", "observable", "simulated",
                  "std error", "lumped", "rel. error");
    out << line;
    for (const auto* m : {&r.hl, &r.lh}) {
        const std::string st(physics::to_string(m->state));
        auto row = [&](const char* name, double sim, double se, double lumped) {
            std::snprintf(line, sizeof line, "%-6s %-14s %-12.6g %-12.3g %-14.6g %+.4f\n", st.c_str(), name, sim, se,
                          lumped, (sim - lumped) / lumped);
            out << line;
        };
        row("u_ms [V^2]", m->u_ms, m->u_ms_se, m->lumped.u_ms);
        row("i_ms [A^2]", m->i_ms, m->i_ms_se, m->lumped.i_ms);
        row("p_flow [W]", m->p_flow, m->p_flow_se, m->lumped.p_flow);
    }
    std::snprintf(line, sizeof line, "HL - LH: u_ms %+.3g (se %.3g), i_ms %+.3g (se %.3g), p_flow %+.3g (se %.3g)\n",
                  r.hl.u_ms - r.lh.u_ms, r.diff_u_se, r.hl.i_ms - r.lh.i_ms, r.diff_i_se, r.hl.p_flow - r.lh.p_flow,
                  r.diff_p_se);
    out << line;
    std::snprintf(line, sizeof line, "HL/LH relative difference: u_ms %.3g, i_ms %.3g, p_flow %.3g\n",
                  r.rel_diff_u(), r.rel_diff_i(), r.rel_diff_p());
    out << line;
}

}  // namespace kljn::mc
