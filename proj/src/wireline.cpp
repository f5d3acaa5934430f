#include "kljn/wireline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "kljn/error.hpp"

namespace kljn::wire {

using detail::require;

CableParams CableParams::from_fly_time(double z0, double fly_time, std::size_t samples_per_fly) {
    require(samples_per_fly >= 1, "samples_per_fly must be at least 1");
    require(fly_time > 0 && std::isfinite(fly_time), "fly time must be positive");
    CableParams p{z0, fly_time, fly_time / static_cast<double>(samples_per_fly), samples_per_fly};
    p.validate();
    return p;
}

void CableParams::validate() const {
    require(z0 > 0 && std::isfinite(z0), "characteristic impedance must be positive");
    require(dt > 0 && std::isfinite(dt), "time step must be positive");
    require(n_delay >= 1, "line delay must be at least one step");
    const double steps = fly_time / dt;
    require(std::abs(steps - static_cast<double>(n_delay)) <= 1e-9 * steps,
            "fly time must be an integer number of steps");
}

LineStepper::LineStepper(const CableParams& params, double r_a, double r_b)
    : z0_(params.z0), r_a_(r_a), r_b_(r_b), n_(params.n_delay),
      launched_a_(params.n_delay, 0.0), launched_b_(params.n_delay, 0.0) {
    params.validate();
    require(r_a > 0 && r_b > 0, "termination resistances must be positive");
}

EndpointSample LineStepper::step(double e_a, double e_b) noexcept {
    // Slot `head_` holds what each end launched n steps ago.
    const double w_a = launched_b_[head_];
    const double w_b = launched_a_[head_];

    EndpointSample s;
    s.i_a = (e_a - w_a) / (r_a_ + z0_);
    s.u_a = w_a + z0_ * s.i_a;  // == e_a - r_a i_a; this form keeps u == z0 i exact while w == 0
    s.i_b = (e_b - w_b) / (r_b_ + z0_);
    s.u_b = w_b + z0_ * s.i_b;

    launched_a_[head_] = s.u_a + z0_ * s.i_a;
    launched_b_[head_] = s.u_b + z0_ * s.i_b;
    if (++head_ == n_) head_ = 0;
    ++t_;
    return s;
}

TraceSet simulate_loop(const CableParams& params, const Termination& term_a,
                       const Termination& term_b, std::size_t n_steps) {
    require(term_a.source.size() >= n_steps && term_b.source.size() >= n_steps,
            "termination sources must cover every simulated step");
    LineStepper line(params, term_a.resistance, term_b.resistance);

    TraceSet out;
    out.dt = params.dt;
    out.u_a.resize(n_steps);
    out.i_a.resize(n_steps);
    out.u_b.resize(n_steps);
    out.i_b.resize(n_steps);
    for (std::size_t t = 0; t < n_steps; ++t) {
        const auto s = line.step(term_a.source[t], term_b.source[t]);
        out.u_a[t] = s.u_a;
        out.i_a[t] = s.i_a;
        out.u_b[t] = s.u_b;
        out.i_b[t] = s.i_b;
    }
    return out;
}

bool early_window_identity(const TraceSet& traces, const CableParams& params) {
    const std::size_t n = std::min(params.n_delay, traces.size());
    for (std::size_t t = 0; t < n; ++t) {
        if (traces.u_a[t] != params.z0 * traces.i_a[t]) return false;
        if (traces.u_b[t] != params.z0 * traces.i_b[t]) return false;
    }
    return true;
}

void write_trace_csv(std::ostream& out, const TraceSet& traces) {
    out << "t_s,u_a_v,i_a_a,u_b_v,i_b_a\n";
    char line[160];
    for (std::size_t t = 0; t < traces.size(); ++t) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<double>(t) * traces.dt, traces.u_a[t], traces.i_a[t], traces.u_b[t],
                      traces.i_b[t]);
        out << line;
    }
}

}  // namespace kljn::wire
