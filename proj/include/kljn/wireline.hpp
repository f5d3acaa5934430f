#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace kljn::wire {

/// Lossless line discretized so that the one-way delay is an integer number
/// of steps.
struct CableParams {
    double z0 = 50.0;        // Ohm
    double fly_time = 1e-5;  // s
    double dt = 1e-7;        // s
    std::size_t n_delay = 100;

    static CableParams from_fly_time(double z0, double fly_time, std::size_t samples_per_fly);

    void validate() const;
    double sample_rate() const noexcept { return 1.0 / dt; }
};

/// A resistor in series with a voltage generator, closing one end of the line.
struct Termination {
    double resistance;
    std::span<const double> source;  // E(t), one value per step
};

/// Endpoint voltages and into-the-line currents.
struct TraceSet {
    std::vector<double> u_a, i_a, u_b, i_b;
    double dt = 0;

    std::size_t size() const noexcept { return u_a.size(); }
};

struct EndpointSample {
    double u_a, i_a, u_b, i_b;
};

/// Method-of-characteristics (Bergeron) stepper. Each end sees the line as
/// z0 in series with a history source equal to the wave launched from the
/// far end n_delay steps earlier:
///
///   W_a(t) = u_b(t - n) + z0 i_b(t - n),   i_a = (E_a - W_a) / (R_a + z0)
///
/// and symmetrically at B. Starts from a quiescent line.
class LineStepper {
public:
    LineStepper(const CableParams& params, double r_a, double r_b);

    EndpointSample step(double e_a, double e_b) noexcept;
    std::size_t steps_taken() const noexcept { return t_; }

private:
    double z0_, r_a_, r_b_;
    std::size_t n_;
    std::size_t t_ = 0;
    std::size_t head_ = 0;
    std::vector<double> launched_a_;  // u_a + z0 i_a, ring of n_delay
    std::vector<double> launched_b_;
};

TraceSet simulate_loop(const CableParams& params, const Termination& term_a,
                       const Termination& term_b, std::size_t n_steps);

/// True iff u == z0 * i bit-for-bit at both ends for every index < n_delay.
bool early_window_identity(const TraceSet& traces, const CableParams& params);

/// CSV with header t_s,u_a_v,i_a_a,u_b_v,i_b_a and %.17g fields.
void write_trace_csv(std::ostream& out, const TraceSet& traces);

}  // namespace kljn::wire
