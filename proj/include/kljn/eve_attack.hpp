#pragma once

#include <cstddef>
#include <string_view>

#include "kljn/rng.hpp"
#include "kljn/vmg_physics.hpp"
#include "kljn/wireline.hpp"

namespace kljn::eve {

enum class Channel { Voltage, Current };

std::string_view to_string(Channel channel);

/// Observation starting at the connection instant (index 0).
struct ObservationWindow {
    std::size_t n_samples = 1;

    /// n = tau / dt, which must be an integer to within rounding.
    static ObservationWindow from_tau(double tau, double dt);
    double tau(double dt) const noexcept { return static_cast<double>(n_samples) * dt; }
};

struct MeanSquares {
    double msv_a = 0, msv_b = 0;  // V^2
    double msi_a = 0, msi_b = 0;  // A^2
};

struct Decision {
    Channel channel;
    physics::LoopState guess;
    bool tie_broken;
};

/// (1/N) sum x(t)^2 over the first N samples of each trace, summed left to right.
MeanSquares mean_squares(const wire::TraceSet& traces, ObservationWindow window);

/// During the transient the end with the larger mean square is taken to be
/// the lower resistance: a larger value at Alice's end means LH, at Bob's
/// end HL. Exact ties are settled by one fair coin drawn from `rng`.
Decision decide(const MeanSquares& ms, Channel channel, Rng& rng);

inline bool score(const Decision& decision, physics::LoopState truth) noexcept {
    return decision.guess == truth;
}

}  // namespace kljn::eve
