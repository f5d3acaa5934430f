#include "kljn/eve_attack.hpp"

#include <cmath>
#include <span>

#include "kljn/error.hpp"

namespace kljn::eve {

using physics::LoopState;

std::string_view to_string(Channel channel) {
    return channel == Channel::Voltage ? "voltage" : "current";
}

ObservationWindow ObservationWindow::from_tau(double tau, double dt) {
    detail::require(tau > 0 && dt > 0, "observation time and step must be positive");
    const double steps = tau / dt;
    const double rounded = std::round(steps);
    detail::require(rounded >= 1 && std::abs(steps - rounded) <= 1e-9 * steps,
                    "observation time must be a whole number of steps");
    return {static_cast<std::size_t>(rounded)};
}

namespace {
double mean_square(std::span<const double> x) {
    double acc = 0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}
}  // namespace

MeanSquares mean_squares(const wire::TraceSet& traces, ObservationWindow window) {
    detail::require(window.n_samples >= 1, "observation window must hold at least one sample");
    detail::require(window.n_samples <= traces.size(), "observation window is longer than the traces");
    const std::size_t n = window.n_samples;
    return {
        mean_square(std::span(traces.u_a).first(n)),
        mean_square(std::span(traces.u_b).first(n)),
        mean_square(std::span(traces.i_a).first(n)),
        mean_square(std::span(traces.i_b).first(n)),
    };
}

Decision decide(const MeanSquares& ms, Channel channel, Rng& rng) {
    const double a = channel == Channel::Voltage ? ms.msv_a : ms.msi_a;
    const double b = channel == Channel::Voltage ? ms.msv_b : ms.msi_b;
    if (a > b) return {channel, LoopState::LH, false};
    if (a < b) return {channel, LoopState::HL, false};
    std::bernoulli_distribution coin(0.5);
    return {channel, coin(rng) ? LoopState::HL : LoopState::LH, true};
}

}  // namespace kljn::eve
