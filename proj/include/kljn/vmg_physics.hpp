#pragma once

#include <array>
#include <string_view>

namespace kljn::physics {

/// Boltzmann constant, J/K (exact since the 2019 SI redefinition).
inline constexpr double kBoltzmann = 1.380649e-23;

/// The four switchable resistors. H exceeds L on each side.
struct ResistorQuad {
    double r_ha = 11e3;
    double r_la = 3e3;
    double r_hb = 9e3;
    double r_lb = 2e3;

    /// Throws InvalidParameter unless all four are positive and H > L per side.
    void validate() const;

    bool operator==(const ResistorQuad&) const = default;
};

/// Which resistor/generator pair a party connects during a bit exchange period.
enum class Role { HA, LA, HB, LB };

inline constexpr std::array<Role, 4> kAllRoles{Role::HA, Role::LA, Role::HB, Role::LB};

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

/// Secure loop states: HL = Alice high, Bob low; LH = Alice low, Bob high.
enum class LoopState { HL, LH };

std::string_view to_string(LoopState state);
LoopState loop_state_from_string(std::string_view text);

struct NoiseTemperatures {
    double t_ha = 0, t_la = 0, t_hb = 0, t_lb = 0;  // K
    double u_ha = 0, u_la = 0, u_hb = 0, u_lb = 0;  // generator RMS, V
    double bandwidth = 0;                           // Hz

    double temperature(Role role) const;
    double rms(Role role) const;
};

double resistance(const ResistorQuad& quad, Role role);

/// Roles connected at Alice's and Bob's ends for a given loop state.
struct LoopRoles {
    Role alice;
    Role bob;
};

constexpr LoopRoles roles_for(LoopState state) noexcept {
    return state == LoopState::HL ? LoopRoles{Role::HA, Role::LB} : LoopRoles{Role::LA, Role::HB};
}

/// sqrt(4 k T R B).
double rms_from_temperature(double t, double r, double b);

/// Exact algebraic inverse of rms_from_temperature.
double temperature_from_rms(double u, double r, double b);

/// VMG noise temperatures with U_LA as the free reference amplitude.
///
/// The three dependent squared amplitudes are rational functions of the
/// resistors; a quad for which any of them is non-positive (or singular)
/// cannot be realized and throws NonPhysicalConfiguration. For quads with
/// H > L on both sides all three are positive; swapping one side's pair
/// makes two of them negative, equal H and L make them singular.
NoiseTemperatures solve_vmg(const ResistorQuad& quad, double u_la, double bandwidth);

/// The three dependent squared amplitudes, relative to U_LA^2 = 1.
struct VmgAmplitudeRatios {
    double u_hb_sq;
    double u_ha_sq;
    double u_lb_sq;
};
VmgAmplitudeRatios vmg_amplitude_ratios(const ResistorQuad& quad);

struct Resultant {
    double parallel;
    double serial;
};
Resultant resultant_resistances(double r_a, double r_b);

/// Zero-length (lumped) predictions for the wire in one loop state.
struct SteadyStateObservables {
    double u_ms;        // V^2
    double i_ms;        // A^2
    double p_flow;      // W, positive when Alice delivers net power to Bob
    double r_parallel;  // Ohm
    double r_serial;    // Ohm
};

SteadyStateObservables steady_state_observables(LoopState state, const ResistorQuad& quad,
                                                const NoiseTemperatures& temps);

}  // namespace kljn::physics
