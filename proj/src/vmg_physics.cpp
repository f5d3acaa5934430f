#include "kljn/vmg_physics.hpp"

#include <cmath>
#include <string>

#include "kljn/error.hpp"

namespace kljn::physics {

using detail::require;

void ResistorQuad::validate() const {
    require(r_ha > 0 && r_la > 0 && r_hb > 0 && r_lb > 0, "resistances must be positive");
    require(std::isfinite(r_ha) && std::isfinite(r_la) && std::isfinite(r_hb) && std::isfinite(r_lb),
            "resistances must be finite");
    require(r_ha > r_la, "Alice's high resistor must exceed her low resistor");
    require(r_hb > r_lb, "Bob's high resistor must exceed his low resistor");
}

std::string_view to_string(Role role) {
    switch (role) {
        case Role::HA: return "ha";
        case Role::LA: return "la";
        case Role::HB: return "hb";
        case Role::LB: return "lb";
    }
    return "?";
}

Role role_from_string(std::string_view text) {
    for (Role r : kAllRoles)
        if (to_string(r) == text) return r;
    throw InvalidParameter("unknown generator role '" + std::string(text) + "'");
}

std::string_view to_string(LoopState state) { return state == LoopState::HL ? "HL" : "LH"; }

LoopState loop_state_from_string(std::string_view text) {
    if (text == "HL" || text == "hl") return LoopState::HL;
    if (text == "LH" || text == "lh") return LoopState::LH;
    throw InvalidParameter("unknown loop state '" + std::string(text) + "'");
}

double NoiseTemperatures::temperature(Role role) const {
    switch (role) {
        case Role::HA: return t_ha;
        case Role::LA: return t_la;
        case Role::HB: return t_hb;
        case Role::LB: return t_lb;
    }
    return 0;
}

double NoiseTemperatures::rms(Role role) const {
    switch (role) {
        case Role::HA: return u_ha;
        case Role::LA: return u_la;
        case Role::HB: return u_hb;
        case Role::LB: return u_lb;
    }
    return 0;
}

double resistance(const ResistorQuad& quad, Role role) {
    switch (role) {
        case Role::HA: return quad.r_ha;
        case Role::LA: return quad.r_la;
        case Role::HB: return quad.r_hb;
        case Role::LB: return quad.r_lb;
    }
    return 0;
}

double rms_from_temperature(double t, double r, double b) {
    require(t >= 0, "temperature must be non-negative");
    require(r > 0, "resistance must be positive");
    require(b > 0, "bandwidth must be positive");
    return std::sqrt(4.0 * kBoltzmann * t * r * b);
}

double temperature_from_rms(double u, double r, double b) {
    require(u >= 0, "RMS voltage must be non-negative");
    require(r > 0, "resistance must be positive");
    require(b > 0, "bandwidth must be positive");
    return u * u / (4.0 * kBoltzmann * r * b);
}

VmgAmplitudeRatios vmg_amplitude_ratios(const ResistorQuad& q) {
    // Ordering is not required here: a quad with one side's H and L swapped
    // yields negative squares, which solve_vmg reports as non-physical.
    require(q.r_ha > 0 && q.r_la > 0 && q.r_hb > 0 && q.r_lb > 0, "resistances must be positive");
    require(std::isfinite(q.r_ha) && std::isfinite(q.r_la) && std::isfinite(q.r_hb) && std::isfinite(q.r_lb),
            "resistances must be finite");
    const double ha = q.r_ha, la = q.r_la, hb = q.r_hb, lb = q.r_lb;

    const double hb_num = lb * (ha + hb) - ha * hb - hb * hb;
    const double hb_den = la * la + lb * (la - ha) - ha * la;

    const double ha_num = lb * (ha + hb) + ha * hb + ha * ha;
    const double ha_den = la * la + lb * (la + hb) + hb * la;

    const double lb_num = lb * (ha - hb) - ha * hb + lb * lb;
    const double lb_den = la * la + la * (hb - ha) - ha * hb;

    return {hb_num / hb_den, ha_num / ha_den, lb_num / lb_den};
}

NoiseTemperatures solve_vmg(const ResistorQuad& quad, double u_la, double bandwidth) {
    require(u_la > 0 && std::isfinite(u_la), "U_LA must be positive");
    require(bandwidth > 0 && std::isfinite(bandwidth), "bandwidth must be positive");

    const auto ratios = vmg_amplitude_ratios(quad);
    const double ref = u_la * u_la;

    auto check = [](double sq, const char* name) {
        if (!(sq > 0) || !std::isfinite(sq))
            throw NonPhysicalConfiguration(std::string("VMG amplitude ") + name +
                                           "^2 is not positive for this resistor quad (" +
                                           std::to_string(sq) + " x U_LA^2)");
    };
    check(ratios.u_hb_sq, "U_HB");
    check(ratios.u_ha_sq, "U_HA");
    check(ratios.u_lb_sq, "U_LB");
    quad.validate();

    NoiseTemperatures out;
    out.bandwidth = bandwidth;
    out.u_la = u_la;
    out.u_hb = std::sqrt(ratios.u_hb_sq * ref);
    out.u_ha = std::sqrt(ratios.u_ha_sq * ref);
    out.u_lb = std::sqrt(ratios.u_lb_sq * ref);
    out.t_la = temperature_from_rms(out.u_la, quad.r_la, bandwidth);
    out.t_hb = temperature_from_rms(out.u_hb, quad.r_hb, bandwidth);
    out.t_ha = temperature_from_rms(out.u_ha, quad.r_ha, bandwidth);
    out.t_lb = temperature_from_rms(out.u_lb, quad.r_lb, bandwidth);
    return out;
}

Resultant resultant_resistances(double r_a, double r_b) {
    require(r_a > 0 && r_b > 0, "resistances must be positive");
    return {r_a * r_b / (r_a + r_b), r_a + r_b};
}

SteadyStateObservables steady_state_observables(LoopState state, const ResistorQuad& quad,
                                                const NoiseTemperatures& temps) {
    const auto roles = roles_for(state);
    const double ra = resistance(quad, roles.alice);
    const double rb = resistance(quad, roles.bob);
    const double ua2 = temps.rms(roles.alice) * temps.rms(roles.alice);
    const double ub2 = temps.rms(roles.bob) * temps.rms(roles.bob);
    const auto res = resultant_resistances(ra, rb);
    const double s2 = res.serial * res.serial;

    // Two independent sources through a series loop: superpose in power.
    return {
        (ua2 * rb * rb + ub2 * ra * ra) / s2,
        (ua2 + ub2) / s2,
        (ua2 * rb - ub2 * ra) / s2,
        res.parallel,
        res.serial,
    };
}

}  // namespace kljn::physics
