#include <doctest.h>

#include <cmath>
#include <random>

#include "kljn/error.hpp"
#include "kljn/vmg_physics.hpp"

using namespace kljn;
using namespace kljn::physics;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

const ResistorQuad kTable1{11e3, 3e3, 9e3, 2e3};

}  // namespace

TEST_CASE("Boltzmann constant is the SI value") { CHECK(kBoltzmann == 1.380649e-23); }

TEST_CASE("rms_from_temperature") {
    CHECK(rms_from_temperature(0.0, 1e3, 5e3) == 0.0);
    // Table value T_LA, rounded to three figures, maps back to U_LA = 1 V.
    CHECK(rel_close(rms_from_temperature(1.21e15, 3e3, 5e3), 1.0, 5e-3));
    // sqrt(4 * 1.380649e-23 * 1e15 * 2e3 * 5e3), evaluated separately.
    CHECK(rel_close(rms_from_temperature(1e15, 2e3, 5e3), 0.7431417092318261, 1e-14));

    CHECK_THROWS_AS(rms_from_temperature(1.0, 0.0, 5e3), InvalidParameter);
    CHECK_THROWS_AS(rms_from_temperature(1.0, 1e3, -1.0), InvalidParameter);
    CHECK_THROWS_AS(rms_from_temperature(-1.0, 1e3, 5e3), InvalidParameter);
    CHECK_THROWS_AS(temperature_from_rms(1.0, 1e3, 0.0), InvalidParameter);
}

TEST_CASE("temperature/rms round trip over many decades") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lt(-3, 18), lr(0, 7), lb(0, 9);
    for (int k = 0; k < 20000; ++k) {
        const double t = std::pow(10.0, lt(rng)), r = std::pow(10.0, lr(rng)), b = std::pow(10.0, lb(rng));
        const double back = temperature_from_rms(rms_from_temperature(t, r, b), r, b);
        REQUIRE(rel_close(back, t, 1e-12));
    }
}

TEST_CASE("VMG squared amplitudes for the reference quad") {
    // Hand-evaluated numerators / denominators:
    //   U_HB^2: (2k*20k - 99M - 81M) / (9M + 2k*(-8k) - 33M) = -140M / -40M
    //   U_HA^2: (2k*20k + 99M + 121M) / (9M + 2k*12k + 27M)  =  260M / 60M
    //   U_LB^2: (2k*2k - 99M + 4M)    / (9M + 3k*(-2k) - 99M) =  -91M / -96M
    const auto r = vmg_amplitude_ratios(kTable1);
    CHECK(rel_close(r.u_hb_sq, 3.5, 1e-12));
    CHECK(rel_close(r.u_ha_sq, 13.0 / 3.0, 1e-12));
    CHECK(rel_close(r.u_lb_sq, 91.0 / 96.0, 1e-12));
    CHECK(rel_close(r.u_ha_sq, 4.3333, 1e-4));
    CHECK(rel_close(r.u_lb_sq, 0.94792, 1e-4));
}

TEST_CASE("solve_vmg reproduces the published temperatures") {
    const auto t = solve_vmg(kTable1, 1.0, 5e3);
    CHECK(rel_close(t.t_ha, 1.43e15, 0.01));
    CHECK(rel_close(t.t_lb, 1.72e15, 0.01));
    CHECK(rel_close(t.t_la, 1.21e15, 0.01));
    CHECK(rel_close(t.t_hb, 1.41e15, 0.01));

    // Full-precision values from u^2 / (4 k R B).
    CHECK(rel_close(t.t_ha, 1.426645707704832e15, 1e-12));
    CHECK(rel_close(t.t_lb, 1.716433117082377e15, 1e-12));
    CHECK(rel_close(t.t_la, 1.2071617526733198e15, 1e-12));
    CHECK(rel_close(t.t_hb, 1.4083553781188735e15, 1e-12));

    CHECK(t.u_la == 1.0);
    CHECK(t.bandwidth == 5e3);
    for (Role role : kAllRoles) {
        const double u = t.rms(role), temp = t.temperature(role);
        CHECK(u > 0);
        CHECK(rel_close(u * u, 4 * kBoltzmann * temp * resistance(kTable1, role) * 5e3, 1e-12));
    }
}

TEST_CASE("solve_vmg scales with the reference amplitude") {
    const auto a = solve_vmg(kTable1, 1.0, 5e3);
    const auto b = solve_vmg(kTable1, 3.0, 5e3);
    for (Role role : kAllRoles) CHECK(rel_close(b.rms(role), 3.0 * a.rms(role), 1e-12));
}

TEST_CASE("symmetric quad degenerates to the ideal scheme") {
    const ResistorQuad q{10e3, 1e3, 10e3, 1e3};
    const auto t = solve_vmg(q, 1.0, 5e3);
    CHECK(rel_close(t.t_ha, t.t_hb, 1e-9));
    CHECK(rel_close(t.t_la, t.t_lb, 1e-9));
    CHECK(rel_close(t.u_ha * t.u_ha, 10.0, 1e-12));
    // u_h^2 = u_l^2 R_H / R_L means one common temperature for all four.
    CHECK(rel_close(t.t_ha, t.t_la, 1e-9));
    const auto hl = steady_state_observables(LoopState::HL, q, t);
    CHECK(std::abs(hl.p_flow) <= 1e-12 * hl.u_ms / 1e3);
}

TEST_CASE("solve_vmg rejects unrealizable quads") {
    // One side's H and L swapped: two squared amplitudes turn negative.
    CHECK_THROWS_AS(solve_vmg({2e3, 3e3, 9e3, 2e3}, 1.0, 5e3), NonPhysicalConfiguration);
    CHECK_THROWS_AS(solve_vmg({11e3, 3e3, 1e3, 2e3}, 1.0, 5e3), NonPhysicalConfiguration);
    // Equal H and L on a side: 0/0.
    CHECK_THROWS_AS(solve_vmg({3e3, 3e3, 9e3, 2e3}, 1.0, 5e3), NonPhysicalConfiguration);
    // Both sides swapped keeps the squares positive but breaks the labelling.
    CHECK_THROWS_AS(solve_vmg({3e3, 11e3, 2e3, 9e3}, 1.0, 5e3), InvalidParameter);
    CHECK_THROWS_AS(solve_vmg({-1.0, 3e3, 9e3, 2e3}, 1.0, 5e3), InvalidParameter);
    CHECK_THROWS_AS(solve_vmg(kTable1, 0.0, 5e3), InvalidParameter);
    CHECK_THROWS_AS(solve_vmg(kTable1, 1.0, 0.0), InvalidParameter);
}

TEST_CASE("fuzz: solve_vmg never returns NaN or a non-positive amplitude") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lr(0, 7);
    int accepted = 0;
    for (int k = 0; k < 50000; ++k) {
        const ResistorQuad q{std::pow(10.0, lr(rng)), std::pow(10.0, lr(rng)), std::pow(10.0, lr(rng)),
                             std::pow(10.0, lr(rng))};
        try {
            const auto t = solve_vmg(q, 1.0, 5e3);
            ++accepted;
            for (Role role : kAllRoles) {
                REQUIRE(std::isfinite(t.rms(role)));
                REQUIRE(t.rms(role) > 0);
                REQUIRE(t.temperature(role) > 0);
            }
            // The security identities hold for every accepted quad.
            const auto hl = steady_state_observables(LoopState::HL, q, t);
            const auto lh = steady_state_observables(LoopState::LH, q, t);
            REQUIRE(rel_close(hl.u_ms, lh.u_ms, 1e-9));
            REQUIRE(rel_close(hl.i_ms, lh.i_ms, 1e-9));
            REQUIRE(std::abs(hl.p_flow - lh.p_flow) <= 1e-9 * std::abs(hl.p_flow) + 1e-9 * hl.u_ms / q.r_la);
        } catch (const NonPhysicalConfiguration&) {
        } catch (const InvalidParameter&) {
        }
    }
    CHECK(accepted > 5000);
}

TEST_CASE("resultant resistances") {
    auto r = resultant_resistances(11e3, 2e3);
    CHECK(rel_close(r.parallel, 1692.3076923076924, 1e-12));
    CHECK(r.serial == 13000.0);
    r = resultant_resistances(3e3, 9e3);
    CHECK(rel_close(r.parallel, 2250.0, 1e-12));
    CHECK(r.serial == 12000.0);
    r = resultant_resistances(470.0, 470.0);
    CHECK(r.parallel == 235.0);
    CHECK(r.serial == 940.0);
    CHECK_THROWS_AS(resultant_resistances(0.0, 1.0), InvalidParameter);
}

TEST_CASE("lumped steady state for the reference quad") {
    const auto t = solve_vmg(kTable1, 1.0, 5e3);
    // HL: u_A^2 = 13/3 on 11k, u_B^2 = 91/96 on 2k.
    const double u_a2 = 13.0 / 3.0, u_b2 = 91.0 / 96.0, ra = 11e3, rb = 2e3, rs2 = 13e3 * 13e3;
    const double u_ms = (u_a2 * rb * rb + u_b2 * ra * ra) / rs2;
    const double i_ms = (u_a2 + u_b2) / rs2;
    const double p = (u_a2 * rb - u_b2 * ra) / rs2;
    CHECK(rel_close(u_ms, 0.78125, 1e-12));
    CHECK(rel_close(i_ms, 3.125e-8, 1e-12));

    for (LoopState st : {LoopState::HL, LoopState::LH}) {
        const auto o = steady_state_observables(st, kTable1, t);
        CHECK(rel_close(o.u_ms, 0.78125, 1e-9));
        CHECK(rel_close(o.i_ms, 3.125e-8, 1e-9));
        CHECK(rel_close(o.p_flow, p, 1e-9));
        CHECK(rel_close(o.p_flow, -1.0417e-5, 1e-4));
        CHECK(o.r_parallel <= 2250.0);
        CHECK(o.r_serial > 11e3);
    }
    const auto lh = steady_state_observables(LoopState::LH, kTable1, t);
    CHECK(rel_close(lh.r_parallel, 2250.0, 1e-12));
    CHECK(lh.r_serial == 12000.0);
}

TEST_CASE("uniform temperature means zero power flow") {
    const ResistorQuad q{10e3, 1e3, 10e3, 1e3};
    NoiseTemperatures t;
    t.bandwidth = 5e3;
    t.t_ha = t.t_la = t.t_hb = t.t_lb = 300.0;
    t.u_ha = rms_from_temperature(300, q.r_ha, 5e3);
    t.u_la = rms_from_temperature(300, q.r_la, 5e3);
    t.u_hb = rms_from_temperature(300, q.r_hb, 5e3);
    t.u_lb = rms_from_temperature(300, q.r_lb, 5e3);
    const auto o = steady_state_observables(LoopState::HL, q, t);
    CHECK(std::abs(o.p_flow) <= 1e-15 * o.u_ms / q.r_la);
}

TEST_CASE("loop roles and names") {
    CHECK(roles_for(LoopState::HL).alice == Role::HA);
    CHECK(roles_for(LoopState::HL).bob == Role::LB);
    CHECK(roles_for(LoopState::LH).alice == Role::LA);
    CHECK(roles_for(LoopState::LH).bob == Role::HB);
    for (Role r : kAllRoles) CHECK(role_from_string(to_string(r)) == r);
    CHECK(loop_state_from_string("LH") == LoopState::LH);
    CHECK_THROWS_AS(loop_state_from_string("HH"), InvalidParameter);
    CHECK_THROWS_AS(ResistorQuad({1e3, 2e3, 9e3, 2e3}).validate(), InvalidParameter);
}
