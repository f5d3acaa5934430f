#include "kljn/montecarlo.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "kljn/error.hpp"

namespace kljn::mc {

using physics::LoopState;

namespace {

// Cases A-D undefended, E-H with slope-matched zero-crossing starts.
constexpr std::array<ReferenceCase, 8> kReferenceCases{{
    {'A', LoopState::HL, false, 1, 0.664, 0.012, 0.664, 0.012},
    {'B', LoopState::HL, false, 4, 0.756, 0.013, 0.786, 0.009},
    {'C', LoopState::LH, false, 1, 0.640, 0.014, 0.640, 0.014},
    {'D', LoopState::LH, false, 4, 0.636, 0.018, 0.652, 0.016},
    {'E', LoopState::HL, true, 1, 0.502, 0.016, 0.502, 0.016},
    {'F', LoopState::HL, true, 4, 0.535, 0.013, 0.534, 0.015},
    {'G', LoopState::LH, true, 1, 0.504, 0.014, 0.504, 0.014},
    {'H', LoopState::LH, true, 4, 0.522, 0.023, 0.520, 0.018},
}};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ChannelVerdict make_verdict(const ReferenceCase& ref, const ScenarioResult& r, eve::Channel ch) {
    ChannelVerdict v;
    v.channel = ch;
    const bool volt = ch == eve::Channel::Voltage;
    v.mean = volt ? r.p_ev_mean : r.p_ei_mean;
    v.std = volt ? r.p_ev_std : r.p_ei_std;
    v.reference = volt ? ref.p_v : ref.p_i;
    v.reference_std = volt ? ref.p_v_std : ref.p_i_std;
    v.pass = verdict(ref, ch, v.mean);
    return v;
}

template <class E>
[[noreturn]] void rethrow_labelled(char label, const E& e) {
    throw E(std::string("case ") + label + ": " + e.what());
}

}  // namespace

std::span<const ReferenceCase> reference_cases() { return kReferenceCases; }

double reference_value(const ReferenceCase& ref, eve::Channel channel) {
    return channel == eve::Channel::Voltage ? ref.p_v : ref.p_i;
}

bool verdict(const ReferenceCase& ref, eve::Channel channel, double measured) {
    if (!std::isfinite(measured)) return false;
    if (!ref.defense)
        return std::abs(measured - reference_value(ref, channel)) <= kNoDefenseAbsTol &&
               measured >= kNoDefenseFloor;
    const double tol = ref.tau_fly <= 1.0 ? kDefenseTolShort : kDefenseTolLong;
    return std::abs(measured - 0.5) <= tol;
}

bool TablesReport::all_pass() const {
    for (const auto& c : cases)
        if (!c.voltage.pass || !c.current.pass) return false;
    return true;
}

TablesReport reproduce_tables(const Experiment& ex, const TablesOptions& options) {
    TablesReport report;
    report.statistically_void = options.smoke;
    for (const auto& ref : kReferenceCases) {
        if (options.cases.find(ref.label) == std::string::npos) continue;
        Scenario s;
        s.case_label = std::string(1, ref.label);
        s.state = ref.state;
        s.defense = ref.defense;
        s.tau_fly_multiples = ref.tau_fly;
        s.runs_per_batch = options.runs;
        s.repeats = options.repeats;
        s.master_seed = options.master_seed;

        ScenarioResult r;
        try {
            r = run_scenario(s, ex);
        } catch (const PairingExhausted& e) {
            rethrow_labelled(ref.label, e);
        } catch (const NonPhysicalConfiguration& e) {
            rethrow_labelled(ref.label, e);
        } catch (const InvalidParameter& e) {
            rethrow_labelled(ref.label, e);
        }
        report.cases.push_back({ref, r, make_verdict(ref, r, eve::Channel::Voltage),
                                make_verdict(ref, r, eve::Channel::Current)});
    }
    return report;
}

void write_results_csv(std::ostream& out, const TablesReport& report) {
    out << "case,state,defense,tau_fly,channel,repeat,p_e\n";
    for (const auto& c : report.cases) {
        for (std::size_t k = 0; k < c.result.per_repeat.size(); ++k) {
            const auto& rr = c.result.per_repeat[k];
            for (auto ch : {eve::Channel::Voltage, eve::Channel::Current}) {
                out << c.reference.label << ',' << physics::to_string(c.reference.state) << ','
                    << (c.reference.defense ? 1 : 0) << ',' << fmt17(c.reference.tau_fly) << ','
                    << eve::to_string(ch) << ',' << k << ','
                    << fmt17(ch == eve::Channel::Voltage ? rr.p_ev : rr.p_ei) << '\n';
            }
        }
    }
}

void write_summary_csv(std::ostream& out, const TablesReport& report) {
    // Column names are part of the published file schema.
    out << "case,channel,p_e_mean,p_e_std,paper_value,paper_std,pass\n";
    for (const auto& c : report.cases) {
        for (const auto* v : {&c.voltage, &c.current}) {
            out << c.reference.label << ',' << eve::to_string(v->channel) << ',' << fmt17(v->mean) << ','
                << fmt17(v->std) << ',' << fmt17(v->reference) << ',' << fmt17(v->reference_std) << ','
                << (report.statistically_void ? "void" : (v->pass ? "pass" : "fail")) << '\n';
        }
    }
}

void print_tables(std::ostream& out, const TablesReport& report) {
    char line[200];
    std::snprintf(line, sizeof line, "%-4s %-3s %-7s %-4s | %-17s %-13s %-6s | %-17s %-13s %-6s\n", "case",
                  "st", "defense", "tau", "p_E,V measured", "reference", "", "p_E,I measured", "reference", "");
    out << line;
    for (const auto& c : report.cases) {
        auto tag = [&](const ChannelVerdict& v) {
            return report.statistically_void ? "void" : (v.pass ? "PASS" : "FAIL");
        };
        std::snprintf(line, sizeof line,
                      "%-4c %-3s %-7s %-4g | %.3f +- %.3f    %.3f +- %.3f %-6s | %.3f +- %.3f    %.3f +- %.3f %-6s\n",
                      c.reference.label, std::string(physics::to_string(c.reference.state)).c_str(),
                      c.reference.defense ? "yes" : "no", c.reference.tau_fly, c.voltage.mean, c.voltage.std,
                      c.voltage.reference, c.voltage.reference_std, tag(c.voltage), c.current.mean,
                      c.current.std, c.current.reference, c.current.reference_std, tag(c.current));
        out << line;
    }
    if (report.statistically_void)
        out << "verdicts are statistically void (smoke mode)\n";
}

}  // namespace kljn::mc
