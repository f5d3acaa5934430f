#include "kljn/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "kljn/error.hpp"
#include "kljn/wireline.hpp"

namespace kljn::cli {

namespace fs = std::filesystem;
using physics::Role;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

bool has_records(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) return false;
    for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.path().extension() == ".knr") return true;
    return false;
}

mc::Experiment make_experiment(const RunConfig& c, const physics::NoiseTemperatures& temps,
                               const noise::NoiseDatabase& db, unsigned workers) {
    mc::Experiment ex;
    ex.quad = c.quad;
    ex.temps = temps;
    ex.cable = c.cable();
    ex.database = &db;
    ex.pairing = c.pairing_options();
    ex.workers = workers;
    return ex;
}

// ---------------------------------------------------------------------------

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::string database_dir;
    unsigned workers = 1;
};

RunConfig resolve_config(const CommonArgs& a) {
    RunConfig c = a.config_path.empty() ? RunConfig{} : load_config_file(a.config_path);
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidParameter("--set expects key=value, got '" + kv + "'");
        std::string key = kv.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), [](char ch) { return ch == ' '; }), key.end());
        apply_setting(c, key, kv.substr(eq + 1));
    }
    if (!a.output_dir.empty()) c.output_dir = a.output_dir;
    if (!a.database_dir.empty()) c.database_dir = a.database_dir;
    c.validate();
    return c;
}

void print_solution(std::ostream& out, const RunConfig& c, const physics::NoiseTemperatures& t) {
    char line[160];
    std::snprintf(line, sizeof line, "VMG noise temperatures (U_LA = %g V, B = %g Hz)\n", c.u_la, c.bandwidth);
    out << line;
    std::snprintf(line, sizeof line, "%-10s %-12s %-14s %-12s\n", "resistor", "R [Ohm]", "T_eff [K]", "U_rms [V]");
    out << line;
    for (Role r : {Role::HA, Role::LB, Role::LA, Role::HB}) {
        std::string name = "R_" + std::string(physics::to_string(r));
        std::transform(name.begin(), name.end(), name.begin(), [](char ch) { return static_cast<char>(std::toupper(ch)); });
        name[1] = '_';
        std::snprintf(line, sizeof line, "%-10s %-12g %-14.4e %-12.6g\n", name.c_str(),
                      physics::resistance(c.quad, r), t.temperature(r), t.rms(r));
        out << line;
    }
    out << "HL state: R_HA (Alice), R_LB (Bob); LH state: R_LA (Alice), R_HB (Bob)\n";
}

int cmd_solve(const CommonArgs& a, std::ostream& out) {
    const RunConfig c = resolve_config(a);
    const auto temps = physics::solve_vmg(c.quad, c.u_la, c.bandwidth);
    print_solution(out, c, temps);
    return kExitOk;
}

int cmd_gen_noise(const CommonArgs& a, std::ostream& out) {
    RunConfig c = resolve_config(a);
    if (c.database_dir.empty()) c.database_dir = "noise_db";
    const auto temps = physics::solve_vmg(c.quad, c.u_la, c.bandwidth);
    const auto db = noise::NoiseDatabase::build(temps, c.database_options());
    const auto paths = db.save(c.database_dir);
    std::size_t idx = 0;
    char line[256];
    for (Role r : physics::kAllRoles) {
        for (const auto& rec : db.records(r)) {
            const auto x = rec.samples();
            double ss = 0;
            for (double v : x) ss += v * v;
            const double rms = std::sqrt(ss / static_cast<double>(x.size()));
            std::snprintf(line, sizeof line, "%s  rms %.6g V (target %.6g, %+.2f%%)  %zu start candidates\n",
                          paths[idx].string().c_str(), rms, rec.spec().target_rms,
                          100.0 * (rms / rec.spec().target_rms - 1.0), db.candidates(r).size());
            out << line;
            ++idx;
        }
    }
    return kExitOk;
}

void write_config_echo(const RunConfig& c) {
    const fs::path path = fs::path(c.output_dir) / "config.txt";
    auto f = open_output(path);
    f << to_config_text(c);
    finish_output(f, path);
}

int cmd_reproduce(const CommonArgs& a, const std::string& cases, bool smoke, std::ostream& out) {
    RunConfig c = resolve_config(a);
    if (smoke) {
        c.runs = 10;
        c.repeats = 2;
        c.record_length = std::min<std::size_t>(c.record_length, std::size_t{1} << 20);
        c.records_per_role = 1;
    }
    std::string selected;
    for (char ch : cases) {
        if (ch == ',' || ch == ' ') continue;
        const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (up < 'A' || up > 'H') throw InvalidParameter(std::string("unknown case '") + ch + "' (expected A-H)");
        if (selected.find(up) == std::string::npos) selected += up;
    }
    if (selected.empty()) throw InvalidParameter("no cases selected");

    const auto temps = physics::solve_vmg(c.quad, c.u_la, c.bandwidth);
    const auto db = obtain_database(c, temps, out);
    const auto ex = make_experiment(c, temps, db, a.workers);

    mc::TablesOptions opt;
    opt.runs = c.runs;
    opt.repeats = c.repeats;
    opt.master_seed = c.master_seed;
    opt.cases = selected;
    opt.smoke = smoke;
    const auto report = mc::reproduce_tables(ex, opt);
    mc::print_tables(out, report);

    const fs::path dir = c.output_dir;
    {
        auto f = open_output(dir / "results.csv");
        mc::write_results_csv(f, report);
        finish_output(f, dir / "results.csv");
    }
    {
        auto f = open_output(dir / "summary.csv");
        mc::write_summary_csv(f, report);
        finish_output(f, dir / "summary.csv");
    }
    {
        auto f = open_output(dir / "report.json");
        f << report_json(c, report) << '\n';
        finish_output(f, dir / "report.json");
    }
    write_config_echo(c);
    out << "wrote " << (dir / "summary.csv").string() << ", results.csv, report.json\n";
    if (smoke) return kExitOk;
    return report.all_pass() ? kExitOk : kExitInvalid;
}

int cmd_steady_state(const CommonArgs& a, std::ostream& out) {
    const RunConfig c = resolve_config(a);
    const auto temps = physics::solve_vmg(c.quad, c.u_la, c.bandwidth);
    mc::SteadyStateOptions opt;
    opt.seed = derive_seed(c.master_seed, {tag(Stream::SteadyAlice)});
    const auto report = mc::steady_state_check(c.quad, temps, c.cable(), c.steady_duration, opt);
    mc::print_steady_state(out, report);
    return kExitOk;
}

mc::Scenario custom_scenario(const RunConfig& c, double tau) {
    mc::Scenario s;
    s.case_label = "custom";
    s.state = c.state;
    s.defense = c.defense;
    s.tau_fly_multiples = tau;
    s.runs_per_batch = c.runs;
    s.repeats = c.repeats;
    s.master_seed = c.master_seed;
    return s;
}

int cmd_run(const CommonArgs& a, std::ostream& out) {
    const RunConfig c = resolve_config(a);
    const auto temps = physics::solve_vmg(c.quad, c.u_la, c.bandwidth);
    const auto db = obtain_database(c, temps, out);
    const auto ex = make_experiment(c, temps, db, a.workers);

    const fs::path path = fs::path(c.output_dir) / "results.csv";
    auto f = open_output(path);
    f << "case,state,defense,tau_fly,channel,repeat,p_e\n";
    char line[200];
    std::snprintf(line, sizeof line, "%-6s %-3s %-7s | %-18s | %-18s\n", "tau", "st", "defense", "p_E,V mean +- std",
                  "p_E,I mean +- std");
    out << line;
    for (double tau : c.tau_multiples) {
        const auto s = custom_scenario(c, tau);
        const auto r = mc::run_scenario(s, ex);
        for (std::size_t k = 0; k < r.per_repeat.size(); ++k) {
            for (auto ch : {eve::Channel::Voltage, eve::Channel::Current}) {
                f << "custom," << physics::to_string(c.state) << ',' << (c.defense ? 1 : 0) << ',' << fmt17(tau)
                  << ',' << eve::to_string(ch) << ',' << k << ','
                  << fmt17(ch == eve::Channel::Voltage ? r.per_repeat[k].p_ev : r.per_repeat[k].p_ei) << '\n';
            }
        }
        std::snprintf(line, sizeof line, "%-6g %-3s %-7s | %.4f +- %.4f    | %.4f +- %.4f\n", tau,
                      std::string(physics::to_string(c.state)).c_str(), c.defense ? "yes" : "no", r.p_ev_mean,
                      r.p_ev_std, r.p_ei_mean, r.p_ei_std);
        out << line;
    }
    finish_output(f, path);
    write_config_echo(c);
    return kExitOk;
}

int cmd_dump_traces(const CommonArgs& a, std::size_t repeat, std::size_t run_index, std::ostream& out) {
    const RunConfig c = resolve_config(a);
    const auto temps = physics::solve_vmg(c.quad, c.u_la, c.bandwidth);
    const auto db = obtain_database(c, temps, out);
    const auto ex = make_experiment(c, temps, db, 1);
    const auto s = custom_scenario(c, c.tau_multiples.front());
    const auto traces = mc::run_traces(s, ex, mc::run_seed(c.master_seed, repeat, run_index));

    const fs::path path = fs::path(c.output_dir) / "traces.csv";
    auto f = open_output(path);
    wire::write_trace_csv(f, traces);
    finish_output(f, path);
    out << "wrote " << traces.size() << " samples to " << path.string() << '\n';
    return kExitOk;
}

}  // namespace

noise::NoiseDatabase obtain_database(const RunConfig& c, const physics::NoiseTemperatures& temps,
                                     std::ostream& log) {
    if (!c.database_dir.empty() && has_records(c.database_dir)) {
        auto db = noise::NoiseDatabase::load(c.database_dir, c.effective_fit_window(), c.start_threshold);
        const auto shape = c.noise_shape();
        for (Role r : physics::kAllRoles) {
            if (db.records(r).empty())
                throw InvalidParameter("database " + c.database_dir + " has no records for role " +
                                       std::string(physics::to_string(r)));
            for (const auto& rec : db.records(r)) {
                const auto& sp = rec.spec();
                if (!close_rel(sp.sample_rate, shape.sample_rate, 1e-12) ||
                    !close_rel(sp.bandwidth, shape.bandwidth, 1e-12) || !close_rel(sp.target_rms, temps.rms(r), 1e-9))
                    throw InvalidParameter("database " + c.database_dir +
                                           " was generated for a different configuration; regenerate it with gen-noise");
            }
        }
        log << "loaded noise database from " << c.database_dir << '\n';
        return db;
    }
    log << "synthesizing noise database (" << c.records_per_role << " x " << c.record_length
        << " samples per role)\n";
    return noise::NoiseDatabase::build(temps, c.database_options());
}

std::string report_json(const RunConfig& c, const mc::TablesReport& report) {
    using nlohmann::json;
    auto channel = [](const mc::ChannelVerdict& v) {
        return json{{"mean", v.mean}, {"std", v.std}, {"reference", v.reference},
                    {"reference_std", v.reference_std}, {"pass", v.pass}};
    };
    json cases = json::array();
    for (const auto& cr : report.cases) {
        json reps = json::array();
        for (const auto& rr : cr.result.per_repeat) reps.push_back({{"p_ev", rr.p_ev}, {"p_ei", rr.p_ei}});
        cases.push_back({{"case", std::string(1, cr.reference.label)},
                         {"state", std::string(physics::to_string(cr.reference.state))},
                         {"defense", cr.reference.defense},
                         {"tau_fly", cr.reference.tau_fly},
                         {"voltage", channel(cr.voltage)},
                         {"current", channel(cr.current)},
                         {"per_repeat", reps},
                         {"channel_disagreements", cr.result.channel_disagreements},
                         {"ties", cr.result.ties},
                         {"runtime_s", cr.result.runtime_s}});
    }
    json j{{"version", std::string(kVersion)},
           {"master_seed", c.master_seed},
           {"config", to_config_text(c)},
           {"statistically_void", report.statistically_void},
           {"all_pass", report.all_pass()},
           {"cases", cases}};
    return j.dump(2);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transient attack and defense simulator for VMG-KLJN key exchange", "kljn_sim"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonArgs common;
    std::string cases = "ABCDEFGH";
    bool smoke = false;
    std::size_t dump_repeat = 0, dump_run = 0;

    auto add_common = [&](CLI::App* sub, bool with_workers) {
        sub->add_option("-c,--config", common.config_path, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--set", common.overrides, "override a config key (key=value), repeatable");
        sub->add_option("--output-dir", common.output_dir, "directory for CSV and report files");
        sub->add_option("--database-dir", common.database_dir, "directory of .knr noise records");
        if (with_workers) sub->add_option("--workers", common.workers, "parallel worker threads")->check(CLI::Range(1u, 1024u));
    };

    auto* solve = app.add_subcommand("solve", "solve the VMG noise temperatures");
    add_common(solve, false);
    auto* gen = app.add_subcommand("gen-noise", "synthesize and store the per-role noise database");
    add_common(gen, false);
    auto* repro = app.add_subcommand("reproduce", "run the eight reference attack cases");
    add_common(repro, true);
    repro->add_option("--cases", cases, "subset of cases, e.g. A,E");
    repro->add_flag("--smoke", smoke, "tiny run (10 runs x 2 repeats); verdicts are statistically void");
    auto* steady = app.add_subcommand("steady-state", "check steady-state wire statistics in HL and LH");
    add_common(steady, false);
    auto* single = app.add_subcommand("run", "run one custom scenario (state, defense, tau_multiples from config)");
    add_common(single, true);
    auto* dump = app.add_subcommand("dump-traces", "write the wire traces of one run to traces.csv");
    add_common(dump, false);
    dump->add_option("--repeat", dump_repeat, "repeat index");
    dump->add_option("--run", dump_run, "run index within the repeat");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalid;
    } catch (const CLI::CallForVersion& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalid;
    }

    try {
        if (*solve) return cmd_solve(common, out);
        if (*gen) return cmd_gen_noise(common, out);
        if (*repro) return cmd_reproduce(common, cases, smoke, out);
        if (*steady) return cmd_steady_state(common, out);
        if (*single) return cmd_run(common, out);
        if (*dump) return cmd_dump_traces(common, dump_repeat, dump_run, out);
    } catch (const NonPhysicalConfiguration& e) {
        err << "error: non-physical configuration: " << e.what() << '\n';
        return kExitNonPhysical;
    } catch (const PairingExhausted& e) {
        err << "error: defense pairing exhausted: " << e.what() << '\n';
        return kExitPairing;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}

}  // namespace kljn::cli
