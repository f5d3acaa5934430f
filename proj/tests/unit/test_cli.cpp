#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "kljn/cli/commands.hpp"
#include "kljn/cli/config.hpp"
#include "kljn/error.hpp"

using namespace kljn;
using namespace kljn::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
};

// Runs the real executable; stderr is folded into the captured text.
Outcome sim(const std::string& args) {
    const std::string cmd = std::string(KLJN_SIM_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) text.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("kljn_cli_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config: defaults are the published setup") {
    const RunConfig c;
    CHECK(c.quad.r_ha == 11e3);
    CHECK(c.quad.r_la == 3e3);
    CHECK(c.quad.r_hb == 9e3);
    CHECK(c.quad.r_lb == 2e3);
    CHECK(c.u_la == 1.0);
    CHECK(c.bandwidth == 5e3);
    CHECK(c.z0 == 50.0);
    CHECK(c.effective_fly_time() == 1e-5);
    CHECK(c.runs == 1000);
    CHECK(c.repeats == 10);
    CHECK_NOTHROW(c.validate());
    CHECK(c.cable().n_delay == 100);
    CHECK(c.effective_fit_window() == 100);
}

TEST_CASE("config: parsing, comments, errors") {
    const auto c = parse_config(
        "# comment\n"
        "  r_ha = 12000   # trailing\n"
        "\n"
        "cable_length = 2000\n"
        "velocity = 2e8\n"
        "tau_multiples = 1, 2.5 ,4\n"
        "defense = true\n"
        "state = LH\n");
    CHECK(c.quad.r_ha == 12000);
    CHECK_FALSE(c.fly_time.has_value());
    CHECK(c.effective_fly_time() == doctest::Approx(1e-5));
    CHECK(c.tau_multiples == std::vector<double>{1.0, 2.5, 4.0});
    CHECK(c.defense);
    CHECK(c.state == physics::LoopState::LH);
    CHECK_NOTHROW(c.validate());
    CHECK(c.cable().n_delay == 100);

    CHECK_THROWS_AS(parse_config("nonsense = 1\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("r_ha 1\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("r_ha = abc\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("runs = -3\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("defense = maybe\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("fly_time = 1e-5\ncable_length = 10\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("cable_length = 10\n").validate(), InvalidParameter);
    CHECK_THROWS_AS(parse_config("z0 = -50\n").validate(), InvalidParameter);
    CHECK_THROWS_AS(parse_config("bandwidth = 6e6\n").validate(), InvalidParameter);
    CHECK_THROWS_AS(parse_config("record_length = 1000\n").validate(), InvalidParameter);
}

TEST_CASE("config: echo re-parses to an equal config") {
    CHECK(parse_config(to_config_text(RunConfig{})) == RunConfig{});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 10);
    for (int k = 0; k < 500; ++k) {
        RunConfig c;
        c.quad = {u(rng) * 1e4, u(rng) * 1e2, u(rng) * 1e4, u(rng) * 1e2};
        c.u_la = u(rng) / 3.0;
        c.bandwidth = u(rng) * 1e3 / 7.0;
        c.z0 = u(rng) * 17.0;
        if (k % 2) {
            c.fly_time.reset();
            c.cable_length = u(rng) * 1000.0 / 3.0;
            c.velocity = u(rng) * 1e8;
        } else {
            c.fly_time = u(rng) * 1e-6;
        }
        c.samples_per_fly = 1 + rng() % 300;
        c.runs = 1 + rng() % 5000;
        c.repeats = 1 + rng() % 20;
        c.master_seed = rng();
        c.tau_multiples = {u(rng), u(rng) / 9.0};
        c.defense = k % 3 == 0;
        c.state = k % 5 == 0 ? physics::LoopState::LH : physics::LoopState::HL;
        c.slope_tolerance = u(rng) / 100.0;
        c.start_threshold = u(rng) / 1e4;
        c.fit_window = rng() % 50;
        c.attempt_budget = 1 + rng() % 9999;
        c.record_length = std::size_t{1} << (16 + rng() % 8);
        c.records_per_role = 1 + rng() % 8;
        c.steady_duration = u(rng);
        c.database_dir = "db_" + std::to_string(k);
        c.output_dir = "out/" + std::to_string(k);
        REQUIRE(parse_config(to_config_text(c)) == c);
    }
}

TEST_CASE("cli: solve") {
    const auto r = sim("solve");
    CHECK(r.code == 0);
    CHECK(r.out.find("1.4266e+15") != std::string::npos);
    CHECK(r.out.find("1.7164e+15") != std::string::npos);
    CHECK(r.out.find("1.2072e+15") != std::string::npos);
    CHECK(r.out.find("1.4084e+15") != std::string::npos);

    // Symmetric quad: one common temperature (the ideal scheme).
    const auto sym = sim("solve --set r_ha=10e3 --set r_la=1e3 --set r_hb=10e3 --set r_lb=1e3");
    CHECK(sym.code == 0);
    CHECK(sym.out.find("3.6215e+15") != std::string::npos);

    const auto bad = sim("solve --set r_ha=2e3");
    CHECK(bad.code == 2);
    CHECK(bad.out.find("non-physical") != std::string::npos);
}

TEST_CASE("cli: exit codes for bad input") {
    CHECK(sim("").code == 1);
    CHECK(sim("frobnicate").code == 1);
    CHECK(sim("solve --bogus").code == 1);
    CHECK(sim("solve --set nokey=3").code == 1);
    CHECK(sim("solve --set r_ha").code == 1);
    CHECK(sim("solve --config /definitely/not/here.cfg").code == 1);
    CHECK(sim("reproduce --smoke --cases Z").code == 1);
    CHECK(sim("--help").code == 0);
    CHECK(sim("reproduce --help").code == 0);
    CHECK(sim("--version").code == 0);

    TempDir d("cfg");
    write_file(d.path / "bad.cfg", "fly_time = 1e-5\nvelocity = 2e8\n");
    CHECK(sim("solve --config " + (d.path / "bad.cfg").string()).code == 1);
    write_file(d.path / "good.cfg", "r_hb = 9000 # same as default\nu_la = 2\n");
    const auto ok = sim("solve --config " + (d.path / "good.cfg").string());
    CHECK(ok.code == 0);
    CHECK(ok.out.find("U_LA = 2 V") != std::string::npos);
}

TEST_CASE("cli: gen-noise") {
    TempDir d("gen");
    const auto db = d.path / "db";
    const auto r = sim("gen-noise --database-dir " + db.string());
    REQUIRE(r.code == 0);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(db)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    REQUIRE(files.size() == 4);
    for (const auto& f : files) {
        const auto bytes = slurp(f);
        CHECK(bytes.compare(0, 8, "KLJNNOIS") == 0);
        CHECK(f.filename().string().rfind("noise_", 0) == 0);
    }
    // Reported RMS deviation from the role target.
    std::istringstream lines(r.out);
    std::string line;
    int reported = 0;
    while (std::getline(lines, line)) {
        const auto pos = line.find("%)");
        if (pos == std::string::npos) continue;
        const auto open = line.rfind(", ", pos);
        const double pct = std::stod(line.substr(open + 2, pos - open - 2));
        CHECK(std::abs(pct) < 5.0);
        ++reported;
    }
    CHECK(reported == 4);

    const auto db2 = d.path / "db2";
    REQUIRE(sim("gen-noise --database-dir " + db2.string()).code == 0);
    for (const auto& f : files) CHECK(slurp(f) == slurp(db2 / f.filename()));

    const auto loaded = sim("reproduce --smoke --cases C --database-dir " + db.string() + " --output-dir " +
                            (d.path / "out").string());
    CHECK(loaded.code == 0);
    CHECK(loaded.out.find("loaded noise database") != std::string::npos);

    // Records made for another configuration are refused.
    const auto mismatch = sim("reproduce --smoke --cases C --set u_la=2 --database-dir " + db.string() +
                              " --output-dir " + (d.path / "out").string());
    CHECK(mismatch.code == 1);

    CHECK(sim("gen-noise --database-dir /proc/forbidden/db").code == 1);
}

TEST_CASE("cli: reproduce smoke, filters and reports") {
    TempDir d("repro");
    const auto out = d.path / "all";
    const auto r = sim("reproduce --smoke --output-dir " + out.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("statistically void") != std::string::npos);
    const auto summary = slurp(out / "summary.csv");
    CHECK(summary.rfind("case,channel,p_e_mean,p_e_std,paper_value,paper_std,pass\n", 0) == 0);
    CHECK(count_lines(summary) == 1 + 16);
    CHECK(count_lines(slurp(out / "results.csv")) == 1 + 8 * 2 * 2);

    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["statistically_void"] == true);
    CHECK(report["cases"].size() == 8);
    CHECK(report["version"] == std::string(kVersion));
    const auto echoed = parse_config(report["config"].get<std::string>());
    RunConfig expect;
    expect.runs = 10;
    expect.repeats = 2;
    expect.record_length = std::size_t{1} << 20;
    expect.records_per_role = 1;
    expect.output_dir = out.string();
    CHECK(echoed == expect);
    CHECK(parse_config(slurp(out / "config.txt")) == expect);
    CHECK(report["master_seed"] == expect.master_seed);

    const auto two = d.path / "two";
    REQUIRE(sim("reproduce --smoke --cases A,E --workers 2 --output-dir " + two.string()).code == 0);
    const auto s2 = slurp(two / "summary.csv");
    CHECK(count_lines(s2) == 1 + 4);
    CHECK(s2.find("\nA,voltage,") != std::string::npos);
    CHECK(s2.find("\nE,current,") != std::string::npos);
    // Worker count does not change results.
    const auto one = d.path / "one";
    REQUIRE(sim("reproduce --smoke --cases A,E --workers 1 --output-dir " + one.string()).code == 0);
    CHECK(slurp(one / "results.csv") == slurp(two / "results.csv"));

    const auto ex = sim("reproduce --smoke --cases E --set slope_tolerance=1e-9 --set attempt_budget=1 --output-dir " +
                        (d.path / "ex").string());
    CHECK(ex.code == 3);
    CHECK(ex.out.find("case E") != std::string::npos);
}

TEST_CASE("cli: steady-state, run, dump-traces") {
    TempDir d("misc");
    const auto ss = sim("steady-state --set z0=5000 --set fly_time=1e-6 --set samples_per_fly=1 --set steady_duration=1");
    CHECK(ss.code == 0);
    CHECK(ss.out.find("u_ms") != std::string::npos);
    CHECK(sim("steady-state --set steady_duration=1e-4").code == 1);

    const auto run = sim("run --set runs=50 --set repeats=2 --set defense=true --set state=LH --set record_length=1048576 "
                         "--output-dir " + d.str());
    CHECK(run.code == 0);
    const auto res = slurp(d.path / "results.csv");
    CHECK(res.rfind("case,state,defense,tau_fly,channel,repeat,p_e\n", 0) == 0);
    CHECK(count_lines(res) == 1 + 2 * 2 * 2);
    CHECK(res.find("custom,LH,1,4,") != std::string::npos);

    const auto dump = sim("dump-traces --set record_length=1048576 --run 3 --output-dir " + d.str());
    CHECK(dump.code == 0);
    const auto traces = slurp(d.path / "traces.csv");
    CHECK(traces.rfind("t_s,u_a_v,i_a_a,u_b_v,i_b_a\n", 0) == 0);
    CHECK(count_lines(traces) == 101);
}
