#include "kljn/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kljn/error.hpp"

namespace kljn::cli {

using detail::require;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string key_context(std::string_view key) { return "config key '" + std::string(key) + "'"; }

double to_double(std::string_view key, std::string_view v) {
    // strtod accepts every form %.17g produces, including exponents.
    const std::string s(v);
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d))
        throw InvalidParameter(key_context(key) + ": not a finite number: '" + s + "'");
    return d;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
        throw InvalidParameter(key_context(key) + ": not a non-negative integer: '" + std::string(v) + "'");
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidParameter(key_context(key) + ": not a boolean: '" + std::string(v) + "'");
}

std::vector<double> to_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        out.push_back(to_double(key, trim(v.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    if (out.empty()) throw InvalidParameter(key_context(key) + ": empty list");
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    // H/L ordering is left to solve_vmg so that a swapped side is reported
    // as non-physical rather than as a plain config error.
    require(quad.r_ha > 0 && quad.r_la > 0 && quad.r_hb > 0 && quad.r_lb > 0, "resistances must be positive");
    require(u_la > 0, "u_la must be positive");
    require(bandwidth > 0, "bandwidth must be positive");
    require(z0 > 0, "z0 must be positive");
    const bool by_length = cable_length.has_value() || velocity.has_value();
    require(fly_time.has_value() != by_length,
            "set exactly one of fly_time or (cable_length, velocity)");
    if (by_length) {
        require(cable_length.has_value() && velocity.has_value(),
                "cable_length and velocity must be given together");
        require(*cable_length > 0 && *velocity > 0, "cable_length and velocity must be positive");
    } else {
        require(*fly_time > 0, "fly_time must be positive");
    }
    require(samples_per_fly >= 1, "samples_per_fly must be at least 1");
    require(runs >= 1 && repeats >= 1, "runs and repeats must be at least 1");
    require(!tau_multiples.empty(), "tau_multiples must not be empty");
    for (double t : tau_multiples) require(t > 0, "tau_multiples must be positive");
    require(slope_tolerance > 0 && slope_tolerance < 1, "slope_tolerance must lie in (0, 1)");
    require(start_threshold > 0, "start_threshold must be positive");
    require(attempt_budget >= 1, "attempt_budget must be at least 1");
    require(records_per_role >= 1, "records_per_role must be at least 1");
    require(steady_duration > 0, "steady_duration must be positive");
    require(bandwidth < 0.5 * static_cast<double>(samples_per_fly) / effective_fly_time(),
            "bandwidth must be below half the sample rate");
    noise_shape().validate();
    require(effective_fit_window() >= 2, "fit_window must be at least 2");
}

double RunConfig::effective_fly_time() const {
    if (fly_time) return *fly_time;
    return cable_length.value_or(0) / velocity.value_or(1);
}

std::size_t RunConfig::effective_fit_window() const {
    return fit_window == 0 ? std::max<std::size_t>(samples_per_fly, 2) : fit_window;
}

wire::CableParams RunConfig::cable() const {
    return wire::CableParams::from_fly_time(z0, effective_fly_time(), samples_per_fly);
}

noise::NoiseSpec RunConfig::noise_shape() const {
    return {static_cast<double>(samples_per_fly) / effective_fly_time(), bandwidth, 1.0, record_length};
}

noise::DatabaseOptions RunConfig::database_options() const {
    return {noise_shape(), records_per_role, derive_seed(master_seed, {tag(Stream::Database)}),
            effective_fit_window(), start_threshold};
}

noise::PairingOptions RunConfig::pairing_options() const { return {slope_tolerance, attempt_budget}; }

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
    const std::string_view v = trim(raw);
    if (key == "r_ha") c.quad.r_ha = to_double(key, v);
    else if (key == "r_la") c.quad.r_la = to_double(key, v);
    else if (key == "r_hb") c.quad.r_hb = to_double(key, v);
    else if (key == "r_lb") c.quad.r_lb = to_double(key, v);
    else if (key == "u_la") c.u_la = to_double(key, v);
    else if (key == "bandwidth") c.bandwidth = to_double(key, v);
    else if (key == "z0") c.z0 = to_double(key, v);
    else if (key == "fly_time") {
        c.fly_time = to_double(key, v);
        c.cable_length.reset();
        c.velocity.reset();
    } else if (key == "cable_length" || key == "velocity") {
        (key == "cable_length" ? c.cable_length : c.velocity) = to_double(key, v);
        c.fly_time.reset();
    } else if (key == "samples_per_fly") c.samples_per_fly = to_u64(key, v);
    else if (key == "runs") c.runs = to_u64(key, v);
    else if (key == "repeats") c.repeats = to_u64(key, v);
    else if (key == "master_seed") c.master_seed = to_u64(key, v);
    else if (key == "tau_multiples") c.tau_multiples = to_list(key, v);
    else if (key == "defense") c.defense = to_bool(key, v);
    else if (key == "state") c.state = physics::loop_state_from_string(v);
    else if (key == "slope_tolerance") c.slope_tolerance = to_double(key, v);
    else if (key == "start_threshold") c.start_threshold = to_double(key, v);
    else if (key == "fit_window") c.fit_window = to_u64(key, v);
    else if (key == "attempt_budget") c.attempt_budget = to_u64(key, v);
    else if (key == "record_length") c.record_length = to_u64(key, v);
    else if (key == "records_per_role") c.records_per_role = to_u64(key, v);
    else if (key == "steady_duration") c.steady_duration = to_double(key, v);
    else if (key == "database_dir") c.database_dir = std::string(v);
    else if (key == "output_dir") c.output_dir = std::string(v);
    else throw InvalidParameter("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    std::size_t line_no = 0;
    bool saw_fly_time = false, saw_length = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw InvalidParameter("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        saw_fly_time |= key == "fly_time";
        saw_length |= key == "cable_length" || key == "velocity";
        if (saw_fly_time && saw_length)
            throw InvalidParameter("config line " + std::to_string(line_no) +
                                   ": give either fly_time or cable_length and velocity, not both");
        apply_setting(base, key, line.substr(eq + 1));
    }
    return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream out;
    out << "r_ha = " << fmt17(c.quad.r_ha) << '\n'
        << "r_la = " << fmt17(c.quad.r_la) << '\n'
        << "r_hb = " << fmt17(c.quad.r_hb) << '\n'
        << "r_lb = " << fmt17(c.quad.r_lb) << '\n'
        << "u_la = " << fmt17(c.u_la) << '\n'
        << "bandwidth = " << fmt17(c.bandwidth) << '\n'
        << "z0 = " << fmt17(c.z0) << '\n';
    if (c.fly_time) out << "fly_time = " << fmt17(*c.fly_time) << '\n';
    if (c.cable_length) out << "cable_length = " << fmt17(*c.cable_length) << '\n';
    if (c.velocity) out << "velocity = " << fmt17(*c.velocity) << '\n';
    out << "samples_per_fly = " << c.samples_per_fly << '\n'
        << "runs = " << c.runs << '\n'
        << "repeats = " << c.repeats << '\n'
        << "master_seed = " << c.master_seed << '\n'
        << "tau_multiples = ";
    for (std::size_t i = 0; i < c.tau_multiples.size(); ++i)
        out << (i ? "," : "") << fmt17(c.tau_multiples[i]);
    out << '\n'
        << "defense = " << (c.defense ? "true" : "false") << '\n'
        << "state = " << physics::to_string(c.state) << '\n'
        << "slope_tolerance = " << fmt17(c.slope_tolerance) << '\n'
        << "start_threshold = " << fmt17(c.start_threshold) << '\n'
        << "fit_window = " << c.fit_window << '\n'
        << "attempt_budget = " << c.attempt_budget << '\n'
        << "record_length = " << c.record_length << '\n'
        << "records_per_role = " << c.records_per_role << '\n'
        << "steady_duration = " << fmt17(c.steady_duration) << '\n'
        << "database_dir = " << c.database_dir << '\n'
        << "output_dir = " << c.output_dir << '\n';
    return out.str();
}

}  // namespace kljn::cli
