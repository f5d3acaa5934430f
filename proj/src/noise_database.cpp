#include "kljn/noise_database.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>

#include "kljn/error.hpp"
#include "kljn/rng.hpp"

namespace kljn::noise {

namespace {

std::size_t slot(physics::Role role) { return static_cast<std::size_t>(role); }

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) throw IoError("truncated noise record");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) throw IoError("truncated noise record");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_record(std::ostream& out, const NoiseRecord& record) {
    out.write(kRecordMagic, sizeof kRecordMagic);
    put_u32(out, kRecordFormatVersion);
    put_u32(out, 0);
    const auto& spec = record.spec();
    put_f64(out, spec.sample_rate);
    put_f64(out, spec.bandwidth);
    put_f64(out, spec.target_rms);
    put_u64(out, spec.length);
    put_u64(out, record.seed());
    if constexpr (std::endian::native == std::endian::little) {
        const auto s = record.samples();
        out.write(reinterpret_cast<const char*>(s.data()),
                  static_cast<std::streamsize>(s.size() * sizeof(double)));
    } else {
        for (double v : record.samples()) put_f64(out, v);
    }
    if (!out) throw IoError("failed writing noise record");
}

NoiseRecord read_record(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kRecordMagic, 8) != 0)
        throw IoError("not a noise record (bad magic)");
    const std::uint32_t version = get_u32(in);
    if (version != kRecordFormatVersion)
        throw IoError("unsupported noise record version " + std::to_string(version));
    (void)get_u32(in);

    NoiseSpec spec;
    spec.sample_rate = get_f64(in);
    spec.bandwidth = get_f64(in);
    spec.target_rms = get_f64(in);
    spec.length = get_u64(in);
    const std::uint64_t seed = get_u64(in);
    if (spec.length == 0 || spec.length > (std::uint64_t{1} << 34))
        throw IoError("implausible noise record length");

    std::vector<double> samples(spec.length);
    if constexpr (std::endian::native == std::endian::little) {
        if (!in.read(reinterpret_cast<char*>(samples.data()),
                     static_cast<std::streamsize>(samples.size() * sizeof(double))))
            throw IoError("truncated noise record samples");
    } else {
        for (double& v : samples) v = get_f64(in);
    }
    try {
        return NoiseRecord(spec, seed, std::move(samples));
    } catch (const InvalidParameter& e) {
        throw IoError(std::string("corrupt noise record: ") + e.what());
    }
}

std::string record_filename(physics::Role role, std::uint64_t seed) {
    return "noise_" + std::string(physics::to_string(role)) + "_" + std::to_string(seed) + ".knr";
}

void save_record(const std::filesystem::path& path, const NoiseRecord& record) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_record(out, record);
}

NoiseRecord load_record(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_record(in);
}

NoiseDatabase NoiseDatabase::build(const physics::NoiseTemperatures& temps,
                                   const DatabaseOptions& options) {
    detail::require(options.records_per_role >= 1, "records_per_role must be at least 1");
    NoiseDatabase db;
    for (physics::Role role : physics::kAllRoles) {
        NoiseSpec spec = options.shape;
        spec.target_rms = temps.rms(role);
        for (std::size_t i = 0; i < options.records_per_role; ++i) {
            const auto seed = derive_seed(options.seed, {tag(Stream::Database), slot(role), i});
            db.add(role, synthesize(spec, seed));
        }
    }
    db.finalize(options.fit_window, options.start_threshold);
    return db;
}

NoiseDatabase NoiseDatabase::load(const std::filesystem::path& dir, std::size_t fit_window,
                                  double start_threshold) {
    if (!std::filesystem::is_directory(dir)) throw IoError("no such database directory: " + dir.string());
    static const std::regex pattern(R"(noise_(ha|la|hb|lb)_(\d+)\.knr)");
    NoiseDatabase db;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (!std::regex_match(name, m, pattern)) continue;
        db.add(physics::role_from_string(m[1].str()), load_record(entry.path()));
    }
    for (physics::Role role : physics::kAllRoles)
        if (db.records(role).empty())
            throw IoError("database " + dir.string() + " has no records for role " +
                          std::string(physics::to_string(role)));
    db.finalize(fit_window, start_threshold);
    return db;
}

std::vector<std::filesystem::path> NoiseDatabase::save(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    for (physics::Role role : physics::kAllRoles) {
        for (const auto& rec : records(role)) {
            auto path = dir / record_filename(role, rec.seed());
            save_record(path, rec);
            written.push_back(std::move(path));
        }
    }
    return written;
}

const std::vector<NoiseRecord>& NoiseDatabase::records(physics::Role role) const {
    return records_[slot(role)];
}

const std::vector<StartCandidate>& NoiseDatabase::candidates(physics::Role role) const {
    return candidates_[slot(role)];
}

const NoiseRecord& NoiseDatabase::record(physics::Role role, std::size_t index) const {
    return records_[slot(role)].at(index);
}

void NoiseDatabase::add(physics::Role role, NoiseRecord record) {
    records_[slot(role)].push_back(std::move(record));
}

void NoiseDatabase::finalize(std::size_t fit_window, double start_threshold) {
    for (std::size_t r = 0; r < records_.size(); ++r) {
        auto& recs = records_[r];
        std::sort(recs.begin(), recs.end(),
                  [](const NoiseRecord& a, const NoiseRecord& b) { return a.seed() < b.seed(); });
        auto& cands = candidates_[r];
        cands.clear();
        for (std::size_t i = 0; i < recs.size(); ++i) {
            auto found = scan_start_candidates(recs[i], fit_window, start_threshold, i);
            cands.insert(cands.end(), found.begin(), found.end());
        }
    }
}

}  // namespace kljn::noise
