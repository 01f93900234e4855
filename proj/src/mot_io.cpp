#include "pedtrack/mot_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "pedtrack/error.hpp"

namespace pedtrack {

namespace {

constexpr std::string_view kMagic = "RTEMB1";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Integers written as reals ("1.000") are accepted when integral.
bool parse_int(std::string_view s, int& out) {
    double v = 0.0;
    if (!parse_double(s, v) || v != std::floor(v) || std::abs(v) > 2e9) return false;
    out = static_cast<int>(v);
    return true;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw DataError("cannot read " + path.string());
    return in;
}

void append_number(std::string& out, double v, int precision) {
    std::array<char, 64> buf{};
    if (v == 0.0) v = 0.0;  // drops the sign of -0
    const auto res = precision < 0 ? std::to_chars(buf.data(), buf.data() + buf.size(), v)
                                   : std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed,
                                                   precision);
    std::string_view text(buf.data(), static_cast<std::size_t>(res.ptr - buf.data()));
    if (text == "-0" || text == "-0.0" || text == "-0.00" || text == "-0.000") text.remove_prefix(1);
    out.append(text);
}

void write_track_line(std::string& line, int frame, int id, const Box& b, double conf) {
    line.clear();
    line += std::to_string(frame);
    line += ',';
    line += std::to_string(id);
    for (const double v : {b.left, b.top, b.width, b.height, conf}) {
        line += ',';
        append_number(line, v, 3);
    }
    line += ",-1,-1,-1\n";
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

}  // namespace

DetectionSet parse_detections(std::istream& in, ParseMode mode) {
    DetectionSet set;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;

        const auto fields = split_fields(text);
        DetectionRecord rec;
        int ignored_id = 0;
        bool ok = fields.size() >= 7 && parse_int(fields[0], rec.frame) && parse_int(fields[1], ignored_id) &&
                  parse_double(fields[2], rec.box.left) && parse_double(fields[3], rec.box.top) &&
                  parse_double(fields[4], rec.box.width) && parse_double(fields[5], rec.box.height) &&
                  parse_double(fields[6], rec.conf) && rec.frame >= 1;
        if (!ok) {
            if (mode == ParseMode::kStrict) throw DataError("malformed detection at line " + std::to_string(line_no));
            ++set.warnings;
            continue;
        }
        if (!(rec.box.width > 0.0 && rec.box.height > 0.0)) {
            ++set.warnings;
            continue;
        }
        set.frames[rec.frame].push_back(rec);
    }
    if (in.bad()) throw DataError("unreadable detection stream");
    return set;
}

DetectionSet read_detections(const std::filesystem::path& path, ParseMode mode) {
    auto in = open_input(path);
    return parse_detections(in, mode);
}

void write_detections(std::ostream& out, const DetectionSet& detections) {
    std::string line;
    for (const auto& [frame, recs] : detections.frames) {
        for (const auto& r : recs) {
            line.clear();
            line += std::to_string(frame);
            line += ",-1";
            for (const double v : {r.box.left, r.box.top, r.box.width, r.box.height, r.conf}) {
                line += ',';
                append_number(line, v, -1);
            }
            line += ",-1,-1,-1\n";
            out << line;
        }
    }
}

std::vector<ResultRecord> parse_tracks(std::istream& in, bool skip_flag_zero) {
    std::vector<ResultRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto fields = split_fields(text);
        ResultRecord rec;
        rec.conf = 1.0;
        const bool ok = fields.size() >= 6 && parse_int(fields[0], rec.frame) && parse_int(fields[1], rec.id) &&
                        parse_double(fields[2], rec.box.left) && parse_double(fields[3], rec.box.top) &&
                        parse_double(fields[4], rec.box.width) && parse_double(fields[5], rec.box.height) &&
                        (fields.size() < 7 || parse_double(fields[6], rec.conf));
        if (!ok) throw DataError("malformed track row at line " + std::to_string(line_no));
        if (skip_flag_zero && rec.conf == 0.0) continue;
        records.push_back(rec);
    }
    if (in.bad()) throw DataError("unreadable track stream");
    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return a.frame != b.frame ? a.frame < b.frame : a.id < b.id; });
    return records;
}

std::vector<ResultRecord> read_tracks(const std::filesystem::path& path, bool skip_flag_zero) {
    auto in = open_input(path);
    return parse_tracks(in, skip_flag_zero);
}

std::vector<ResultRecord> flatten(std::span<const FrameResult> results) {
    std::vector<ResultRecord> records;
    for (const auto& fr : results) {
        for (const auto& t : fr.tracks) records.push_back({fr.frame, t.id, t.box, t.conf});
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return a.frame != b.frame ? a.frame < b.frame : a.id < b.id; });
    return records;
}

void write_tracks(std::ostream& out, std::span<const ResultRecord> records) {
    std::string line;
    for (const auto& r : records) {
        write_track_line(line, r.frame, r.id, r.box, r.conf);
        out << line;
    }
}

void write_results(std::ostream& out, std::span<const FrameResult> results) {
    const auto records = flatten(results);
    write_tracks(out, records);
}

EmbeddingSidecar parse_sidecar(std::istream& in) {
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (bytes.size() < kMagic.size() || std::string_view(bytes).substr(0, kMagic.size()) != kMagic) {
        throw DataError("not an embedding sidecar");
    }
    if (bytes.size() < kMagic.size() + 4) throw DataError("corrupt sidecar");
    const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());

    EmbeddingSidecar sidecar;
    sidecar.dim = read_u32(data + kMagic.size());
    if (sidecar.dim == 0) throw DataError("corrupt sidecar");
    const std::size_t record_size = 8 + 4 * static_cast<std::size_t>(sidecar.dim);
    const std::size_t payload = bytes.size() - kMagic.size() - 4;
    if (payload % record_size != 0) throw DataError("corrupt sidecar");

    const unsigned char* p = data + kMagic.size() + 4;
    for (std::size_t n = payload / record_size; n > 0; --n) {
        EmbeddingRecord rec;
        rec.frame = read_u32(p);
        rec.index = read_u32(p + 4);
        p += 8;
        rec.values.resize(sidecar.dim);
        for (auto& v : rec.values) {
            v = std::bit_cast<float>(read_u32(p));
            p += 4;
        }
        sidecar.records.push_back(std::move(rec));
    }
    return sidecar;
}

EmbeddingSidecar parse_sidecar_csv(std::istream& in) {
    EmbeddingSidecar sidecar;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto fields = split_fields(text);
        EmbeddingRecord rec;
        int frame = 0;
        int index = 0;
        bool ok = fields.size() >= 3 && parse_int(fields[0], frame) && parse_int(fields[1], index) && frame >= 0 &&
                  index >= 0;
        for (std::size_t i = 2; ok && i < fields.size(); ++i) {
            double v = 0.0;
            ok = parse_double(fields[i], v);
            rec.values.push_back(static_cast<float>(v));
        }
        const auto dim = static_cast<std::uint32_t>(fields.size() - 2);
        if (!ok || (sidecar.dim != 0 && dim != sidecar.dim)) {
            throw DataError("corrupt sidecar at line " + std::to_string(line_no));
        }
        sidecar.dim = dim;
        rec.frame = static_cast<std::uint32_t>(frame);
        rec.index = static_cast<std::uint32_t>(index);
        sidecar.records.push_back(std::move(rec));
    }
    return sidecar;
}

EmbeddingSidecar read_sidecar(const std::filesystem::path& path) {
    if (path.extension() == ".csv") {
        auto in = open_input(path);
        return parse_sidecar_csv(in);
    }
    auto in = open_input(path, std::ios::in | std::ios::binary);
    return parse_sidecar(in);
}

void write_sidecar(std::ostream& out, const EmbeddingSidecar& sidecar) {
    if (sidecar.dim == 0) throw DataError("sidecar dimension must be positive");
    std::string bytes(kMagic);
    put_u32(bytes, sidecar.dim);
    for (const auto& rec : sidecar.records) {
        if (rec.values.size() != sidecar.dim) throw DataError("embedding dimension mismatch");
        put_u32(bytes, rec.frame);
        put_u32(bytes, rec.index);
        for (const float v : rec.values) put_u32(bytes, std::bit_cast<std::uint32_t>(v));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_sidecar(const std::filesystem::path& path, const EmbeddingSidecar& sidecar) {
    std::ofstream out(path, std::ios::out | std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    write_sidecar(out, sidecar);
    if (!out) throw DataError("cannot write " + path.string());
}

void validate_sidecar(const EmbeddingSidecar& sidecar, const DetectionSet& detections, std::uint32_t expected_dim) {
    if (expected_dim != 0 && sidecar.dim != expected_dim) {
        throw DataError("embedding dimension mismatch: sidecar has " + std::to_string(sidecar.dim) + ", expected " +
                        std::to_string(expected_dim));
    }
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& rec : sidecar.records) {
        const auto it = detections.frames.find(static_cast<int>(rec.frame));
        const std::size_t count = it == detections.frames.end() ? 0 : it->second.size();
        if (rec.index >= count) {
            throw DataError("embedding references detection " + std::to_string(rec.index) + " in frame " +
                            std::to_string(rec.frame) + ", which has " + std::to_string(count) + " detections");
        }
        if (!seen.emplace(rec.frame, rec.index).second) {
            throw DataError("duplicate embedding for detection " + std::to_string(rec.index) + " in frame " +
                            std::to_string(rec.frame));
        }
    }
}

std::map<int, std::vector<Detection>> tracker_input(const DetectionSet& detections, const EmbeddingSidecar* sidecar) {
    std::map<int, std::vector<Detection>> frames;
    for (const auto& [frame, recs] : detections.frames) {
        auto& out = frames[frame];
        for (const auto& r : recs) out.push_back({r.box, r.conf, std::nullopt});
    }
    if (sidecar == nullptr) return frames;
    validate_sidecar(*sidecar, detections);
    for (const auto& rec : sidecar->records) {
        Embedding e(static_cast<Eigen::Index>(sidecar->dim));
        for (std::uint32_t i = 0; i < sidecar->dim; ++i) e[i] = static_cast<double>(rec.values[i]);
        if (!(e.norm() > 0.0) || !e.allFinite()) {
            throw DataError("degenerate embedding for detection " + std::to_string(rec.index) + " in frame " +
                            std::to_string(rec.frame));
        }
        frames[static_cast<int>(rec.frame)][rec.index].embedding = std::move(e);
    }
    return frames;
}

}  // namespace pedtrack
