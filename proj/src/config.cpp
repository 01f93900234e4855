#include "pedtrack/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>

#include "pedtrack/error.hpp"

namespace pedtrack {

namespace {

using Field = std::variant<double*, int*, bool*, std::uint32_t*, FusionMode*>;

std::vector<std::pair<std::string, Field>> fields(RunConfig& cfg) {
    TrackerConfig& t = cfg.tracker;
    AssociationConfig& a = t.association;
    return {
        {"tracker.new_track_conf", &t.new_track_conf},
        {"tracker.max_lost_frames", &t.max_lost_frames},
        {"tracker.n_init", &t.n_init},
        {"tracker.min_detection_conf", &t.min_detection_conf},
        {"tracker.extent_momentum", &t.extent_momentum},
        {"tracker.interpolation", &t.interpolation},
        {"tracker.interpolation_max_gap", &t.interpolation_max_gap},
        {"smoothing.enabled", &t.smoothing.enabled},
        {"smoothing.k", &t.smoothing.k},
        {"smoothing.dt", &t.smoothing.dt},
        {"smoothing.heading_coast_limit", &t.smoothing.heading_coast_limit},
        {"noise.q_x", &t.noise.q_x},
        {"noise.q_y", &t.noise.q_y},
        {"noise.q_vx", &t.noise.q_vx},
        {"noise.q_vy", &t.noise.q_vy},
        {"noise.r_x", &t.noise.r_x},
        {"noise.r_y", &t.noise.r_y},
        {"association.lambda", &a.lambda},
        {"association.iou_gate", &a.iou_gate},
        {"association.appearance_threshold", &a.appearance_threshold},
        {"association.iou_accept_min_overlap", &a.iou_accept_min_overlap},
        {"association.cd_neutral", &a.cd_neutral},
        {"association.fusion_mode", &a.fusion_mode},
        {"association.lambda1", &a.lambda1},
        {"association.lambda2", &a.lambda2},
        {"association.use_appearance", &a.use_appearance},
        {"association.use_direction", &a.use_direction},
        {"association.depth_staging", &a.depth_staging},
        {"appearance.alpha", &t.appearance.alpha},
        {"appearance.use_fine", &t.appearance.use_fine},
        {"io.embedding_dim", &cfg.embedding_dim},
    };
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
}

double to_double(std::string_view key, std::string_view value) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) bad_value(key, value);
    return v;
}

long long to_integer(std::string_view key, std::string_view value) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
    return v;
}

template <typename T>
std::string format_value(T* p) {
    if constexpr (std::is_same_v<T, bool>) {
        return *p ? "true" : "false";
    } else if constexpr (std::is_same_v<T, FusionMode>) {
        return to_string(*p);
    } else if constexpr (std::is_same_v<T, double>) {
        std::array<char, 64> buf{};
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *p);
        return std::string(buf.data(), res.ptr);
    } else {
        return std::to_string(*p);
    }
}

}  // namespace

FusionMode parse_fusion_mode(std::string_view text) {
    if (text == "min") return FusionMode::kMin;
    if (text == "weighted") return FusionMode::kWeightedSum;
    throw ConfigError("unknown fusion mode '" + std::string(text) + "' (expected min or weighted)");
}

const char* to_string(FusionMode mode) { return mode == FusionMode::kMin ? "min" : "weighted"; }

void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    for (auto& [name, field] : fields(cfg)) {
        if (name != key) continue;
        std::visit(
            [&](auto* p) {
                using T = std::remove_pointer_t<decltype(p)>;
                if constexpr (std::is_same_v<T, double>) {
                    *p = to_double(key, value);
                } else if constexpr (std::is_same_v<T, int>) {
                    const long long v = to_integer(key, value);
                    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad_value(key, value);
                    *p = static_cast<int>(v);
                } else if constexpr (std::is_same_v<T, std::uint32_t>) {
                    const long long v = to_integer(key, value);
                    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) bad_value(key, value);
                    *p = static_cast<std::uint32_t>(v);
                } else if constexpr (std::is_same_v<T, bool>) {
                    if (value == "true" || value == "1") {
                        *p = true;
                    } else if (value == "false" || value == "0") {
                        *p = false;
                    } else {
                        bad_value(key, value);
                    }
                } else {
                    *p = parse_fusion_mode(value);
                }
            },
            field);
        return;
    }
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected 'key = value' at line " + std::to_string(line_no));
        }
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key at line " + std::to_string(line_no));
        apply_config_value(cfg, key, value);
    }
    cfg.tracker.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    return parse_config(in);
}

std::vector<std::string> config_keys() {
    RunConfig scratch;
    std::vector<std::string> keys;
    for (const auto& entry : fields(scratch)) keys.push_back(entry.first);
    return keys;
}

std::string dump_config(const RunConfig& cfg) {
    RunConfig copy = cfg;
    std::ostringstream out;
    for (const auto& [name, field] : fields(copy)) {
        out << name << " = " << std::visit([](auto* p) { return format_value(p); }, field) << '\n';
    }
    return out.str();
}

}  // namespace pedtrack
