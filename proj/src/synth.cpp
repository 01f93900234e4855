#include "pedtrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "pedtrack/error.hpp"

namespace pedtrack {

namespace {

constexpr double kMinDetectableConf = 0.1;
constexpr int kAnchorAttempts = 100;
constexpr int kIntraProbeDraws = 8;

Embedding random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Embedding v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal(rng);
    return v.normalized();
}

// Unit vector orthogonal to `ref` (a Gram-Schmidt step on a random draw).
Embedding random_orthogonal(std::mt19937_64& rng, const Embedding& ref) {
    while (true) {
        Embedding v = random_unit(rng, static_cast<int>(ref.size()));
        v -= v.dot(ref) * ref;
        if (v.norm() > 1e-6) return v.normalized();
    }
}

Embedding perturbed(std::mt19937_64& rng, const Embedding& base, double noise_norm) {
    std::normal_distribution<double> normal(0.0, noise_norm / std::sqrt(static_cast<double>(base.size())));
    Embedding v = base;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += normal(rng);
    return v.normalized();
}

struct Anchors {
    std::vector<Embedding> main;
    std::vector<Embedding> occluded;
};

double cosine_distance(const Embedding& a, const Embedding& b) { return 1.0 - a.dot(b); }

Anchors draw_anchors(std::mt19937_64& rng, const ScenarioSpec& spec) {
    const std::size_t n = spec.agents.size();
    std::vector<char> shifted(n, 0);
    for (const auto& w : spec.windows) {
        if (w.appearance_shift > 0.0) shifted[static_cast<std::size_t>(w.agent)] = 1;
    }

    for (int attempt = 0; attempt < kAnchorAttempts; ++attempt) {
        Anchors anchors;
        for (std::size_t i = 0; i < n; ++i) {
            anchors.main.push_back(random_unit(rng, spec.embedding_dim));
            anchors.occluded.push_back(random_orthogonal(rng, anchors.main.back()));
        }

        double intra = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < kIntraProbeDraws; ++k) {
                intra = std::max(intra, cosine_distance(anchors.main[i],
                                                        perturbed(rng, anchors.main[i], spec.embedding_noise)));
            }
        }
        double inter = 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                inter = std::min(inter, cosine_distance(anchors.main[i], anchors.main[j]));
                if (shifted[i]) inter = std::min(inter, cosine_distance(anchors.occluded[i], anchors.main[j]));
                if (shifted[i] && shifted[j]) {
                    inter = std::min(inter, cosine_distance(anchors.occluded[i], anchors.occluded[j]));
                }
            }
        }
        if (inter - intra >= kAnchorSeparationMargin) return anchors;
    }
    throw Error("cannot draw separated anchor embeddings; increase the embedding dimension");
}

const OcclusionWindow* window_at(const ScenarioSpec& spec, int agent, int frame) {
    for (const auto& w : spec.windows) {
        if (w.agent == agent && frame >= w.first_frame && frame <= w.last_frame) return &w;
    }
    return nullptr;
}

AgentPath two_point_path(int f0, Vec2 p0, int f1, Vec2 p1) {
    AgentPath path;
    path.waypoints = {{f0, p0}, {f1, p1}};
    return path;
}

// Both agents advance 3 px/frame in x. Agent 0 walks down and agent 1 up
// until their paths meet at frame 50; then each turns back to its own side.
std::vector<AgentPath> crossing_paths() {
    auto at = [](int frame, double y) { return std::pair<int, Vec2>{frame, {200.0 + 3.0 * (frame - 1), y}}; };
    AgentPath down;
    down.waypoints = {at(1, 326.5), at(50, 400.0), at(100, 325.0)};
    AgentPath up;
    up.waypoints = {at(1, 473.5), at(50, 400.0), at(100, 475.0)};
    return {down, up};
}

}  // namespace

void ScenarioSpec::validate() const {
    if (agents.empty()) throw Error("scenario needs at least one agent");
    if (frames < 1) throw Error("scenario needs at least one frame");
    if (!(noise_sigma >= 0.0)) throw Error("noise_sigma must be non-negative");
    if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw Error("drop_prob must lie in [0, 1]");
    if (embedding_dim < 8) throw Error("embedding_dim must be at least 8");
    if (!(embedding_noise >= 0.0)) throw Error("embedding_noise must be non-negative");
    if (!(base_conf > 0.0 && base_conf <= 1.0)) throw Error("base_conf must lie in (0, 1]");
    for (const auto& a : agents) {
        if (a.waypoints.empty()) throw Error("agent path needs a waypoint");
        for (std::size_t i = 1; i < a.waypoints.size(); ++i) {
            if (a.waypoints[i].first <= a.waypoints[i - 1].first) throw Error("waypoint frames must increase");
        }
        if (!(a.width > 0.0 && a.height > 0.0)) throw Error("agent box must have a positive extent");
    }
    for (const auto& w : windows) {
        if (w.agent < 0 || static_cast<std::size_t>(w.agent) >= agents.size()) throw Error("window agent out of range");
        if (w.first_frame < 1 || w.last_frame > frames || w.first_frame > w.last_frame) {
            throw Error("occlusion window outside the frame range");
        }
        if (!(w.occlusion >= 0.0 && w.occlusion <= 1.0)) throw Error("window occlusion must lie in [0, 1]");
        if (!(w.appearance_shift >= 0.0 && w.appearance_shift <= 1.0)) {
            throw Error("window appearance_shift must lie in [0, 1]");
        }
    }
}

bool present_at(const AgentPath& path, int frame) {
    return frame >= path.waypoints.front().first && frame <= path.waypoints.back().first;
}

Vec2 position_at(const AgentPath& path, int frame) {
    const auto& w = path.waypoints;
    if (frame <= w.front().first) return w.front().second;
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (frame <= w[i].first) {
            const double t = static_cast<double>(frame - w[i - 1].first) / (w[i].first - w[i - 1].first);
            return w[i - 1].second + t * (w[i].second - w[i - 1].second);
        }
    }
    return w.back().second;
}

SyntheticSequence generate(const ScenarioSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const Anchors anchors = draw_anchors(rng, spec);
    std::normal_distribution<double> center_noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SyntheticSequence seq;
    seq.embeddings.dim = static_cast<std::uint32_t>(spec.embedding_dim);

    struct Pending {
        DetectionRecord det;
        std::vector<float> embedding;
    };
    for (int frame = 1; frame <= spec.frames; ++frame) {
        std::vector<Pending> pending;
        for (std::size_t a = 0; a < spec.agents.size(); ++a) {
            const AgentPath& path = spec.agents[a];
            if (!present_at(path, frame)) continue;
            const Vec2 c = position_at(path, frame);
            const Box gt_box = Box::from_center(c, path.width, path.height);
            const int id = static_cast<int>(a) + 1;
            seq.gt.push_back({frame, id, gt_box, 1.0});
            seq.trajectories.push_back({frame, id, c});

            // Draws happen for every present agent so that windows do not shift the stream.
            const double nx = center_noise(rng);
            const double ny = center_noise(rng);
            const Vec2 noisy = c + spec.noise_sigma * Vec2(nx, ny);
            const bool dropped = unit(rng) < spec.drop_prob;
            const OcclusionWindow* w = window_at(spec, static_cast<int>(a), frame);
            const double conf = spec.base_conf * (1.0 - (w ? w->occlusion : 0.0));
            const double shift = w ? w->appearance_shift : 0.0;
            const Embedding base = shift > 0.0
                                       ? ((1.0 - shift) * anchors.main[a] + shift * anchors.occluded[a]).normalized()
                                       : anchors.main[a];
            const Embedding f = perturbed(rng, base, spec.embedding_noise);
            if (dropped || conf <= kMinDetectableConf) continue;

            Pending p;
            p.det = {frame, Box::from_center(noisy, path.width, path.height), conf};
            p.embedding.resize(static_cast<std::size_t>(spec.embedding_dim));
            for (int i = 0; i < spec.embedding_dim; ++i) p.embedding[static_cast<std::size_t>(i)] = static_cast<float>(f[i]);
            pending.push_back(std::move(p));
        }
        std::shuffle(pending.begin(), pending.end(), rng);
        if (pending.empty()) continue;
        auto& slot = seq.detections.frames[frame];
        for (auto& p : pending) {
            seq.embeddings.records.push_back(
                {static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(slot.size()), std::move(p.embedding)});
            slot.push_back(p.det);
        }
    }
    return seq;
}

ScenarioSpec linear_scenario(std::uint64_t seed, double noise_sigma, int frames) {
    ScenarioSpec spec;
    spec.name = "linear";
    spec.frames = frames;
    spec.noise_sigma = noise_sigma;
    spec.seed = seed;
    spec.agents.push_back(two_point_path(1, {100.0, 300.0}, frames, {100.0 + 4.0 * (frames - 1), 300.0 + 0.5 * (frames - 1)}));
    return spec;
}

ScenarioSpec crossing_scenario(std::uint64_t seed) {
    ScenarioSpec spec;
    spec.name = "crossing";
    spec.frames = 100;
    spec.noise_sigma = 2.0;
    spec.seed = seed;
    spec.agents = crossing_paths();
    return spec;
}

ScenarioSpec occlusion_scenario(std::uint64_t seed, int gap) {
    if (gap < 1) throw Error("occlusion gap must be positive");
    ScenarioSpec spec;
    spec.name = "occlusion";
    spec.frames = 60 + gap + 30;
    spec.noise_sigma = 0.5;
    spec.seed = seed;
    const int last = spec.frames;
    spec.agents.push_back(two_point_path(1, {100.0, 200.0}, last, {100.0 + 3.0 * (last - 1), 200.0}));
    spec.agents.push_back(two_point_path(1, {100.0, 500.0}, last, {100.0 + 3.0 * (last - 1), 500.0 + 0.5 * (last - 1)}));
    spec.agents.push_back(two_point_path(1, {900.0, 800.0}, last, {900.0 - 2.0 * (last - 1), 800.0}));
    spec.windows.push_back({0, 60, 60 + gap - 1, 1.0, 0.0});
    return spec;
}

ScenarioSpec crossing_occlusion_scenario(std::uint64_t seed) {
    ScenarioSpec spec = crossing_scenario(seed);
    spec.name = "crossing-occlusion";
    constexpr double kPartial = 0.5;
    for (int agent = 0; agent < 2; ++agent) {
        spec.windows.push_back({agent, 5, 14, kPartial, 1.0});
        spec.windows.push_back({agent, 46, 60, kPartial, 1.0});
    }
    return spec;
}

ScenarioSpec crowd_scenario(std::uint64_t seed, int agents, int frames) {
    if (agents < 1 || frames < 2) throw Error("crowd needs agents and at least two frames");
    ScenarioSpec spec;
    spec.name = "crowd";
    spec.frames = frames;
    spec.noise_sigma = 2.0;
    spec.drop_prob = 0.02;
    spec.seed = seed;

    // Paths use their own stream so the detection stream only depends on the layout.
    // Walkers move mostly horizontally, in either direction, with gentle turns.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> ux(60.0, 1220.0);
    std::uniform_real_distribution<double> uy(110.0, 610.0);
    std::uniform_real_distribution<double> heading(-std::numbers::pi / 8.0, std::numbers::pi / 8.0);
    std::uniform_real_distribution<double> turn(-std::numbers::pi / 12.0, std::numbers::pi / 12.0);
    std::uniform_real_distribution<double> speed(1.0, 2.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr int kSegments = 3;

    for (int a = 0; a < agents; ++a) {
        AgentPath path;
        const double x0 = ux(rng);
        Vec2 p(x0, uy(rng));
        const double dir = unit(rng) < 0.5 ? 1.0 : -1.0;
        double theta = heading(rng);
        path.waypoints.emplace_back(1, p);
        for (int s = 1; s <= kSegments; ++s) {
            const int f = 1 + (frames - 1) * s / kSegments;
            const int len = f - path.waypoints.back().first;
            theta = std::clamp(theta + turn(rng), -std::numbers::pi / 6.0, std::numbers::pi / 6.0);
            const double v = speed(rng);
            Vec2 next = p + v * len * Vec2(dir * std::cos(theta), std::sin(theta));
            if (next.y() < 110.0 || next.y() > 610.0) {
                theta = -theta;
                next.y() = p.y() + v * len * std::sin(theta);
            }
            path.waypoints.emplace_back(f, next);
            p = next;
        }
        spec.agents.push_back(path);

        if (unit(rng) < 0.5) {
            const int length = 5 + static_cast<int>(unit(rng) * 20.0);
            const int first = 20 + static_cast<int>(unit(rng) * (frames - 60));
            const bool full = unit(rng) < 0.5;
            spec.windows.push_back({a, first, std::min(frames, first + length - 1), full ? 1.0 : 0.5, full ? 0.0 : 0.5});
        }
    }
    return spec;
}

std::vector<std::string> scenario_names() { return {"linear", "crossing", "occlusion", "crossing-occlusion", "crowd"}; }

ScenarioSpec scenario_by_name(std::string_view name, std::uint64_t seed) {
    if (name == "linear") return linear_scenario(seed, 3.0);
    if (name == "crossing") return crossing_scenario(seed);
    if (name == "occlusion") return occlusion_scenario(seed);
    if (name == "crossing-occlusion") return crossing_occlusion_scenario(seed);
    if (name == "crowd") return crowd_scenario(seed);
    throw Error("unknown scenario '" + std::string(name) + "'");
}

void write_sequence(const SyntheticSequence& seq, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::out | std::ios::trunc);
        if (!out) throw DataError("cannot write " + (dir / name).string());
        return out;
    };
    {
        auto out = open("gt.txt");
        write_tracks(out, seq.gt);
    }
    {
        auto out = open("det.txt");
        write_detections(out, seq.detections);
    }
    write_sidecar(dir / "embeddings.rtemb", seq.embeddings);
    {
        auto out = open("trajectories.csv");
        out << "frame,id,x,y\n";
        for (const auto& t : seq.trajectories) {
            out << t.frame << ',' << t.id << ',' << t.center.x() << ',' << t.center.y() << '\n';
        }
    }
}

std::map<int, std::vector<Detection>> tracker_input(const SyntheticSequence& seq) {
    return tracker_input(seq.detections, &seq.embeddings);
}

}  // namespace pedtrack
