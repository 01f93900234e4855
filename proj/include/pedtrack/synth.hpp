#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pedtrack/geometry.hpp"
#include "pedtrack/mot_io.hpp"

namespace pedtrack {

// Piecewise-linear centre path; the agent exists from the first to the last waypoint frame.
struct AgentPath {
    std::vector<std::pair<int, Vec2>> waypoints;  // strictly increasing frames
    double width = 40.0;
    double height = 100.0;
};

// Frames [first_frame, last_frame] of one agent. Detection confidence is
// base_conf * (1 - occlusion); at or below 0.1 the agent is not detected.
// `appearance_shift` in [0, 1] blends the embedding toward the agent's
// occluded-appearance anchor.
struct OcclusionWindow {
    int agent = 0;  // 0-based agent index
    int first_frame = 1;
    int last_frame = 1;
    double occlusion = 1.0;
    double appearance_shift = 0.0;
};

struct ScenarioSpec {
    std::string name;
    int frames = 100;
    double noise_sigma = 0.0;  // centre noise, px
    double drop_prob = 0.0;
    int embedding_dim = 128;
    double embedding_noise = 0.05;  // norm of the per-detection perturbation
    double base_conf = 0.9;
    std::uint64_t seed = 0;
    std::vector<AgentPath> agents;
    std::vector<OcclusionWindow> windows;

    // Throws Error for zero agents or frames and malformed paths or windows.
    void validate() const;
};

struct TrajectoryPoint {
    int frame = 0;
    int id = 0;
    Vec2 center;
};

struct SyntheticSequence {
    std::vector<ResultRecord> gt;        // id = agent index + 1
    DetectionSet detections;             // shuffled within each frame
    EmbeddingSidecar embeddings;         // one record per detection
    std::vector<TrajectoryPoint> trajectories;
};

// Minimum inter-agent minus maximum intra-agent cosine distance accepted for anchors.
inline constexpr double kAnchorSeparationMargin = 0.2;

/// Deterministic in `spec`: the same spec gives the same sequence.
///
/// Detections are the ground-truth boxes with iid Gaussian centre noise,
/// removed inside full occlusion and with probability drop_prob. Each agent
/// has a unit anchor embedding; detection embeddings are
/// normalize(anchor + perturbation). Anchors are redrawn until they satisfy
/// kAnchorSeparationMargin.
SyntheticSequence generate(const ScenarioSpec& spec);

Vec2 position_at(const AgentPath& path, int frame);
bool present_at(const AgentPath& path, int frame);

// One agent on a straight line at constant velocity.
ScenarioSpec linear_scenario(std::uint64_t seed, double noise_sigma = 0.0, int frames = 100);

// Two agents whose paths intersect at frame 50 and overlap heavily around it.
ScenarioSpec crossing_scenario(std::uint64_t seed);

// Three agents; agent 0 is fully occluded for `gap` frames mid-sequence.
ScenarioSpec occlusion_scenario(std::uint64_t seed, int gap = 15);

// The crossing scenario with both agents partially occluded, with a changed
// appearance, during the crossing and during earlier episodes at the same
// occlusion level.
ScenarioSpec crossing_occlusion_scenario(std::uint64_t seed);

// Random piecewise-linear walkers in a bounded region with random occlusions.
ScenarioSpec crowd_scenario(std::uint64_t seed, int agents = 20, int frames = 300);

// linear, crossing, occlusion, crossing-occlusion or crowd.
ScenarioSpec scenario_by_name(std::string_view name, std::uint64_t seed);
std::vector<std::string> scenario_names();

// Writes gt.txt, det.txt, embeddings.rtemb and trajectories.csv into `dir`.
void write_sequence(const SyntheticSequence& seq, const std::filesystem::path& dir);

// Detections joined with their embeddings, as the tracker consumes them.
std::map<int, std::vector<Detection>> tracker_input(const SyntheticSequence& seq);

}  // namespace pedtrack
