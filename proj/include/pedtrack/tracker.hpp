#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "pedtrack/appearance.hpp"
#include "pedtrack/association.hpp"
#include "pedtrack/geometry.hpp"
#include "pedtrack/trajectory.hpp"

namespace pedtrack {

enum class TrackState { kTentative, kConfirmed, kLost, kDeleted };

const char* to_string(TrackState state);

// Legal lifecycle edges: tentative -> {confirmed, deleted}, confirmed -> lost,
// lost -> {confirmed, deleted}.
bool is_legal_transition(TrackState from, TrackState to);

struct TrackerConfig {
    double new_track_conf = 0.7;    // spawn threshold for unmatched detections
    int max_lost_frames = 30;       // lost tracks older than this are deleted
    int n_init = 3;                 // consecutive hits to confirm (after the first frame)
    double min_detection_conf = 0.1;  // ingest filter
    double extent_momentum = 0.9;   // EMA factor of the box width/height
    bool interpolation = true;
    int interpolation_max_gap = 20;
    SmoothingParams smoothing;
    NoiseConfig noise;
    AssociationConfig association;
    AppearanceConfig appearance;

    void validate() const;
};

struct Detection {
    Box box;
    double conf = 1.0;
    std::optional<Embedding> embedding;
};

class Track {
public:
    Track(int id, TrackState state, const Detection& det, const TrackerConfig& cfg);

    int id() const { return id_; }
    TrackState state() const { return state_; }
    const TrajectoryFilter& motion() const { return motion_; }
    const EmbeddingCluster& cluster() const { return cluster_; }
    const DepthCounters& depth() const { return depth_; }
    int time_since_update() const { return time_since_update_; }
    int age() const { return age_; }
    double width() const { return width_; }
    double height() const { return height_; }
    double last_conf() const { return last_conf_; }

    // Current centroid estimate with the smoothed extent.
    Box box() const { return Box::from_center(motion_.position(), width_, height_); }

    void predict();
    void mark_matched(const Detection& det, const TrackerConfig& cfg);
    void mark_missed(const TrackerConfig& cfg);

private:
    void transition(TrackState to);
    void absorb_appearance(const Detection& det, const TrackerConfig& cfg);

    int id_;
    TrackState state_;
    TrajectoryFilter motion_;
    EmbeddingCluster cluster_;
    DepthCounters depth_;
    double width_;
    double height_;
    double last_conf_;
    int time_since_update_ = 0;
    int age_ = 1;
    int consecutive_hits_ = 1;
};

struct TrackOutput {
    int id = 0;
    Box box;
    double conf = 0.0;
};

struct FrameResult {
    int frame = 0;
    std::vector<TrackOutput> tracks;  // sorted by id
};

/// Online tracker for one video sequence.
///
/// Per frame: predict every live track, run depth-staged fused association
/// over confirmed and lost tracks, match tentative tracks by IoU against the
/// leftover detections, update matched tracks (corrected measurement, filter
/// update, appearance memory, depth), age the unmatched ones, and spawn new
/// tracks from confident leftovers. Tracks spawned in the first frame are
/// confirmed immediately.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    // Throws Error("non-monotonic frame") unless frame indices strictly increase.
    FrameResult step(int frame, std::span<const Detection> detections);

    // Live (non-deleted) tracks, ordered by id.
    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerConfig& config() const { return cfg_; }

private:
    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    std::optional<int> last_frame_;
    int next_id_ = 1;
};

// Fills gaps of at most `max_gap` missing frames in each id's output with
// linearly interpolated boxes. Original entries are never altered.
std::vector<FrameResult> interpolate(std::span<const FrameResult> results, int max_gap);

// Runs a tracker over frames min..max of `frames` (empty frames included),
// then interpolates if enabled in the config.
std::vector<FrameResult> run_tracker(const TrackerConfig& cfg, const std::map<int, std::vector<Detection>>& frames);

}  // namespace pedtrack
