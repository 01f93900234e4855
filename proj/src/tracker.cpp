#include "pedtrack/tracker.hpp"

#include <algorithm>
#include <string>

#include "pedtrack/error.hpp"

namespace pedtrack {

const char* to_string(TrackState state) {
    switch (state) {
        case TrackState::kTentative: return "tentative";
        case TrackState::kConfirmed: return "confirmed";
        case TrackState::kLost: return "lost";
        case TrackState::kDeleted: return "deleted";
    }
    return "unknown";
}

bool is_legal_transition(TrackState from, TrackState to) {
    switch (from) {
        case TrackState::kTentative: return to == TrackState::kConfirmed || to == TrackState::kDeleted;
        case TrackState::kConfirmed: return to == TrackState::kLost;
        case TrackState::kLost: return to == TrackState::kConfirmed || to == TrackState::kDeleted;
        case TrackState::kDeleted: return false;
    }
    return false;
}

void TrackerConfig::validate() const {
    if (!(new_track_conf >= 0.0 && new_track_conf <= 1.0)) throw ConfigError("tracker.new_track_conf must lie in [0, 1]");
    if (!(min_detection_conf >= 0.0 && min_detection_conf <= 1.0)) {
        throw ConfigError("tracker.min_detection_conf must lie in [0, 1]");
    }
    if (max_lost_frames < 1) throw ConfigError("tracker.max_lost_frames must be positive");
    if (n_init < 1) throw ConfigError("tracker.n_init must be positive");
    if (interpolation_max_gap < 1) throw ConfigError("tracker.interpolation_max_gap must be positive");
    if (!(extent_momentum >= 0.0 && extent_momentum < 1.0)) throw ConfigError("tracker.extent_momentum must lie in [0, 1)");
    if (!(appearance.alpha >= 0.0 && appearance.alpha < 1.0)) throw ConfigError("appearance.alpha must lie in [0, 1)");
    smoothing.validate();
    noise.validate();
    association.validate();
}

Track::Track(int id, TrackState state, const Detection& det, const TrackerConfig& cfg)
    : id_(id),
      state_(state),
      motion_(det.box.center(), cfg.noise, cfg.smoothing),
      width_(det.box.width),
      height_(det.box.height),
      last_conf_(det.conf) {
    cluster_.alpha = cfg.appearance.alpha;
    depth_.pd_plus = 1;
    absorb_appearance(det, cfg);
}

void Track::transition(TrackState to) {
    if (to == state_) return;
    if (!is_legal_transition(state_, to)) {
        throw Error(std::string("illegal track transition ") + to_string(state_) + " -> " + to_string(to));
    }
    state_ = to;
}

void Track::absorb_appearance(const Detection& det, const TrackerConfig& cfg) {
    if (!det.embedding) return;
    update_coarse(cluster_, *det.embedding);
    if (cfg.appearance.use_fine) update_fine(cluster_, *det.embedding, det.conf);
}

void Track::predict() {
    motion_.predict();
    ++age_;
}

void Track::mark_matched(const Detection& det, const TrackerConfig& cfg) {
    motion_.observe(det.box.center());
    const double m = cfg.extent_momentum;
    width_ = m * width_ + (1.0 - m) * det.box.width;
    height_ = m * height_ + (1.0 - m) * det.box.height;
    last_conf_ = det.conf;
    absorb_appearance(det, cfg);

    ++depth_.pd_plus;
    time_since_update_ = 0;
    ++consecutive_hits_;
    if (state_ == TrackState::kTentative && consecutive_hits_ >= cfg.n_init) transition(TrackState::kConfirmed);
    if (state_ == TrackState::kLost) transition(TrackState::kConfirmed);
}

void Track::mark_missed(const TrackerConfig& cfg) {
    motion_.coast();
    ++depth_.nd_minus;
    ++time_since_update_;
    consecutive_hits_ = 0;
    switch (state_) {
        case TrackState::kTentative: transition(TrackState::kDeleted); break;
        case TrackState::kConfirmed: transition(TrackState::kLost); break;
        case TrackState::kLost:
            if (time_since_update_ > cfg.max_lost_frames) transition(TrackState::kDeleted);
            break;
        case TrackState::kDeleted: break;
    }
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

FrameResult Tracker::step(int frame, std::span<const Detection> detections) {
    if (last_frame_ && frame <= *last_frame_) throw Error("non-monotonic frame");
    const bool first_frame = !last_frame_;
    last_frame_ = frame;

    std::vector<const Detection*> dets;
    dets.reserve(detections.size());
    for (const auto& d : detections) {
        if (d.conf >= cfg_.min_detection_conf && d.box.width > 0.0 && d.box.height > 0.0) dets.push_back(&d);
    }

    for (auto& t : tracks_) t.predict();

    std::vector<DetectionCandidate> det_views;
    det_views.reserve(dets.size());
    for (const Detection* d : dets) {
        det_views.push_back({d->box, d->conf, d->embedding ? &*d->embedding : nullptr});
    }

    std::vector<std::size_t> pool;
    std::vector<std::size_t> tentative;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        (tracks_[i].state() == TrackState::kTentative ? tentative : pool).push_back(i);
    }
    auto view_of = [&](std::size_t i) {
        const Track& t = tracks_[i];
        return TrackCandidate{t.id(), t.box(), &t.motion().memory(), &t.cluster(), t.depth()};
    };

    std::vector<TrackCandidate> pool_views;
    for (const std::size_t i : pool) pool_views.push_back(view_of(i));
    const CostContext ctx{cfg_.association, cfg_.smoothing, cfg_.appearance.use_fine};
    const MatchResult deep = deep_association(pool_views, det_views, ctx);

    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track index, det index)
    std::vector<char> track_matched(tracks_.size(), 0);
    for (const auto& [r, c] : deep.matches) {
        matches.emplace_back(pool[r], c);
        track_matched[pool[r]] = 1;
    }

    std::vector<TrackCandidate> tentative_views;
    for (const std::size_t i : tentative) tentative_views.push_back(view_of(i));
    std::vector<DetectionCandidate> leftover_views;
    for (const std::size_t c : deep.unmatched_detections) leftover_views.push_back(det_views[c]);
    const MatchResult residual = iou_association(tentative_views, leftover_views, cfg_.association.iou_gate);

    std::vector<char> det_matched(dets.size(), 0);
    for (const auto& m : matches) det_matched[m.second] = 1;
    for (const auto& [r, c] : residual.matches) {
        const std::size_t det_index = deep.unmatched_detections[c];
        matches.emplace_back(tentative[r], det_index);
        track_matched[tentative[r]] = 1;
        det_matched[det_index] = 1;
    }

    for (const auto& [t, d] : matches) tracks_[t].mark_matched(*dets[d], cfg_);
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (!track_matched[i]) tracks_[i].mark_missed(cfg_);
    }
    std::erase_if(tracks_, [](const Track& t) { return t.state() == TrackState::kDeleted; });

    for (std::size_t d = 0; d < dets.size(); ++d) {
        if (det_matched[d] || !(dets[d]->conf > cfg_.new_track_conf)) continue;
        tracks_.emplace_back(next_id_++, first_frame ? TrackState::kConfirmed : TrackState::kTentative, *dets[d], cfg_);
    }

    FrameResult out;
    out.frame = frame;
    for (const auto& t : tracks_) {
        if (t.state() == TrackState::kConfirmed && t.time_since_update() == 0) {
            out.tracks.push_back({t.id(), t.box(), t.last_conf()});
        }
    }
    return out;
}

std::vector<FrameResult> interpolate(std::span<const FrameResult> results, int max_gap) {
    std::map<int, std::vector<TrackOutput>> by_frame;
    std::map<int, std::vector<std::pair<int, TrackOutput>>> by_id;
    for (const auto& fr : results) {
        auto& slot = by_frame[fr.frame];
        for (const auto& t : fr.tracks) {
            slot.push_back(t);
            by_id[t.id].emplace_back(fr.frame, t);
        }
    }

    for (auto& [id, seq] : by_id) {
        std::sort(seq.begin(), seq.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < seq.size(); ++i) {
            const auto& [f0, a] = seq[i - 1];
            const auto& [f1, b] = seq[i];
            const int missing = f1 - f0 - 1;
            if (missing < 1 || missing > max_gap) continue;
            for (int f = f0 + 1; f < f1; ++f) {
                const double t = static_cast<double>(f - f0) / static_cast<double>(f1 - f0);
                auto lerp = [t](double x, double y) { return x + t * (y - x); };
                TrackOutput filled;
                filled.id = id;
                filled.box = {lerp(a.box.left, b.box.left), lerp(a.box.top, b.box.top), lerp(a.box.width, b.box.width),
                              lerp(a.box.height, b.box.height)};
                filled.conf = lerp(a.conf, b.conf);
                by_frame[f].push_back(filled);
            }
        }
    }

    std::vector<FrameResult> out;
    out.reserve(by_frame.size());
    for (auto& [frame, tracks] : by_frame) {
        std::sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        out.push_back({frame, std::move(tracks)});
    }
    return out;
}

std::vector<FrameResult> run_tracker(const TrackerConfig& cfg, const std::map<int, std::vector<Detection>>& frames) {
    std::vector<FrameResult> results;
    if (frames.empty()) return results;
    Tracker tracker(cfg);
    const int first = frames.begin()->first;
    const int last = frames.rbegin()->first;
    const std::vector<Detection> none;
    for (int f = first; f <= last; ++f) {
        const auto it = frames.find(f);
        results.push_back(tracker.step(f, it == frames.end() ? none : it->second));
    }
    if (cfg.interpolation) return interpolate(results, cfg.interpolation_max_gap);
    return results;
}

}  // namespace pedtrack
