#include "pedtrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pedtrack/error.hpp"

namespace pedtrack {

namespace {

void require_unit_interval(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("association.") + name + " must lie in [0, 1]");
}

}  // namespace

void AssociationConfig::validate() const {
    require_unit_interval(lambda, "lambda");
    require_unit_interval(iou_gate, "iou_gate");
    require_unit_interval(appearance_threshold, "appearance_threshold");
    require_unit_interval(iou_accept_min_overlap, "iou_accept_min_overlap");
    require_unit_interval(lambda1, "lambda1");
    require_unit_interval(lambda2, "lambda2");
    if (lambda1 + lambda2 > 1.0) throw ConfigError("association.lambda1 + association.lambda2 must not exceed 1");
    if (!(cd_neutral >= 0.0 && cd_neutral <= std::numbers::pi)) throw ConfigError("association.cd_neutral must lie in [0, pi]");
}

int depth_stage(const DepthCounters& depth) {
    if (depth.pd_plus > 3 * depth.nd_minus) return 0;
    if (depth.pd_plus > 2 * depth.nd_minus) return 1;
    if (depth.pd_plus > depth.nd_minus) return 2;
    return kResidualStage;
}

double iou_distance(const Box& a, const Box& b) {
    if (!(a.width > 0.0 && a.height > 0.0 && b.width > 0.0 && b.height > 0.0)) throw Error("degenerate box");
    return 1.0 - iou(a, b);
}

double direction_cost(const TrajectoryMemory& memory, const Vec2& det_center, const SmoothingParams& params,
                      double cd_neutral) {
    const auto anchors = heading_anchors(memory, params);
    if (!anchors) return cd_neutral;
    const Vec2 heading = anchors->second - anchors->first;
    const Vec2 bearing = det_center - anchors->second;
    if (heading.norm() <= 1e-12 || bearing.norm() <= 1e-12) return cd_neutral;
    const double cross = heading.x() * bearing.y() - heading.y() * bearing.x();
    return std::atan2(std::abs(cross), heading.dot(bearing));
}

CostMatrix fuse(const CostMatrix& c_iou, const CostMatrix& c_cos, const CostMatrix& c_d, const AssociationConfig& cfg) {
    if (c_iou.rows() != c_cos.rows() || c_iou.rows() != c_d.rows() || c_iou.cols() != c_cos.cols() ||
        c_iou.cols() != c_d.cols()) {
        throw Error("cost matrix shape mismatch");
    }
    CostMatrix out(c_iou.rows(), c_iou.cols(), CostMatrix::kInfeasible);
    for (std::size_t r = 0; r < c_iou.rows(); ++r) {
        for (std::size_t c = 0; c < c_iou.cols(); ++c) {
            const double iou_cost = c_iou(r, c);
            if (!(iou_cost <= cfg.iou_gate)) continue;
            const double cos_cost = c_cos(r, c);
            const double dir_cost = c_d(r, c);
            if (cfg.fusion_mode == FusionMode::kMin) {
                out(r, c) = cfg.lambda * std::min(iou_cost, cos_cost) + (1.0 - cfg.lambda) * dir_cost;
            } else {
                const double appearance = c_cos.feasible(r, c) ? cos_cost : iou_cost;
                out(r, c) = cfg.lambda1 * iou_cost + cfg.lambda2 * dir_cost +
                            (1.0 - cfg.lambda1 - cfg.lambda2) * appearance;
            }
        }
    }
    return out;
}

CostMatrix iou_cost_matrix(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets) {
    CostMatrix m(tracks.size(), dets.size());
    for (std::size_t r = 0; r < tracks.size(); ++r) {
        for (std::size_t c = 0; c < dets.size(); ++c) m(r, c) = iou_distance(tracks[r].predicted_box, dets[c].box);
    }
    return m;
}

CostMatrix appearance_cost_matrix(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                                  bool use_fine) {
    CostMatrix m(tracks.size(), dets.size(), CostMatrix::kInfeasible);
    for (std::size_t r = 0; r < tracks.size(); ++r) {
        const EmbeddingCluster* cluster = tracks[r].cluster;
        if (cluster == nullptr || cluster->empty()) continue;
        for (std::size_t c = 0; c < dets.size(); ++c) {
            if (dets[c].embedding == nullptr) continue;
            m(r, c) = appearance_distance(*cluster, *dets[c].embedding, dets[c].conf, use_fine);
        }
    }
    return m;
}

CostMatrix direction_cost_matrix(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                                 const SmoothingParams& smoothing, double cd_neutral) {
    CostMatrix m(tracks.size(), dets.size(), cd_neutral);
    for (std::size_t r = 0; r < tracks.size(); ++r) {
        if (tracks[r].memory == nullptr) continue;
        for (std::size_t c = 0; c < dets.size(); ++c) {
            m(r, c) = direction_cost(*tracks[r].memory, dets[c].box.center(), smoothing, cd_neutral);
        }
    }
    return m;
}

MatchResult associate(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                      const CostContext& ctx) {
    const AssociationConfig& cfg = ctx.association;
    const CostMatrix c_iou = iou_cost_matrix(tracks, dets);
    const CostMatrix c_cos = cfg.use_appearance ? appearance_cost_matrix(tracks, dets, ctx.use_fine)
                                                : CostMatrix(tracks.size(), dets.size(), CostMatrix::kInfeasible);
    const CostMatrix c_d = cfg.use_direction && ctx.smoothing.enabled
                               ? direction_cost_matrix(tracks, dets, ctx.smoothing, cfg.cd_neutral)
                               : CostMatrix(tracks.size(), dets.size(), 0.0);

    MatchResult solved = solve_assignment(fuse(c_iou, c_cos, c_d, cfg));

    MatchResult result;
    result.unmatched_tracks = std::move(solved.unmatched_tracks);
    result.unmatched_detections = std::move(solved.unmatched_detections);
    for (const auto& [r, c] : solved.matches) {
        const bool appearance_rejects = !(c_cos(r, c) <= cfg.appearance_threshold);
        const bool overlap_rejects = 1.0 - c_iou(r, c) < cfg.iou_accept_min_overlap;
        if (appearance_rejects && overlap_rejects) {
            result.unmatched_tracks.push_back(r);
            result.unmatched_detections.push_back(c);
        } else {
            result.matches.emplace_back(r, c);
        }
    }
    std::sort(result.unmatched_tracks.begin(), result.unmatched_tracks.end());
    std::sort(result.unmatched_detections.begin(), result.unmatched_detections.end());
    return result;
}

MatchResult deep_association(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                             const CostContext& ctx) {
    std::vector<std::vector<std::size_t>> stages(kResidualStage + 1);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const int stage = ctx.association.depth_staging ? depth_stage(tracks[i].depth) : 0;
        stages[static_cast<std::size_t>(stage)].push_back(i);
    }

    std::vector<std::size_t> free_dets(dets.size());
    std::iota(free_dets.begin(), free_dets.end(), std::size_t{0});

    MatchResult result;
    for (auto& members : stages) {
        if (members.empty()) continue;
        std::stable_sort(members.begin(), members.end(),
                         [&](std::size_t a, std::size_t b) { return tracks[a].id < tracks[b].id; });
        if (free_dets.empty()) {
            result.unmatched_tracks.insert(result.unmatched_tracks.end(), members.begin(), members.end());
            continue;
        }

        std::vector<TrackCandidate> stage_tracks;
        stage_tracks.reserve(members.size());
        for (const std::size_t i : members) stage_tracks.push_back(tracks[i]);
        std::vector<DetectionCandidate> stage_dets;
        stage_dets.reserve(free_dets.size());
        for (const std::size_t j : free_dets) stage_dets.push_back(dets[j]);

        const MatchResult stage = associate(stage_tracks, stage_dets, ctx);
        std::vector<char> taken(free_dets.size(), 0);
        for (const auto& [r, c] : stage.matches) {
            result.matches.emplace_back(members[r], free_dets[c]);
            taken[c] = 1;
        }
        for (const std::size_t r : stage.unmatched_tracks) result.unmatched_tracks.push_back(members[r]);

        std::vector<std::size_t> remaining;
        for (std::size_t c = 0; c < free_dets.size(); ++c) {
            if (!taken[c]) remaining.push_back(free_dets[c]);
        }
        free_dets = std::move(remaining);
    }
    result.unmatched_detections = std::move(free_dets);
    std::sort(result.unmatched_tracks.begin(), result.unmatched_tracks.end());
    return result;
}

MatchResult iou_association(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                            double iou_gate) {
    CostMatrix costs = iou_cost_matrix(tracks, dets);
    for (std::size_t r = 0; r < costs.rows(); ++r) {
        for (std::size_t c = 0; c < costs.cols(); ++c) {
            if (!(costs(r, c) <= iou_gate)) costs(r, c) = CostMatrix::kInfeasible;
        }
    }
    return solve_assignment(costs);
}

}  // namespace pedtrack
