#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "pedtrack/appearance.hpp"
#include "pedtrack/geometry.hpp"
#include "pedtrack/trajectory.hpp"

namespace pedtrack {

enum class FusionMode {
    kMin,          // lambda * min(iou, cos) + (1 - lambda) * direction
    kWeightedSum,  // lambda1 * iou + lambda2 * direction + (1 - lambda1 - lambda2) * cos
};

struct AssociationConfig {
    double lambda = 0.95;
    double iou_gate = 0.5;               // pairs with IoU distance above this are infeasible
    double appearance_threshold = 0.28;  // cosine distance ceiling for acceptance
    double iou_accept_min_overlap = 0.2;  // IoU floor for acceptance without appearance support
    double cd_neutral = 0.0;             // direction cost for tracks with too little history
    FusionMode fusion_mode = FusionMode::kMin;
    double lambda1 = 0.45;
    double lambda2 = 0.05;
    bool use_appearance = true;
    bool use_direction = true;
    bool depth_staging = true;

    void validate() const;
};

// Pd+ (successful matches) and Nd- (frames alive without a match).
struct DepthCounters {
    int pd_plus = 0;
    int nd_minus = 0;
};

inline constexpr int kResidualStage = 3;

// 0: Pd+ > 3Nd-, 1: Pd+ > 2Nd-, 2: Pd+ > Nd-, kResidualStage otherwise.
int depth_stage(const DepthCounters& depth);

class CostMatrix {
public:
    static constexpr double kInfeasible = std::numeric_limits<double>::infinity();

    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    bool feasible(std::size_t r, std::size_t c) const { return (*this)(r, c) < kInfeasible; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Indices refer to rows (tracks) and columns (detections) of the solved problem.
struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> matches;
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_detections;
};

/// Minimum-cost one-to-one assignment over feasible entries.
///
/// The number of matched pairs is maximised first, then the total cost.
/// Among optimal solutions that differ by a two-pair exchange (or by moving
/// one pair to a free row/column) of equal cost, the lexicographically
/// smaller (row, col) set is returned.
MatchResult solve_assignment(const CostMatrix& costs);

// Throws Error("degenerate box") for non-positive extents.
double iou_distance(const Box& a, const Box& b);

// Unsigned angle in [0, pi] between the track heading P1->P2 and P2->detection.
double direction_cost(const TrajectoryMemory& memory, const Vec2& det_center, const SmoothingParams& params,
                      double cd_neutral = 0.0);

// Missing appearance is encoded as kInfeasible in c_cos.
// Throws Error on shape mismatch.
CostMatrix fuse(const CostMatrix& c_iou, const CostMatrix& c_cos, const CostMatrix& c_d, const AssociationConfig& cfg);

// Non-owning views of the per-frame association inputs.
struct TrackCandidate {
    int id = 0;
    Box predicted_box;
    const TrajectoryMemory* memory = nullptr;
    const EmbeddingCluster* cluster = nullptr;
    DepthCounters depth;
};

struct DetectionCandidate {
    Box box;
    double conf = 1.0;
    const Embedding* embedding = nullptr;
};

struct CostContext {
    AssociationConfig association;
    SmoothingParams smoothing;
    bool use_fine = true;
};

CostMatrix iou_cost_matrix(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets);
CostMatrix appearance_cost_matrix(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                                  bool use_fine);
CostMatrix direction_cost_matrix(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                                 const SmoothingParams& smoothing, double cd_neutral);

// One fused assignment round followed by the acceptance test: a match is
// dropped when its cosine distance exceeds the appearance threshold and its
// IoU is below iou_accept_min_overlap.
MatchResult associate(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                      const CostContext& ctx);

// Staged association by depth (see depth_stage); each track joins only its
// own stage and tracks within a stage are ordered by id. With depth staging
// disabled this is a single round over all tracks.
MatchResult deep_association(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                             const CostContext& ctx);

// Gated IoU-only assignment.
MatchResult iou_association(std::span<const TrackCandidate> tracks, std::span<const DetectionCandidate> dets,
                            double iou_gate);

}  // namespace pedtrack
