#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pedtrack/geometry.hpp"

namespace pedtrack {

// Diagonal process (q_*) and observation (r_*) noise variances of the centroid filter.
struct NoiseConfig {
    double q_x = 1.0;
    double q_y = 1.0;
    double q_vx = 1.0;
    double q_vy = 0.01;
    double r_x = 1.0;
    double r_y = 10.0;

    void validate() const;
};

struct SmoothingParams {
    int k = 5;   // fitted base points are U^0..U^k
    int dt = 2;  // index distance between the anchor points O and A
    // Coasted entries beyond this many consecutive misses are ignored for heading.
    int heading_coast_limit = 5;
    // Off: raw detection centers feed the filter and no line fit is made.
    bool enabled = true;

    void validate() const;
};

// Constant-velocity filter over the box centroid: x = (xc, yc, vx, vy).
struct KalmanState {
    Eigen::Vector4d x = Eigen::Vector4d::Zero();
    Eigen::Matrix4d P = Eigen::Matrix4d::Zero();

    // Zero velocity, P0 = diag(10, 10, 100, 100).
    static KalmanState initiate(const Vec2& center);

    Vec2 position() const { return x.head<2>(); }
    Vec2 velocity() const { return x.tail<2>(); }
};

KalmanState predict(const KalmanState& state, const NoiseConfig& noise);

// Throws Error("degenerate covariance") if the innovation covariance is singular.
KalmanState update(const KalmanState& state, const Vec2& z, const NoiseConfig& noise);

// Line y = a*x + b, or x = a*y + b when `swapped` (used for near-vertical data).
struct LineFit {
    double a = 0.0;
    double b = 0.0;
    bool swapped = false;
};

// Ordinary least squares; the regressed axis is the one with the smaller spread.
// Returns nullopt when all points coincide.
std::optional<LineFit> fit_line(std::span<const Vec2> points);

// Orthogonal projection of a point onto the fitted line.
Vec2 project_onto_fit(const Vec2& point, const LineFit& fit);

/// Centroid history of one track.
///
/// `optimal_centers` holds filter outputs (posteriors, or priors for coasted
/// frames). `smoothed` mirrors it except that the first k+1 entries are
/// replaced by their projections onto the initial line fit. `coast_run[i]` is
/// 0 for an observed entry and n for the n-th consecutive coasted entry.
struct TrajectoryMemory {
    std::vector<Vec2> raw_centers;
    std::vector<Vec2> optimal_centers;
    std::vector<Vec2> smoothed;
    std::vector<int> coast_run;
    std::optional<LineFit> fit;
    bool fit_degenerate = false;
    int hits = 0;

    std::size_t size() const { return smoothed.size(); }
};

// Replaces the smoothed prefix by projections onto the OLS line through U^0..U^k.
// Coincident base points leave the memory untouched and set `fit_degenerate`.
void fit_initial_segment(TrajectoryMemory& memory, const SmoothingParams& params);

/// Geometric correction of a detection center before it enters the filter.
///
/// With O = M[n-1-dt] and A = M[n-1], the result lies at distance
/// (|OA| + |OB|) / 2 from O, on the bisector of the signed angle from OA to OB.
/// Returns `detection` unchanged while hits < k, when there is not enough
/// history, or when OA or OB vanish.
Vec2 correct_measurement(const TrajectoryMemory& memory, const Vec2& detection, const SmoothingParams& params);

// (P1, P2) = (M'[m-1-dt], M'[m-1]) over the entries usable for heading, i.e.
// those whose coast run does not exceed params.heading_coast_limit.
std::optional<std::pair<Vec2, Vec2>> heading_anchors(const TrajectoryMemory& memory, const SmoothingParams& params);

// Owns the filter state and centroid history of a single track.
class TrajectoryFilter {
public:
    TrajectoryFilter(const Vec2& first_center, const NoiseConfig& noise, const SmoothingParams& params);

    // Advances the state to the current frame.
    void predict();

    // Feeds a matched detection center; returns the measurement that was used.
    Vec2 observe(const Vec2& detection_center);

    // Records the predicted centroid for a frame without a match.
    void coast();

    const KalmanState& state() const { return state_; }
    const TrajectoryMemory& memory() const { return memory_; }
    const SmoothingParams& params() const { return params_; }
    Vec2 position() const { return state_.position(); }

private:
    void append(const Vec2& center, int coast_run);

    NoiseConfig noise_;
    SmoothingParams params_;
    KalmanState state_;
    TrajectoryMemory memory_;
};

}  // namespace pedtrack
