#pragma once

#include <span>
#include <string>
#include <vector>

#include "pedtrack/mot_io.hpp"

namespace pedtrack {

struct MetricsReport {
    int gt_count = 0;     // ground-truth boxes
    int pred_count = 0;   // predicted boxes
    int matches = 0;      // CLEAR true positives
    int fp = 0;
    int fn = 0;
    int idsw = 0;
    double mota = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    int idtp = 0;
    int idfp = 0;
    int idfn = 0;
    double idf1 = 0.0;
    int gt_ids = 0;
    int pred_ids = 0;
    int mt = 0;  // gt identities matched in at least 80% of their frames
    int ml = 0;  // gt identities matched in at most 20% of their frames
};

/// CLEAR-MOT accumulation over frames.
///
/// Per frame, a ground-truth object keeps its last matched hypothesis when
/// that hypothesis is present, unclaimed, and overlaps with IoU >= threshold.
/// The rest is matched by minimum IoU distance among pairs over the
/// threshold. A match to a hypothesis other than the object's last one is an
/// identity switch. Fills gt_count, pred_count, matches, fp, fn, idsw, mota,
/// recall, precision, gt_ids, mt, ml. Throws DataError("no ground truth").
MetricsReport clear_mot(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred,
                        double iou_threshold = 0.5);

// Per-frame co-occurrence counts with IoU >= threshold between every gt id
// (rows, ascending) and predicted id (columns, ascending).
struct IdentityOverlap {
    std::vector<int> gt_ids;
    std::vector<int> pred_ids;
    std::vector<std::vector<int>> counts;
    int gt_total = 0;
    int pred_total = 0;
};

IdentityOverlap identity_overlap(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred,
                                 double iou_threshold = 0.5);

// One-to-one gt/pred identity pairing maximizing the summed counts.
struct IdentityMatching {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, column) of the overlap table
    int idtp = 0;
};

IdentityMatching identity_matching(const std::vector<std::vector<int>>& counts);

// 2 IDTP / (gt boxes + predicted boxes); 0 for empty predictions.
// Throws DataError("no ground truth").
double idf1(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred, double iou_threshold = 0.5);

// CLEAR-MOT plus the identity metrics.
MetricsReport evaluate(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred,
                       double iou_threshold = 0.5);

// Human-readable table and machine-readable "key=value" lines.
std::string format_table(const MetricsReport& report);
std::string format_key_values(const MetricsReport& report);

}  // namespace pedtrack
