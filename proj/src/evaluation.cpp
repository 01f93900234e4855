#include "pedtrack/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>

#include "pedtrack/association.hpp"
#include "pedtrack/error.hpp"

namespace pedtrack {

namespace {

using FrameIndex = std::map<int, std::vector<const ResultRecord*>>;

FrameIndex by_frame(std::span<const ResultRecord> records) {
    FrameIndex index;
    for (const auto& r : records) index[r.frame].push_back(&r);
    return index;
}

void require_gt(std::span<const ResultRecord> gt) {
    if (gt.empty()) throw DataError("no ground truth");
}

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

MetricsReport clear_mot(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred, double iou_threshold) {
    require_gt(gt);
    const FrameIndex gt_frames = by_frame(gt);
    const FrameIndex pred_frames = by_frame(pred);

    MetricsReport report;
    report.gt_count = static_cast<int>(gt.size());
    report.pred_count = static_cast<int>(pred.size());

    std::map<int, int> last_match;  // gt id -> predicted id of its latest match
    std::map<int, int> gt_frames_seen;
    std::map<int, int> gt_frames_matched;

    static const std::vector<const ResultRecord*> kNone;
    for (const auto& [frame, objects] : gt_frames) {
        const auto it = pred_frames.find(frame);
        const auto& hyps = it == pred_frames.end() ? kNone : it->second;

        std::vector<char> obj_done(objects.size(), 0);
        std::vector<char> hyp_done(hyps.size(), 0);
        int frame_matches = 0;
        auto record_match = [&](std::size_t o, std::size_t h) {
            const int gid = objects[o]->id;
            const int pid = hyps[h]->id;
            const auto prev = last_match.find(gid);
            if (prev != last_match.end() && prev->second != pid) ++report.idsw;
            last_match[gid] = pid;
            obj_done[o] = 1;
            hyp_done[h] = 1;
            ++gt_frames_matched[gid];
            ++frame_matches;
        };

        for (std::size_t o = 0; o < objects.size(); ++o) {
            const auto prev = last_match.find(objects[o]->id);
            if (prev == last_match.end()) continue;
            for (std::size_t h = 0; h < hyps.size(); ++h) {
                if (hyp_done[h] || hyps[h]->id != prev->second) continue;
                if (iou(objects[o]->box, hyps[h]->box) >= iou_threshold) {
                    record_match(o, h);
                    break;
                }
            }
        }

        std::vector<std::size_t> free_obj;
        std::vector<std::size_t> free_hyp;
        for (std::size_t o = 0; o < objects.size(); ++o) {
            if (!obj_done[o]) free_obj.push_back(o);
        }
        for (std::size_t h = 0; h < hyps.size(); ++h) {
            if (!hyp_done[h]) free_hyp.push_back(h);
        }
        CostMatrix costs(free_obj.size(), free_hyp.size(), CostMatrix::kInfeasible);
        for (std::size_t r = 0; r < free_obj.size(); ++r) {
            for (std::size_t c = 0; c < free_hyp.size(); ++c) {
                const double overlap = iou(objects[free_obj[r]]->box, hyps[free_hyp[c]]->box);
                if (overlap >= iou_threshold) costs(r, c) = 1.0 - overlap;
            }
        }
        for (const auto& [r, c] : solve_assignment(costs).matches) record_match(free_obj[r], free_hyp[c]);

        for (const auto* obj : objects) ++gt_frames_seen[obj->id];
        report.matches += frame_matches;
        report.fn += static_cast<int>(objects.size()) - frame_matches;
    }
    report.fp = report.pred_count - report.matches;

    report.gt_ids = static_cast<int>(gt_frames_seen.size());
    for (const auto& [gid, seen] : gt_frames_seen) {
        const auto m = gt_frames_matched.find(gid);
        const double ratio = static_cast<double>(m == gt_frames_matched.end() ? 0 : m->second) / seen;
        if (ratio >= 0.8) ++report.mt;
        if (ratio <= 0.2) ++report.ml;
    }

    const double gt_total = report.gt_count;
    report.mota = 1.0 - static_cast<double>(report.fp + report.fn + report.idsw) / gt_total;
    report.recall = report.matches / gt_total;
    report.precision = report.pred_count > 0 ? static_cast<double>(report.matches) / report.pred_count : 0.0;
    return report;
}

IdentityOverlap identity_overlap(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred,
                                 double iou_threshold) {
    IdentityOverlap out;
    out.gt_total = static_cast<int>(gt.size());
    out.pred_total = static_cast<int>(pred.size());
    for (const auto& r : gt) out.gt_ids.push_back(r.id);
    for (const auto& r : pred) out.pred_ids.push_back(r.id);
    for (auto* ids : {&out.gt_ids, &out.pred_ids}) {
        std::sort(ids->begin(), ids->end());
        ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
    }
    auto position = [](const std::vector<int>& ids, int id) {
        return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    out.counts.assign(out.gt_ids.size(), std::vector<int>(out.pred_ids.size(), 0));

    const FrameIndex pred_frames = by_frame(pred);
    for (const auto& [frame, objects] : by_frame(gt)) {
        const auto it = pred_frames.find(frame);
        if (it == pred_frames.end()) continue;
        for (const auto* o : objects) {
            for (const auto* h : it->second) {
                if (iou(o->box, h->box) >= iou_threshold) {
                    ++out.counts[position(out.gt_ids, o->id)][position(out.pred_ids, h->id)];
                }
            }
        }
    }
    return out;
}

IdentityMatching identity_matching(const std::vector<std::vector<int>>& counts) {
    IdentityMatching out;
    const std::size_t rows = counts.size();
    const std::size_t cols = rows == 0 ? 0 : counts.front().size();
    // Every pair is feasible so that no positive count is traded for cardinality.
    CostMatrix costs(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) costs(r, c) = -static_cast<double>(counts[r][c]);
    }
    for (const auto& [r, c] : solve_assignment(costs).matches) {
        if (counts[r][c] == 0) continue;
        out.pairs.emplace_back(r, c);
        out.idtp += counts[r][c];
    }
    return out;
}

double idf1(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred, double iou_threshold) {
    require_gt(gt);
    if (pred.empty()) return 0.0;
    const IdentityOverlap overlap = identity_overlap(gt, pred, iou_threshold);
    const IdentityMatching matching = identity_matching(overlap.counts);
    return 2.0 * matching.idtp / static_cast<double>(overlap.gt_total + overlap.pred_total);
}

MetricsReport evaluate(std::span<const ResultRecord> gt, std::span<const ResultRecord> pred, double iou_threshold) {
    MetricsReport report = clear_mot(gt, pred, iou_threshold);
    const IdentityOverlap overlap = identity_overlap(gt, pred, iou_threshold);
    const IdentityMatching matching = identity_matching(overlap.counts);
    report.idtp = matching.idtp;
    report.idfn = overlap.gt_total - matching.idtp;
    report.idfp = overlap.pred_total - matching.idtp;
    report.pred_ids = static_cast<int>(overlap.pred_ids.size());
    report.idf1 = pred.empty() ? 0.0 : 2.0 * matching.idtp / static_cast<double>(overlap.gt_total + overlap.pred_total);
    return report;
}

std::string format_table(const MetricsReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%8s %8s %6s %6s %6s %6s %8s %6s %6s\n%8.3f %8.3f %6d %6d %6d %6d %8.3f %6d %6d\n", "MOTA", "IDF1",
                  "IDSW", "FP", "FN", "GT", "Recall", "MT", "ML", 100.0 * r.mota, 100.0 * r.idf1, r.idsw, r.fp, r.fn,
                  r.gt_count, 100.0 * r.recall, r.mt, r.ml);
    return buf;
}

std::string format_key_values(const MetricsReport& r) {
    std::string out;
    auto add = [&out](const char* key, const std::string& value) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    };
    add("mota", fixed(r.mota));
    add("idf1", fixed(r.idf1));
    add("recall", fixed(r.recall));
    add("precision", fixed(r.precision));
    add("idsw", std::to_string(r.idsw));
    add("fp", std::to_string(r.fp));
    add("fn", std::to_string(r.fn));
    add("gt", std::to_string(r.gt_count));
    add("matches", std::to_string(r.matches));
    add("idtp", std::to_string(r.idtp));
    add("idfp", std::to_string(r.idfp));
    add("idfn", std::to_string(r.idfn));
    add("gt_ids", std::to_string(r.gt_ids));
    add("pred_ids", std::to_string(r.pred_ids));
    add("mt", std::to_string(r.mt));
    add("ml", std::to_string(r.ml));
    return out;
}

}  // namespace pedtrack
