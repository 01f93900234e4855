// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [path/to/pedtrack]   (the binary is used for the determinism check)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pedtrack/appearance.hpp"
#include "pedtrack/cli.hpp"
#include "pedtrack/evaluation.hpp"
#include "pedtrack/synth.hpp"
#include "pedtrack/tracker.hpp"
#include "support/oracles.hpp"

using namespace pedtrack;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

MetricsReport track_and_score(const SyntheticSequence& seq, const TrackerConfig& cfg) {
    return evaluate(seq.gt, flatten(run_tracker(cfg, tracker_input(seq))));
}

// Costs are multiples of 1/1024 so every partial sum is exact in double.
CostMatrix dyadic_costs(std::mt19937_64& rng, double infeasible_prob) {
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_int_distribution<int> grid(0, 1024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto rows = static_cast<std::size_t>(dim(rng));
    const auto cols = static_cast<std::size_t>(dim(rng));
    const int coarse = unit(rng) < 0.3 ? 128 : 1;  // coarse grids force ties
    CostMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = (grid(rng) / coarse * coarse) / 1024.0;
            m(r, c) = unit(rng) < infeasible_prob ? CostMatrix::kInfeasible : v;
        }
    }
    return m;
}

Outcome criterion_assignment() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    int mismatches = 0;
    int square = 0;
    for (int i = 0; i < 500; ++i) {
        const auto m = dyadic_costs(rng, i < 250 ? 0.0 : 0.3);
        if (m.rows() == m.cols()) ++square;
        const auto res = solve_assignment(m);
        const auto best = oracle::brute_force_assignment(m);
        if (static_cast<int>(res.matches.size()) != best.cardinality || oracle::match_cost(m, res) != best.cost) {
            ++mismatches;
        }
    }
    const double dt = seconds_since(t0);
    return {mismatches == 0 && dt < 5.0,
            fmt("500 matrices up to 6x6 (%d square, 250 with infeasible entries), %d cost mismatches, %.3f s < 5 s",
                square, mismatches, dt)};
}

// Cross-track RMSE of raw detection centres and smoothed centres against the true line.
std::pair<double, double> linear_rmse(std::uint64_t seed) {
    const auto spec = linear_scenario(seed, 3.0);
    const auto seq = generate(spec);
    Tracker tracker{TrackerConfig{}};
    for (const auto& [frame, dets] : tracker_input(seq)) tracker.step(frame, dets);
    const Track* longest = nullptr;
    for (const auto& t : tracker.tracks()) {
        if (!longest || t.motion().memory().hits > longest->motion().memory().hits) longest = &t;
    }
    if (!longest) return {0.0, std::numeric_limits<double>::infinity()};
    const auto& mem = longest->motion().memory();
    const Vec2 p0 = spec.agents[0].waypoints.front().second;
    const Vec2 dir = (spec.agents[0].waypoints.back().second - p0).normalized();
    auto rms = [&](const std::vector<Vec2>& pts) {
        double s = 0.0;
        for (const auto& q : pts) {
            const Vec2 d = q - p0;
            const double e = d.x() * dir.y() - d.y() * dir.x();
            s += e * e;
        }
        return std::sqrt(s / static_cast<double>(pts.size()));
    };
    return {rms(mem.raw_centers), rms(mem.smoothed)};
}

Outcome criterion_filter() {
    const auto tally = oracle::fuzz_filter_invariants(12345, 10000);
    std::string detail = fmt("%d fuzz cases: symmetry %d, zero-innovation %d, projection %d, correction %d violations;",
                             tally.cases, tally.p_symmetry, tally.zero_innovation, tally.projection, tally.correction);
    bool pass = tally.failures() == 0 && tally.cases == 10000;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto [raw, smooth] = linear_rmse(seed);
        const double ratio = smooth / raw;
        worst = std::max(worst, ratio);
        detail += fmt(" seed %d raw %.3f smoothed %.3f;", static_cast<int>(seed), raw, smooth);
    }
    pass = pass && worst <= 0.9;
    detail += fmt(" worst smoothed/raw %.3f <= 0.90", worst);
    return {pass, detail};
}

TrackerConfig iou_only() {
    TrackerConfig cfg;
    cfg.association.use_appearance = false;
    cfg.association.use_direction = false;
    return cfg;
}

Outcome criterion_crossing() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto seq = generate(crossing_scenario(seed));
        const auto plain = track_and_score(seq, iou_only());
        const auto full = track_and_score(seq, TrackerConfig{});
        pass = pass && plain.idsw >= 1 && full.idsw == 0 && full.idf1 == 1.0;
        detail += fmt("seed %d IoU-only IDSW %d, full IDSW %d IDF1 %.4f; ", static_cast<int>(seed), plain.idsw,
                      full.idsw, full.idf1);
    }
    const double dt = seconds_since(t0);
    pass = pass && dt < 10.0;
    return {pass, detail + fmt("%.3f s < 10 s", dt)};
}

// Predicted id overlapping gt id `gt_id` in `frame` with IoU >= 0.5, or 0.
int matched_id(const std::vector<ResultRecord>& gt, const std::vector<ResultRecord>& pred, int gt_id, int frame) {
    const ResultRecord* g = nullptr;
    for (const auto& r : gt) {
        if (r.frame == frame && r.id == gt_id) g = &r;
    }
    if (!g) return 0;
    for (const auto& r : pred) {
        if (r.frame == frame && iou(r.box, g->box) >= 0.5) return r.id;
    }
    return 0;
}

Outcome criterion_occlusion() {
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        for (const int gap : {15, 40}) {
            const auto spec = occlusion_scenario(seed, gap);
            const auto seq = generate(spec);
            const auto pred = flatten(run_tracker(TrackerConfig{}, tracker_input(seq)));
            const auto m = evaluate(seq.gt, pred);
            const auto& w = spec.windows.front();
            const int before = matched_id(seq.gt, pred, w.agent + 1, w.first_frame - 1);
            const int after = matched_id(seq.gt, pred, w.agent + 1, w.last_frame + 5);
            const bool kept = before != 0 && before == after;
            pass = pass && (gap == 15 ? kept && m.idsw == 0 : !kept && after != 0);
            detail += fmt("seed %d gap %d id %d -> %d IDSW %d; ", static_cast<int>(seed), gap, before, after, m.idsw);
        }
    }
    return {pass, detail + "gap 15 keeps the id, gap 40 does not"};
}

Outcome criterion_metrics() {
    bool pass = true;
    std::string detail;
    for (const auto& s : oracle::micro_sequences()) {
        const auto m = evaluate(s.gt, s.pred);
        const bool ok = m.fp == s.fp && m.fn == s.fn && m.idsw == s.idsw && std::abs(m.mota - s.mota) <= 1e-12 &&
                        std::abs(m.idf1 - s.idf1) <= 1e-12 && std::abs(idf1(s.gt, s.pred) - s.idf1) <= 1e-12;
        pass = pass && ok;
        detail += fmt("'%s' MOTA %.3f IDF1 %.3f IDSW %d%s; ", s.name, m.mota, m.idf1, m.idsw, ok ? "" : " (wrong)");
    }

    std::mt19937_64 rng(77);
    int mismatches = 0;
    for (int i = 0; i < 300; ++i) {
        // Random scenes with up to 5 gt and 5 predicted ids.
        std::vector<ResultRecord> gt, pred;
        const int g_ids = 1 + static_cast<int>(rng() % 5);
        const int p_ids = 1 + static_cast<int>(rng() % 5);
        for (int f = 1; f <= 10; ++f) {
            for (int id = 1; id <= g_ids; ++id) {
                if (rng() % 4 == 0) continue;
                gt.push_back(oracle::rec(f, id, 50.0 * id, 0));
                if (rng() % 3 != 0) pred.push_back(oracle::rec(f, 100 + static_cast<int>(rng() % p_ids), 50.0 * id, 0));
            }
        }
        if (gt.empty()) continue;
        const auto overlap = identity_overlap(gt, pred);
        const int brute = oracle::brute_force_identity(overlap.counts);
        if (identity_matching(overlap.counts).idtp != brute || evaluate(gt, pred).idtp != brute) ++mismatches;
    }
    pass = pass && mismatches == 0;
    return {pass, detail + fmt("identity optimum vs brute force on 300 scenes: %d mismatches", mismatches)};
}

Outcome criterion_fine_memory() {
    const int dim = 128;
    EmbeddingCluster cluster;
    update_coarse(cluster, Embedding::Unit(dim, 0));
    const double occluded_conf = 0.45;
    update_fine(cluster, Embedding::Unit(dim, 1), occluded_conf);
    const Embedding query = Embedding::Unit(dim, 1);
    const double with_fine = appearance_distance(cluster, query, occluded_conf, true);
    const double coarse_only = appearance_distance(cluster, query, occluded_conf, false);
    bool pass = with_fine == 0.0 && coarse_only == 1.0;
    std::string detail = fmt("min rule distance %.3f (coarse alone %.3f); ", with_fine, coarse_only);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto seq = generate(crossing_occlusion_scenario(seed));
        TrackerConfig no_fine;
        no_fine.appearance.use_fine = false;
        const auto off = track_and_score(seq, no_fine);
        const auto on = track_and_score(seq, TrackerConfig{});
        pass = pass && off.idsw >= 1 && on.idsw == 0;
        detail += fmt("seed %d fine off IDSW %d, on IDSW %d; ", static_cast<int>(seed), off.idsw, on.idsw);
    }
    return {pass, detail + "disabling the fine memory loses the id"};
}

Outcome criterion_ablation() {
    const auto seq = generate(crowd_scenario(0, 20, 300));
    const auto rows = run_ablation(seq, TrackerConfig{});
    std::cout << format_ablation(rows);
    const int base = rows.front().metrics.idsw;
    const int full = rows.back().metrics.idsw;
    return {full <= base, fmt("crowd seed 0 (20 agents, 300 frames): full IDSW %d <= baseline IDSW %d", full, base)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Outcome criterion_determinism(const std::string& binary) {
    const fs::path dir = fs::temp_directory_path() / "pedtrack_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_sequence(generate(crowd_scenario(3, 20, 300)), dir / "seq");

    std::vector<std::string> outputs;
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
        const fs::path out = dir / ("run" + std::to_string(i) + ".txt");
        const std::vector<std::string> args{"run", "--detections", (dir / "seq/det.txt").string(), "--embeddings",
                                            (dir / "seq/embeddings.rtemb").string(), "--output", out.string()};
        int code = 0;
        if (binary.empty()) {
            std::ostringstream sink;
            code = run_cli(args, sink, sink);
        } else {
            std::string cmd = quote(binary);
            for (const auto& a : args) cmd += " " + quote(a);
            code = std::system(cmd.c_str());
        }
        ok = ok && code == 0 && fs::exists(out);
        outputs.push_back(slurp(out));
    }
    fs::remove_all(dir);
    const bool same = ok && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
    return {same, fmt("3 %s invocations on the crowd sequence, %zu-byte results %s",
                      binary.empty() ? "in-process" : "process", outputs[0].size(),
                      same ? "byte-identical" : "differ or failed")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string binary = argc > 1 ? argv[1] : "";
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, criterion_assignment}, {2, criterion_filter},      {3, criterion_crossing},
        {4, criterion_occlusion},  {5, criterion_metrics},     {6, criterion_fine_memory},
        {7, criterion_ablation},   {8, [&] { return criterion_determinism(binary); }},
    };
    int failed = 0;
    for (const auto& [n, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
