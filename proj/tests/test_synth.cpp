#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pedtrack/error.hpp"
#include "pedtrack/evaluation.hpp"
#include "pedtrack/synth.hpp"
#include "pedtrack/tracker.hpp"

using namespace pedtrack;

namespace {

std::string dump(const SyntheticSequence& s) {
    std::ostringstream out;
    write_tracks(out, s.gt);
    write_detections(out, s.detections);
    write_sidecar(out, s.embeddings);
    return out.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Synth, SameSeedSameSequence) {
    for (const auto& name : scenario_names()) {
        SCOPED_TRACE(name);
        EXPECT_EQ(dump(generate(scenario_by_name(name, 3))), dump(generate(scenario_by_name(name, 3))));
    }
}

TEST(Synth, DifferentSeedsDiffer) {
    EXPECT_NE(dump(generate(crowd_scenario(1))), dump(generate(crowd_scenario(2))));
    EXPECT_NE(dump(generate(linear_scenario(1, 3.0))), dump(generate(linear_scenario(2, 3.0))));
}

TEST(Synth, WrittenFilesAreDeterministic) {
    const auto base = std::filesystem::temp_directory_path() / "pedtrack_synth_test";
    std::filesystem::remove_all(base);
    write_sequence(generate(crossing_scenario(5)), base / "a");
    write_sequence(generate(crossing_scenario(5)), base / "b");
    for (const char* f : {"gt.txt", "det.txt", "embeddings.rtemb", "trajectories.csv"}) {
        EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
        EXPECT_FALSE(slurp(base / "a" / f).empty()) << f;
    }
    std::filesystem::remove_all(base);
}

TEST(Synth, NoiselessLinearIsTrackedPerfectly) {
    const auto spec = linear_scenario(0, 0.0);
    const auto seq = generate(spec);
    for (const auto& [frame, dets] : seq.detections.frames) {
        ASSERT_EQ(dets.size(), 1u);
        const auto it = std::find_if(seq.gt.begin(), seq.gt.end(), [&](const ResultRecord& r) { return r.frame == frame; });
        ASSERT_NE(it, seq.gt.end());
        EXPECT_EQ(dets[0].box, it->box);
    }
    const auto results = run_tracker(TrackerConfig{}, tracker_input(seq));
    const auto m = evaluate(seq.gt, flatten(results));
    EXPECT_EQ(m.mota, 1.0);
    EXPECT_EQ(m.idsw, 0);
}

TEST(Synth, CrossingHasTwoIdentitiesEveryFrame) {
    const auto spec = crossing_scenario(0);
    ASSERT_EQ(spec.agents.size(), 2u);
    EXPECT_EQ(spec.noise_sigma, 2.0);
    const auto seq = generate(spec);
    std::map<int, std::set<int>> ids;
    for (const auto& r : seq.gt) ids[r.frame].insert(r.id);
    EXPECT_EQ(static_cast<int>(ids.size()), spec.frames);
    for (const auto& [f, s] : ids) EXPECT_EQ(s, (std::set<int>{1, 2})) << "frame " << f;
    // The paths meet at frame 50.
    EXPECT_LT((position_at(spec.agents[0], 50) - position_at(spec.agents[1], 50)).norm(), 1e-9);
}

TEST(Synth, FullOcclusionRemovesDetections) {
    const auto spec = occlusion_scenario(0, 15);
    const auto seq = generate(spec);
    const auto& w = spec.windows.at(0);
    for (int f = w.first_frame; f <= w.last_frame; ++f) {
        const auto it = seq.detections.frames.find(f);
        const std::size_t n = it == seq.detections.frames.end() ? 0 : it->second.size();
        EXPECT_EQ(n, spec.agents.size() - 1) << "frame " << f;
    }
}

TEST(Synth, PartialOcclusionLowersConfidence) {
    const auto spec = crossing_occlusion_scenario(0);
    const auto seq = generate(spec);
    for (const auto& d : seq.detections.frames.at(8)) EXPECT_NEAR(d.conf, 0.45, 1e-12);
    for (const auto& d : seq.detections.frames.at(30)) EXPECT_NEAR(d.conf, 0.9, 1e-12);
}

TEST(Synth, EmbeddingsAreIdentitySeparated) {
    const auto seq = generate(crossing_scenario(0));
    ASSERT_EQ(seq.embeddings.dim, 128u);
    std::size_t total = 0;
    for (const auto& [f, d] : seq.detections.frames) total += d.size();
    EXPECT_EQ(seq.embeddings.records.size(), total);
    EXPECT_NO_THROW(validate_sidecar(seq.embeddings, seq.detections, 128));
}

TEST(Synth, InvalidSpecsThrow) {
    ScenarioSpec s = linear_scenario(0);
    s.frames = 0;
    EXPECT_THROW(generate(s), Error);
    s = linear_scenario(0);
    s.agents.clear();
    EXPECT_THROW(generate(s), Error);
    EXPECT_THROW(scenario_by_name("nope", 0), Error);
}

TEST(Synth, PositionInterpolatesWaypoints) {
    AgentPath p;
    p.waypoints = {{1, {0, 0}}, {11, {10, 20}}};
    EXPECT_LT((position_at(p, 6) - Vec2(5, 10)).norm(), 1e-12);
    EXPECT_TRUE(present_at(p, 11));
    EXPECT_FALSE(present_at(p, 12));
}
