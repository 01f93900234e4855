#include <gtest/gtest.h>

#include <sstream>

#include "pedtrack/config.hpp"
#include "pedtrack/error.hpp"

using namespace pedtrack;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace

TEST(Config, DefaultsMatchDocumentedValues) {
    const RunConfig c;
    EXPECT_EQ(c.tracker.new_track_conf, 0.7);
    EXPECT_EQ(c.tracker.max_lost_frames, 30);
    EXPECT_EQ(c.tracker.interpolation_max_gap, 20);
    EXPECT_EQ(c.tracker.association.lambda, 0.95);
    EXPECT_EQ(c.tracker.association.iou_gate, 0.5);
    EXPECT_EQ(c.tracker.association.appearance_threshold, 0.28);
    EXPECT_EQ(c.tracker.association.iou_accept_min_overlap, 0.2);
    EXPECT_EQ(c.tracker.appearance.alpha, 0.9);
    EXPECT_EQ(c.tracker.smoothing.k, 5);
    EXPECT_EQ(c.tracker.smoothing.dt, 2);
}

TEST(Config, ParsesKeysCommentsAndWhitespace) {
    const auto c = parse(
        "# tuned\n"
        "association.lambda = 0.9   # inline\n"
        "\n"
        "  tracker.max_lost_frames=12\n"
        "association.fusion_mode = weighted\n"
        "appearance.use_fine = false\n"
        "io.embedding_dim = 64\n");
    EXPECT_EQ(c.tracker.association.lambda, 0.9);
    EXPECT_EQ(c.tracker.max_lost_frames, 12);
    EXPECT_EQ(c.tracker.association.fusion_mode, FusionMode::kWeightedSum);
    EXPECT_FALSE(c.tracker.appearance.use_fine);
    EXPECT_EQ(c.embedding_dim, 64u);
}

TEST(Config, UnknownKeyIsNamed) {
    try {
        parse("association.lamda = 0.9\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("association.lamda"), std::string::npos) << e.what();
    }
}

TEST(Config, BadValuesThrow) {
    EXPECT_THROW(parse("tracker.max_lost_frames = many\n"), ConfigError);
    EXPECT_THROW(parse("appearance.use_fine = maybe\n"), ConfigError);
    EXPECT_THROW(parse("association.fusion_mode = max\n"), ConfigError);
    EXPECT_THROW(parse("association.lambda\n"), ConfigError);
    EXPECT_THROW(parse("association.lambda = 1.5\n"), ConfigError);
    EXPECT_THROW(parse("noise.r_x = 0\n"), ConfigError);
}

TEST(Config, DumpParseRoundTrip) {
    RunConfig c;
    c.tracker.association.lambda = 0.123456789012345;
    c.tracker.smoothing.enabled = false;
    c.tracker.noise.q_vy = 1e-7;
    c.tracker.association.fusion_mode = FusionMode::kWeightedSum;
    c.embedding_dim = 2048;
    const std::string dumped = dump_config(c);
    const auto back = parse(dumped);
    EXPECT_EQ(dump_config(back), dumped);
    EXPECT_EQ(back.tracker.association.lambda, c.tracker.association.lambda);
    EXPECT_EQ(back.tracker.noise.q_vy, c.tracker.noise.q_vy);
    EXPECT_FALSE(back.tracker.smoothing.enabled);
    for (const auto& key : config_keys()) EXPECT_NE(dumped.find(key + " = "), std::string::npos) << key;
}

TEST(Config, FusionModeNames) {
    EXPECT_EQ(parse_fusion_mode("min"), FusionMode::kMin);
    EXPECT_EQ(parse_fusion_mode(to_string(FusionMode::kWeightedSum)), FusionMode::kWeightedSum);
    EXPECT_THROW(parse_fusion_mode("sum"), ConfigError);
}

TEST(Config, MissingFileThrows) { EXPECT_THROW(load_config("/nonexistent/pedtrack.cfg"), Error); }
