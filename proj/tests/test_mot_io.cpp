#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "pedtrack/error.hpp"
#include "pedtrack/mot_io.hpp"

using namespace pedtrack;

namespace {

DetectionSet parse(const std::string& text, ParseMode mode = ParseMode::kStrict) {
    std::istringstream in(text);
    return parse_detections(in, mode);
}

std::string serialize(const DetectionSet& set) {
    std::ostringstream out;
    write_detections(out, set);
    return out.str();
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("pedtrack_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" + name);
}

// Reference encoder: explicit little-endian byte order, independent of the library writer.
std::string encode_sidecar(const EmbeddingSidecar& s) {
    std::string out = "RTEMB1";
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    };
    u32(s.dim);
    for (const auto& r : s.records) {
        u32(r.frame);
        u32(r.index);
        for (const float v : r.values) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            u32(bits);
        }
    }
    return out;
}

bool bit_equal(const EmbeddingSidecar& a, const EmbeddingSidecar& b) {
    if (a.dim != b.dim || a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        if (x.frame != y.frame || x.index != y.index || x.values.size() != y.values.size()) return false;
        for (std::size_t k = 0; k < x.values.size(); ++k) {
            if (std::bit_cast<std::uint32_t>(x.values[k]) != std::bit_cast<std::uint32_t>(y.values[k])) return false;
        }
    }
    return true;
}

EmbeddingSidecar random_sidecar(std::mt19937_64& rng) {
    EmbeddingSidecar s;
    s.dim = 1 + static_cast<std::uint32_t>(rng() % 16);
    const auto n = rng() % 6;
    for (std::uint64_t i = 0; i < n; ++i) {
        EmbeddingRecord r{static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng()), {}};
        for (std::uint32_t k = 0; k < s.dim; ++k) {
            // Arbitrary bit patterns, NaN payloads and infinities included.
            r.values.push_back(std::bit_cast<float>(static_cast<std::uint32_t>(rng())));
        }
        s.records.push_back(std::move(r));
    }
    return s;
}

}  // namespace

TEST(ParseDetections, BasicLine) {
    const auto set = parse("1,-1,10,20,30,60,0.9,-1,-1,-1\n");
    ASSERT_EQ(set.frames.size(), 1u);
    const auto& d = set.frames.at(1).at(0);
    EXPECT_EQ(d.frame, 1);
    EXPECT_EQ(d.box, (Box{10, 20, 30, 60}));
    EXPECT_DOUBLE_EQ(d.conf, 0.9);
    EXPECT_EQ(set.warnings, 0);
}

TEST(ParseDetections, EmptyInput) {
    const auto set = parse("");
    EXPECT_TRUE(set.frames.empty());
    EXPECT_EQ(set.warnings, 0);
}

TEST(ParseDetections, NonPositiveWidthIsSkippedWithWarning) {
    const auto set = parse("1,-1,10,20,-5,60,0.9,-1,-1,-1\n2,-1,10,20,5,60,0.9\n");
    EXPECT_EQ(set.warnings, 1);
    EXPECT_FALSE(set.frames.contains(1));
    EXPECT_EQ(set.frames.at(2).size(), 1u);
}

TEST(ParseDetections, StrictRejectsMalformedLineWithNumber) {
    try {
        parse("1,-1,10,20,30,60,0.9\n\n1,-1,ten,20,30,60,0.9\n");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse("1,-1,10,20\n"), DataError);
}

TEST(ParseDetections, LenientSkipsMalformedLines) {
    const auto set = parse("1,-1,10,20,30,60,0.9\nbroken\n2,-1,1,2,3,4,0.5\n", ParseMode::kLenient);
    EXPECT_EQ(set.warnings, 1);
    EXPECT_EQ(set.frames.size(), 2u);
}

TEST(ParseDetections, ParseSerializeParseIsIdempotent) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    std::string text;
    for (int i = 0; i < 200; ++i) {
        text += std::to_string(1 + static_cast<int>(rng() % 30)) + ",-1," + std::to_string(u(rng)) + "," +
                std::to_string(u(rng)) + "," + std::to_string(1.0 + u(rng)) + "," + std::to_string(1.0 + u(rng)) +
                "," + std::to_string(u(rng) / 1000.0) + ",-1,-1,-1\n";
    }
    const auto first = parse(text);
    const std::string once = serialize(first);
    const auto second = parse(once);
    EXPECT_EQ(serialize(second), once);
    ASSERT_EQ(first.frames.size(), second.frames.size());
    for (const auto& [f, dets] : first.frames) {
        const auto& other = second.frames.at(f);
        ASSERT_EQ(dets.size(), other.size());
        for (std::size_t i = 0; i < dets.size(); ++i) {
            EXPECT_EQ(dets[i].box, other[i].box);
            EXPECT_EQ(dets[i].conf, other[i].conf);
        }
    }
}

TEST(ParseTracks, FlagZeroSkippedForGroundTruth) {
    std::istringstream in("1,1,0,0,10,10,1,1,1\n1,2,0,0,10,10,0,1,1\n");
    EXPECT_EQ(parse_tracks(in, true).size(), 1u);
    std::istringstream again("1,1,0,0,10,10,1,1,1\n1,2,0,0,10,10,0,1,1\n");
    EXPECT_EQ(parse_tracks(again, false).size(), 2u);
}

TEST(WriteResults, FormatAndOrder) {
    const std::vector<FrameResult> res{{2, {{1, {1, 2, 3, 4}, 0.5}}}, {1, {{3, {0.1234, 0, 10, 20}, 0.9}, {2, {5, 5, 5, 5}, 1}}}};
    std::ostringstream out;
    write_results(out, res);
    EXPECT_EQ(out.str(),
              "1,2,5.000,5.000,5.000,5.000,1.000,-1,-1,-1\n"
              "1,3,0.123,0.000,10.000,20.000,0.900,-1,-1,-1\n"
              "2,1,1.000,2.000,3.000,4.000,0.500,-1,-1,-1\n");
    std::istringstream back(out.str());
    EXPECT_EQ(parse_tracks(back).size(), 3u);
}

TEST(Sidecar, RoundTripTwoRecords) {
    EmbeddingSidecar s{8, {}};
    for (std::uint32_t i = 0; i < 2; ++i) {
        EmbeddingRecord r{1, i, {}};
        for (int k = 0; k < 8; ++k) r.values.push_back(0.125f * static_cast<float>(k) - static_cast<float>(i));
        s.records.push_back(r);
    }
    std::stringstream buf;
    write_sidecar(buf, s);
    EXPECT_EQ(buf.str(), encode_sidecar(s));
    EXPECT_TRUE(bit_equal(parse_sidecar(buf), s));
}

TEST(Sidecar, FuzzRoundTripIsBitExact) {
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_sidecar(rng);
        std::stringstream written;
        write_sidecar(written, s);
        ASSERT_EQ(written.str(), encode_sidecar(s));
        std::istringstream reference(encode_sidecar(s));
        ASSERT_TRUE(bit_equal(parse_sidecar(reference), s));
    }
}

TEST(Sidecar, BadMagic) {
    std::istringstream in(std::string("XXXXXX") + std::string(8, '\0'));
    try {
        parse_sidecar(in);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "not an embedding sidecar");
    }
}

TEST(Sidecar, Truncated) {
    EmbeddingSidecar s{4, {{1, 0, {1, 2, 3, 4}}}};
    std::string bytes = encode_sidecar(s);
    for (const std::size_t cut : {std::size_t{8}, bytes.size() - 1, bytes.size() - 7}) {
        std::istringstream in(bytes.substr(0, cut));
        try {
            parse_sidecar(in);
            FAIL() << "cut " << cut;
        } catch (const DataError& e) {
            EXPECT_STREQ(e.what(), "corrupt sidecar");
        }
    }
}

TEST(Sidecar, CsvVariant) {
    std::istringstream in("1,0,0.5,0.25\n2,1,-1,2\n");
    const auto s = parse_sidecar_csv(in);
    EXPECT_EQ(s.dim, 2u);
    ASSERT_EQ(s.records.size(), 2u);
    EXPECT_EQ(s.records[1].frame, 2u);
    EXPECT_EQ(s.records[1].index, 1u);
    EXPECT_EQ(s.records[1].values, (std::vector<float>{-1.0f, 2.0f}));
    std::istringstream ragged("1,0,0.5,0.25\n2,1,-1\n");
    EXPECT_THROW(parse_sidecar_csv(ragged), DataError);
}

TEST(Sidecar, ReadDispatchesOnExtension) {
    const auto csv = temp_path("emb.csv");
    {
        std::ofstream out(csv);
        out << "1,0,1,0,0\n";
    }
    EXPECT_EQ(read_sidecar(csv).dim, 3u);
    const auto bin = temp_path("emb.rtemb");
    write_sidecar(bin, EmbeddingSidecar{3, {{1, 0, {1, 0, 0}}}});
    EXPECT_EQ(read_sidecar(bin).records.size(), 1u);
    std::filesystem::remove(csv);
    std::filesystem::remove(bin);
}

namespace {

DetectionSet three_detections() { return parse("1,-1,0,0,10,10,0.9\n1,-1,20,0,10,10,0.9\n1,-1,40,0,10,10,0.9\n"); }

}  // namespace

TEST(ValidateSidecar, IndexOutOfRange) {
    const EmbeddingSidecar s{2, {{1, 5, {1, 0}}}};
    EXPECT_THROW(validate_sidecar(s, three_detections()), DataError);
}

TEST(ValidateSidecar, UnknownFrameAndDuplicate) {
    EXPECT_THROW(validate_sidecar(EmbeddingSidecar{2, {{7, 0, {1, 0}}}}, three_detections()), DataError);
    EXPECT_THROW(validate_sidecar(EmbeddingSidecar{2, {{1, 0, {1, 0}}, {1, 0, {0, 1}}}}, three_detections()),
                 DataError);
}

TEST(ValidateSidecar, DimensionMismatchIsExplicit) {
    const EmbeddingSidecar s{2, {{1, 0, {1, 0}}}};
    EXPECT_NO_THROW(validate_sidecar(s, three_detections(), 2));
    try {
        validate_sidecar(s, three_detections(), 8);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    }
}

TEST(TrackerInput, JoinsEmbeddingsByIndex) {
    const EmbeddingSidecar s{2, {{1, 2, {0, 3}}}};
    const auto input = tracker_input(three_detections(), &s);
    const auto& frame = input.at(1);
    ASSERT_EQ(frame.size(), 3u);
    EXPECT_FALSE(frame[0].embedding);
    ASSERT_TRUE(frame[2].embedding);
    EXPECT_EQ((*frame[2].embedding)(1), 3.0);
}

TEST(ReadDetections, MissingFileThrows) {
    EXPECT_THROW(read_detections("/nonexistent/pedtrack/det.txt"), DataError);
}
