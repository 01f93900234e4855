#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "pedtrack/geometry.hpp"
#include "pedtrack/tracker.hpp"

namespace pedtrack {

struct DetectionRecord {
    int frame = 0;
    Box box;
    double conf = 0.0;
};

// One row of a ground-truth or result file. For ground truth `conf` holds
// the MOTChallenge flag column.
struct ResultRecord {
    int frame = 0;
    int id = 0;
    Box box;
    double conf = 0.0;
};

struct DetectionSet {
    std::map<int, std::vector<DetectionRecord>> frames;
    int warnings = 0;  // skipped lines (non-positive extent, or malformed in lenient mode)
};

enum class ParseMode { kStrict, kLenient };

/// Reads "frame,id,left,top,width,height,conf[,x,y,z]" lines.
///
/// Blank lines are ignored and the id column is discarded. Boxes with a
/// non-positive extent are always skipped and counted as warnings. A malformed
/// line throws DataError naming its line number in strict mode and is skipped
/// and counted in lenient mode.
DetectionSet parse_detections(std::istream& in, ParseMode mode = ParseMode::kStrict);
DetectionSet read_detections(const std::filesystem::path& path, ParseMode mode = ParseMode::kStrict);
void write_detections(std::ostream& out, const DetectionSet& detections);

// Parses gt or result rows; fields beyond the seventh are ignored.
// Ground truth rows whose flag is 0 are dropped when `skip_flag_zero` is set.
std::vector<ResultRecord> parse_tracks(std::istream& in, bool skip_flag_zero = false);
std::vector<ResultRecord> read_tracks(const std::filesystem::path& path, bool skip_flag_zero = false);

// Writes "frame,id,left,top,width,height,conf,-1,-1,-1" sorted by (frame, id).
void write_results(std::ostream& out, std::span<const FrameResult> results);
void write_tracks(std::ostream& out, std::span<const ResultRecord> records);

std::vector<ResultRecord> flatten(std::span<const FrameResult> results);

struct EmbeddingRecord {
    std::uint32_t frame = 0;
    std::uint32_t index = 0;  // position of the detection within its frame
    std::vector<float> values;
};

struct EmbeddingSidecar {
    std::uint32_t dim = 0;
    std::vector<EmbeddingRecord> records;
};

/// Binary layout: "RTEMB1", u32 dim, then per record u32 frame, u32 index and
/// dim f32 values, all little-endian.
///
/// Files ending in ".csv" are read as "frame,index,v0,...,v{dim-1}" lines.
/// Errors: "not an embedding sidecar" (bad magic), "corrupt sidecar"
/// (truncated or inconsistent length).
EmbeddingSidecar read_sidecar(const std::filesystem::path& path);
EmbeddingSidecar parse_sidecar(std::istream& in);
EmbeddingSidecar parse_sidecar_csv(std::istream& in);
void write_sidecar(const std::filesystem::path& path, const EmbeddingSidecar& sidecar);
void write_sidecar(std::ostream& out, const EmbeddingSidecar& sidecar);

// Checks the dimension against `expected_dim` (0 accepts any) and that every
// record references an existing detection exactly once. Throws DataError.
void validate_sidecar(const EmbeddingSidecar& sidecar, const DetectionSet& detections, std::uint32_t expected_dim = 0);

// Joins detections with their embeddings; detections without a record get none.
std::map<int, std::vector<Detection>> tracker_input(const DetectionSet& detections,
                                                    const EmbeddingSidecar* sidecar = nullptr);

}  // namespace pedtrack
