#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

namespace pedtrack {

using Embedding = Eigen::VectorXd;

inline constexpr int kFineBins = 9;

struct AppearanceConfig {
    double alpha = 0.9;     // EMA momentum
    bool use_fine = true;   // confidence-binned memory on/off
};

// Index of the confidence level (0.1(i+1), 0.1(i+2)] holding `conf`; the top
// level also includes 1.0. Returns nullopt for conf <= 0.1.
// Throws Error("confidence out of range") outside [0, 1].
std::optional<int> bin_index(double conf);

// Returns f / |f|. Throws Error("degenerate embedding") for a zero or non-finite vector.
Embedding normalized(const Embedding& f);

/// Per-track appearance memory: one coarse EMA vector over every matched
/// detection, plus one EMA vector per detection-confidence level.
struct EmbeddingCluster {
    std::optional<Embedding> coarse;
    std::array<std::optional<Embedding>, kFineBins> fine;
    double alpha = 0.9;

    bool empty() const;
};

void update_coarse(EmbeddingCluster& cluster, const Embedding& f);

// Updates the slot of bin_index(conf); no-op when conf has no level.
void update_fine(EmbeddingCluster& cluster, const Embedding& f, double conf);

// min(1 - <coarse, f>, 1 - <fine[bin(conf)], f>) over the slots that exist.
// With `use_fine` false only the coarse vector is consulted. If none of the
// consulted slots exist the remaining fine slots are used.
// Throws Error("no appearance state") for an empty cluster.
double appearance_distance(const EmbeddingCluster& cluster, const Embedding& f, double conf, bool use_fine = true);

}  // namespace pedtrack
