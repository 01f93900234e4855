#include "pedtrack/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pedtrack/error.hpp"

namespace pedtrack {

namespace {

void ema_into(std::optional<Embedding>& slot, const Embedding& f, double alpha) {
    if (!slot) {
        slot = f;
        return;
    }
    if (slot->size() != f.size()) throw Error("embedding dimension changed within a track");
    const Embedding mixed = alpha * (*slot) + (1.0 - alpha) * f;
    const double n = mixed.norm();
    // Only reachable for antipodal inputs with alpha = 0.5.
    slot = n > 1e-12 ? Embedding(mixed / n) : f;
}

double cosine_distance(const Embedding& slot, const Embedding& f) {
    if (slot.size() != f.size()) throw Error("embedding dimension mismatch");
    return std::clamp(1.0 - slot.dot(f), 0.0, 2.0);
}

}  // namespace

std::optional<int> bin_index(double conf) {
    if (!(conf >= 0.0 && conf <= 1.0)) throw Error("confidence out of range");
    for (int i = 0; i < kFineBins; ++i) {
        const double lo = (i + 1) / 10.0;
        const double hi = (i + 2) / 10.0;
        if (conf > lo && conf <= hi) return i;
    }
    return std::nullopt;
}

Embedding normalized(const Embedding& f) {
    const double n = f.norm();
    if (!std::isfinite(n) || n <= 0.0) throw Error("degenerate embedding");
    return f / n;
}

bool EmbeddingCluster::empty() const {
    return !coarse && std::none_of(fine.begin(), fine.end(), [](const auto& s) { return s.has_value(); });
}

void update_coarse(EmbeddingCluster& cluster, const Embedding& f) {
    ema_into(cluster.coarse, normalized(f), cluster.alpha);
}

void update_fine(EmbeddingCluster& cluster, const Embedding& f, double conf) {
    const auto bin = bin_index(conf);
    const Embedding unit = normalized(f);
    if (!bin) return;
    ema_into(cluster.fine[static_cast<std::size_t>(*bin)], unit, cluster.alpha);
}

double appearance_distance(const EmbeddingCluster& cluster, const Embedding& f, double conf, bool use_fine) {
    if (cluster.empty()) throw Error("no appearance state");
    const auto bin = bin_index(conf);

    double best = std::numeric_limits<double>::infinity();
    if (cluster.coarse) best = cosine_distance(*cluster.coarse, f);
    if (use_fine && bin && cluster.fine[static_cast<std::size_t>(*bin)]) {
        best = std::min(best, cosine_distance(*cluster.fine[static_cast<std::size_t>(*bin)], f));
    }
    if (std::isinf(best)) {
        for (const auto& slot : cluster.fine) {
            if (slot) best = std::min(best, cosine_distance(*slot, f));
        }
    }
    return best;
}

}  // namespace pedtrack
