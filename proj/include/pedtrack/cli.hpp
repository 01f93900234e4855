#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pedtrack/evaluation.hpp"
#include "pedtrack/synth.hpp"
#include "pedtrack/tracker.hpp"

namespace pedtrack {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct AblationRow {
    std::string name;
    MetricsReport metrics;
};

// Cumulative rows: baseline (IoU + coarse appearance, raw measurements),
// +STP-DC (smoothing and direction cost), +CF-ECM (fine memory), +DA (depth staging).
std::vector<TrackerConfig> ablation_configs(const TrackerConfig& full);
std::vector<AblationRow> run_ablation(const SyntheticSequence& seq, const TrackerConfig& full);
std::string format_ablation(const std::vector<AblationRow>& rows);

// Subcommands run, eval, synth and ablate. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pedtrack
