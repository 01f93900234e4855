#include "pedtrack/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

#include "pedtrack/config.hpp"
#include "pedtrack/error.hpp"
#include "pedtrack/mot_io.hpp"

namespace pedtrack {

std::vector<TrackerConfig> ablation_configs(const TrackerConfig& full) {
    TrackerConfig baseline = full;
    baseline.smoothing.enabled = false;
    baseline.association.use_direction = false;
    baseline.association.use_appearance = true;
    baseline.appearance.use_fine = false;
    baseline.association.depth_staging = false;

    TrackerConfig stp = baseline;
    stp.smoothing.enabled = full.smoothing.enabled;
    stp.association.use_direction = true;

    TrackerConfig cf = stp;
    cf.appearance.use_fine = true;

    TrackerConfig da = cf;
    da.association.depth_staging = true;
    return {baseline, stp, cf, da};
}

std::vector<AblationRow> run_ablation(const SyntheticSequence& seq, const TrackerConfig& full) {
    static const char* const kNames[] = {"baseline", "+STP-DC", "+CF-ECM", "+DA"};
    const auto input = tracker_input(seq);
    std::vector<AblationRow> rows;
    const auto configs = ablation_configs(full);
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto results = run_tracker(configs[i], input);
        rows.push_back({kNames[i], evaluate(seq.gt, flatten(results))});
    }
    return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %8s %8s %6s\n", "method", "MOTA", "IDF1", "IDSW");
    out += line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-10s %8.3f %8.3f %6d\n", r.name.c_str(), 100.0 * r.metrics.mota,
                      100.0 * r.metrics.idf1, r.metrics.idsw);
        out += line;
    }
    return out;
}

namespace {

struct RunOptions {
    std::string detections;
    std::string embeddings;
    std::string config;
    std::string output;
    bool no_interpolation = false;
    std::string fusion_mode;
    bool lenient = false;
};

struct EvalOptions {
    std::string gt;
    std::string results;
    double iou_threshold = 0.5;
};

struct SynthOptions {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string out;
};

struct AblateOptions {
    std::uint64_t seed = 0;
    int agents = 20;
    int frames = 300;
    std::string config;
};

RunConfig load_run_config(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

int do_run(const RunOptions& opt, std::ostream& err) {
    RunConfig cfg = load_run_config(opt.config);
    if (opt.no_interpolation) cfg.tracker.interpolation = false;
    if (!opt.fusion_mode.empty()) cfg.tracker.association.fusion_mode = parse_fusion_mode(opt.fusion_mode);
    cfg.tracker.validate();

    const DetectionSet dets = read_detections(opt.detections, opt.lenient ? ParseMode::kLenient : ParseMode::kStrict);
    if (dets.warnings > 0) err << "warning: skipped " << dets.warnings << " detection line(s)\n";
    std::optional<EmbeddingSidecar> sidecar;
    if (!opt.embeddings.empty()) {
        sidecar = read_sidecar(opt.embeddings);
        validate_sidecar(*sidecar, dets, cfg.embedding_dim);
    }
    const auto input = tracker_input(dets, sidecar ? &*sidecar : nullptr);
    const auto results = run_tracker(cfg.tracker, input);

    std::ofstream out(opt.output, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + opt.output);
    write_results(out, results);
    out.close();
    if (!out) throw DataError("cannot write " + opt.output);
    return kExitOk;
}

int do_eval(const EvalOptions& opt, std::ostream& out) {
    const auto gt = read_tracks(opt.gt, true);
    const auto pred = read_tracks(opt.results);
    const MetricsReport report = evaluate(gt, pred, opt.iou_threshold);
    out << format_table(report) << format_key_values(report);
    return kExitOk;
}

int do_synth(const SynthOptions& opt, std::ostream& out) {
    const SyntheticSequence seq = generate(scenario_by_name(opt.scenario, opt.seed));
    write_sequence(seq, opt.out);
    out << "wrote " << opt.scenario << " (" << seq.gt.size() << " gt boxes) to " << opt.out << '\n';
    return kExitOk;
}

int do_ablate(const AblateOptions& opt, std::ostream& out) {
    const RunConfig cfg = load_run_config(opt.config);
    const SyntheticSequence seq = generate(crowd_scenario(opt.seed, opt.agents, opt.frames));
    out << format_ablation(run_ablation(seq, cfg.tracker));
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-pedestrian tracking-by-detection", "pedtrack"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "track detections and write MOT results");
    run->add_option("--detections", run_opt.detections, "MOT detection file")->required();
    run->add_option("--embeddings", run_opt.embeddings, "embedding sidecar (.rtemb or .csv)");
    run->add_option("--config", run_opt.config, "key = value config file");
    run->add_option("--output", run_opt.output, "result file")->required();
    run->add_flag("--no-interpolation", run_opt.no_interpolation, "disable tracklet interpolation");
    run->add_option("--fusion-mode", run_opt.fusion_mode, "min or weighted")
        ->check(CLI::IsMember({"min", "weighted"}));
    run->add_flag("--lenient", run_opt.lenient, "skip malformed detection lines");

    EvalOptions eval_opt;
    auto* eval = app.add_subcommand("eval", "score results against ground truth");
    eval->add_option("--gt", eval_opt.gt, "MOT ground-truth file")->required();
    eval->add_option("--results", eval_opt.results, "MOT result file")->required();
    eval->add_option("--iou-threshold", eval_opt.iou_threshold, "match threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "generate a synthetic sequence");
    synth->add_option("--scenario", synth_opt.scenario, "scenario name")
        ->required()
        ->check(CLI::IsMember(scenario_names()));
    synth->add_option("--seed", synth_opt.seed, "random seed")->capture_default_str();
    synth->add_option("--out", synth_opt.out, "output directory")->required();

    AblateOptions ablate_opt;
    auto* ablate = app.add_subcommand("ablate", "ablation grid on the crowd scenario");
    ablate->add_option("--seed", ablate_opt.seed, "random seed")->capture_default_str();
    ablate->add_option("--agents", ablate_opt.agents, "agent count")->check(CLI::PositiveNumber)->capture_default_str();
    ablate->add_option("--frames", ablate_opt.frames, "frame count")->check(CLI::Range(2, 100000))->capture_default_str();
    ablate->add_option("--config", ablate_opt.config, "key = value config file");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitUsage;
    }

    try {
        if (run->parsed()) return do_run(run_opt, err);
        if (eval->parsed()) return do_eval(eval_opt, out);
        if (synth->parsed()) return do_synth(synth_opt, out);
        if (ablate->parsed()) return do_ablate(ablate_opt, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace pedtrack
