#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mteval/core.hpp"
#include "mteval/dataset_ops.hpp"
#include "mteval/normalize.hpp"
#include "mteval/qc_stats.hpp"

namespace mteval {

enum class AnchorMode { Anchored, Observed, Auto };

struct PipelineConfig {
    std::string input;
    std::string output_dir;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    SplitRatios ratios;
    bool strict = true;
    AnchorMode anchor_mode = AnchorMode::Auto;
    bool population_std = false;
    bool welch = false;
    bool restrict_directions = true; // validate against the 21 retained directions
    int jobs = 1;
};

// key=value file, # comments, unknown keys rejected.
PipelineConfig parse_pipeline_config(std::string_view content);
PipelineConfig load_pipeline_config(const std::string& path);

struct StageCount {
    std::string stage;
    int in = 0;
    int out = 0;
    int dropped = 0;
};

struct RunManifest {
    std::string input_sha256;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    std::vector<StageCount> stages;
    ScaleAnchors anchors;
    std::string anchor_mode;
    std::string error; // set when a stage aborted the run

    std::string to_json() const;
};

// Fixed stage order: load, attach references, z-score, verdicts, filter,
// re-z-score, anchors, min-max, fold, drop single-rating, split, leakage
// filter. Writes folded.jsonl, splits.tsv, drops.tsv, verdicts.tsv, audit.tsv
// and manifest.json into the output directory. On a stage error the manifest
// of completed stages is still written before the exception propagates.
RunManifest run_pipeline(const PipelineConfig& config);

} // namespace mteval
