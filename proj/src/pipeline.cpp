#include "mteval/pipeline.hpp"

#include <filesystem>

#include "json.hpp"

#include "mteval/data_io.hpp"

namespace mteval {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

} // namespace

PipelineConfig parse_pipeline_config(std::string_view content) {
    PipelineConfig cfg;
    bool have_input = false, have_output = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const std::size_t nl = content.find('\n', pos);
        std::string_view raw = content.substr(
            pos, nl == std::string_view::npos ? content.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
        ++line_no;
        const std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = unquote(trim(std::string_view(line).substr(eq + 1)));
        try {
            if (key == "input") {
                cfg.input = value;
                have_input = true;
            } else if (key == "output_dir") {
                cfg.output_dir = value;
                have_output = true;
            } else if (key == "alpha") {
                cfg.alpha = std::stod(value);
                if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
                    throw ValidationError("alpha must be in (0,1)");
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "ratios") {
                const std::size_t c1 = value.find(',');
                const std::size_t c2 = c1 == std::string::npos ? c1 : value.find(',', c1 + 1);
                if (c1 == std::string::npos || c2 == std::string::npos)
                    throw ValidationError("ratios must be three comma-separated numbers");
                cfg.ratios.train = std::stod(value.substr(0, c1));
                cfg.ratios.dev = std::stod(value.substr(c1 + 1, c2 - c1 - 1));
                cfg.ratios.test = std::stod(value.substr(c2 + 1));
            } else if (key == "mode") {
                if (value == "strict") cfg.strict = true;
                else if (value == "lenient") cfg.strict = false;
                else throw ValidationError("mode must be strict or lenient");
            } else if (key == "anchor_mode") {
                if (value == "anchored") cfg.anchor_mode = AnchorMode::Anchored;
                else if (value == "observed") cfg.anchor_mode = AnchorMode::Observed;
                else if (value == "auto") cfg.anchor_mode = AnchorMode::Auto;
                else throw ValidationError("anchor_mode must be anchored, observed or auto");
            } else if (key == "std") {
                if (value == "sample") cfg.population_std = false;
                else if (value == "population") cfg.population_std = true;
                else throw ValidationError("std must be sample or population");
            } else if (key == "discernment_variance") {
                if (value == "pooled") cfg.welch = false;
                else if (value == "welch") cfg.welch = true;
                else throw ValidationError("discernment_variance must be pooled or welch");
            } else if (key == "directions") {
                if (value == "comtail") cfg.restrict_directions = true;
                else if (value == "any") cfg.restrict_directions = false;
                else throw ValidationError("directions must be comtail or any");
            } else if (key == "jobs") {
                cfg.jobs = std::stoi(value);
            } else {
                throw ValidationError("unknown config key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw ValidationError("config line " + std::to_string(line_no) + ": bad value for " +
                                  key);
        }
    }
    if (!have_input) throw ValidationError("config is missing 'input'");
    if (!have_output) throw ValidationError("config is missing 'output_dir'");
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    return parse_pipeline_config(read_file(path));
}

std::string RunManifest::to_json() const {
    json j;
    j["input_sha256"] = input_sha256;
    j["seed"] = seed;
    j["alpha"] = alpha;
    json stages_json = json::array();
    for (const auto& s : stages) {
        json e;
        e["stage"] = s.stage;
        e["in"] = s.in;
        e["out"] = s.out;
        e["dropped"] = s.dropped;
        stages_json.push_back(e);
    }
    j["stages"] = stages_json;
    if (!anchor_mode.empty()) {
        j["anchors"] = {{"z_min", anchors.z_min}, {"z_max", anchors.z_max}, {"mode", anchor_mode}};
    }
    if (!error.empty()) j["error"] = error;
    return j.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    const auto out_path = [&](const char* name) {
        return (fs::path(config.output_dir) / name).string();
    };

    RunManifest manifest;
    manifest.seed = config.seed;
    manifest.alpha = config.alpha;
    const auto stage = [&](const std::string& name, int in, int out) {
        manifest.stages.push_back({name, in, out, in - out});
    };
    const auto flush_manifest = [&] { write_file(out_path("manifest.json"), manifest.to_json()); };

    try {
        const std::string raw = read_file(config.input);
        manifest.input_sha256 = sha256_hex(raw);

        LoadOptions load_opts;
        load_opts.strict = config.strict;
        if (!config.restrict_directions) load_opts.allowed_pairs.clear();
        LoadResult loaded = parse_ratings(raw, load_opts);
        const int parsed_lines =
            static_cast<int>(loaded.set.size() + loaded.report.errors.size());
        stage("load", parsed_lines, static_cast<int>(loaded.set.size()));

        auto [with_refs, drop_report] = attach_references(loaded.set);
        stage("attach_references", static_cast<int>(loaded.set.size()),
              static_cast<int>(with_refs.size()));

        ZScoreOptions zopts;
        zopts.population_std = config.population_std;
        zopts.jobs = config.jobs;
        RatingSet standardized = zscore_by_rater(with_refs, zopts);
        stage("zscore", static_cast<int>(with_refs.size()), static_cast<int>(standardized.size()));

        VerdictOptions vopts;
        vopts.alpha = config.alpha;
        vopts.welch = config.welch;
        vopts.jobs = config.jobs;
        const std::vector<RaterVerdict> verdicts = rater_verdicts(standardized, vopts);
        write_file(out_path("verdicts.tsv"), verdicts_to_tsv(verdicts));
        stage("verdicts", static_cast<int>(standardized.size()),
              static_cast<int>(standardized.size()));

        auto [filtered, audit] = filter_ratings(standardized, verdicts);
        write_file(out_path("audit.tsv"), audit.to_tsv());
        stage("filter", audit.input_records, audit.output_records);

        // Scores kept after filtering are re-standardized before anchoring.
        RatingSet restandardized = zscore_by_rater(filtered, zopts);
        stage("re_zscore", static_cast<int>(filtered.size()),
              static_cast<int>(restandardized.size()));

        ScaleAnchors anchors;
        std::string anchor_mode_used;
        switch (config.anchor_mode) {
        case AnchorMode::Anchored:
            anchors = compute_anchors(restandardized);
            anchor_mode_used = "anchored";
            break;
        case AnchorMode::Observed:
            anchors = observed_anchors(restandardized);
            anchor_mode_used = "observed";
            break;
        case AnchorMode::Auto:
            try {
                anchors = compute_anchors(restandardized);
                anchor_mode_used = "anchored";
            } catch (const ValidationError&) {
                anchors = observed_anchors(restandardized);
                anchor_mode_used = "observed";
            }
            break;
        }
        manifest.anchors = anchors;
        manifest.anchor_mode = anchor_mode_used;
        stage("anchors", static_cast<int>(restandardized.size()),
              static_cast<int>(restandardized.size()));

        RatingSet normalized = apply_minmax(restandardized, anchors);
        stage("minmax", static_cast<int>(restandardized.size()),
              static_cast<int>(normalized.size()));

        std::vector<FoldedSegment> folded = fold(normalized);
        stage("fold", static_cast<int>(normalized.size()), static_cast<int>(folded.size()));

        std::vector<FoldedSegment> kept;
        kept.reserve(folded.size());
        for (auto& s : folded) {
            if (s.n_ratings >= 2) kept.push_back(std::move(s));
        }
        stage("drop_single_rating", static_cast<int>(folded.size()),
              static_cast<int>(kept.size()));
        save_folded(kept, out_path("folded.jsonl"));

        SplitResult sr = split_segments(kept, config.ratios, config.seed);
        stage("split", static_cast<int>(kept.size()), static_cast<int>(kept.size()));
        stage("leakage_filter", static_cast<int>(kept.size()),
              static_cast<int>(kept.size() - sr.drops.size()));
        write_file(out_path("splits.tsv"), split_manifest_tsv(kept, sr.assignment));
        write_file(out_path("drops.tsv"), drops_tsv(kept, sr.drops));

        flush_manifest();
        return manifest;
    } catch (const std::exception& e) {
        manifest.error = e.what();
        flush_manifest();
        throw;
    }
}

} // namespace mteval
