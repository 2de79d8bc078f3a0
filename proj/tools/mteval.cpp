#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mteval/correlate.hpp"
#include "mteval/data_io.hpp"
#include "mteval/dataset_ops.hpp"
#include "mteval/normalize.hpp"
#include "mteval/perturb.hpp"
#include "mteval/pipeline.hpp"
#include "mteval/qc_stats.hpp"
#include "mteval/surface_metrics.hpp"
#include "mteval/taskgen.hpp"

namespace {

using namespace mteval;

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        write_file(out_path, content);
    }
}

std::uint64_t seed_or_warn(const CLI::Option* opt, std::uint64_t seed) {
    if (opt->count() == 0) {
        std::cerr << "warning: --seed not given, using deterministic default 0\n";
    }
    return seed;
}

void print_load_report(const LoadReport& report) {
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& e : report.errors) {
        std::cerr << "rejected line " << e.line << ": " << e.message << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"batch toolkit for MT human-ratings QC, dataset construction, "
                 "surface metrics and segment-level metric evaluation"};
    app.require_subcommand(1);

    // --- ingest ---
    auto* ingest = app.add_subcommand("ingest", "validate a ratings file and rewrite it");
    std::string in_path, out_path, report_path;
    bool lenient = false, any_pair = false, do_attach = false;
    ingest->add_option("--input", in_path, "ratings JSONL")->required();
    ingest->add_option("--out", out_path, "validated ratings JSONL")->required();
    ingest->add_option("--error-report", report_path, "write rejected lines TSV here");
    ingest->add_flag("--lenient", lenient, "collect invalid lines instead of aborting");
    ingest->add_flag("--any-pair", any_pair, "accept any direction with known codes");
    ingest->add_flag("--attach-references", do_attach, "attach gold references, drop orphans");
    ingest->callback([&] {
        LoadOptions opts;
        opts.strict = !lenient;
        if (any_pair) opts.allowed_pairs.clear();
        LoadResult r = load_ratings(in_path, opts);
        print_load_report(r.report);
        if (!report_path.empty()) {
            std::ostringstream os;
            os << "line\tmessage\n";
            for (const auto& e : r.report.errors) os << e.line << '\t' << e.message << '\n';
            write_file(report_path, os.str());
        }
        if (do_attach) {
            auto [attached, drop] = attach_references(r.set);
            std::cerr << "references: dropped " << drop.records_dropped << " records ("
                      << drop.items_dropped << " items) without a gold reference\n";
            if (drop.ambiguous_sources > 0) {
                std::cerr << "references: " << drop.ambiguous_sources
                          << " sources had multiple distinct gold texts\n";
            }
            save_ratings(attached, out_path);
        } else {
            save_ratings(r.set, out_path);
        }
    });

    // --- qc ---
    auto* qc = app.add_subcommand("qc", "rater verdicts, audit and filtering");
    std::string qc_in, qc_verdicts, qc_audit, qc_filtered;
    double alpha = 0.05;
    bool welch = false;
    int jobs = 1;
    qc->add_option("--input", qc_in, "ratings JSONL")->required();
    qc->add_option("--alpha", alpha, "significance level (default 0.05)");
    qc->add_option("--verdicts", qc_verdicts, "verdicts TSV output");
    qc->add_option("--audit", qc_audit, "audit TSV output");
    qc->add_option("--write-filtered", qc_filtered, "filtered ratings JSONL output");
    qc->add_flag("--welch", welch, "Welch instead of pooled-variance discernment test");
    qc->add_option("--jobs", jobs, "worker threads (default 1)");
    qc->callback([&] {
        LoadResult r = load_ratings(qc_in, {});
        print_load_report(r.report);
        VerdictOptions vopts;
        vopts.alpha = alpha;
        vopts.welch = welch;
        vopts.jobs = jobs;
        const auto verdicts = rater_verdicts(r.set, vopts);
        if (!qc_verdicts.empty()) write_file(qc_verdicts, verdicts_to_tsv(verdicts));
        auto [filtered, audit] = filter_ratings(r.set, verdicts);
        if (qc_audit.empty()) {
            std::cout << audit.to_tsv();
        } else {
            write_file(qc_audit, audit.to_tsv());
        }
        if (!qc_filtered.empty()) save_ratings(filtered, qc_filtered);
    });

    // --- normalize ---
    auto* normalize = app.add_subcommand("normalize", "per-rater z-scores and min-max scaling");
    std::string nz_in, nz_out, nz_anchor_mode = "auto";
    bool population_std = false;
    normalize->add_option("--input", nz_in, "ratings JSONL")->required();
    normalize->add_option("--out", nz_out, "ratings JSONL with z and norm_score")->required();
    normalize->add_option("--anchor-mode", nz_anchor_mode, "anchored|observed|auto");
    normalize->add_flag("--population-std", population_std, "population instead of sample std");
    normalize->add_option("--jobs", jobs, "worker threads (default 1)");
    normalize->callback([&] {
        LoadResult r = load_ratings(nz_in, {});
        print_load_report(r.report);
        ZScoreOptions zopts;
        zopts.population_std = population_std;
        zopts.jobs = jobs;
        RatingSet z = zscore_by_rater(r.set, zopts);
        ScaleAnchors anchors;
        if (nz_anchor_mode == "anchored") {
            anchors = compute_anchors(z);
        } else if (nz_anchor_mode == "observed") {
            anchors = observed_anchors(z);
        } else if (nz_anchor_mode == "auto") {
            try {
                anchors = compute_anchors(z);
            } catch (const ValidationError&) {
                anchors = observed_anchors(z);
            }
        } else {
            throw ValidationError("--anchor-mode must be anchored, observed or auto");
        }
        std::cerr << "anchors: z_min=" << anchors.z_min << " z_max=" << anchors.z_max << '\n';
        save_ratings(apply_minmax(z, anchors), nz_out);
    });

    // --- fold ---
    auto* fold_cmd = app.add_subcommand("fold", "aggregate to unique segments");
    std::string fold_in, fold_out;
    fold_cmd->add_option("--input", fold_in, "normalized ratings JSONL")->required();
    fold_cmd->add_option("--out", fold_out, "folded segments JSONL")->required();
    fold_cmd->callback([&] {
        LoadResult r = load_ratings(fold_in, {});
        print_load_report(r.report);
        save_folded(fold(r.set), fold_out);
    });

    // --- split ---
    auto* split_cmd = app.add_subcommand("split", "train/dev/test split with leakage filter");
    std::string split_in, split_out, split_drops, ratio_text = "0.9,0.05,0.05";
    std::uint64_t seed = 0;
    split_cmd->add_option("--folded", split_in, "folded segments JSONL")->required();
    split_cmd->add_option("--out", split_out, "split manifest TSV")->required();
    split_cmd->add_option("--drops", split_drops, "leakage drop ledger TSV");
    split_cmd->add_option("--ratios", ratio_text, "train,dev,test (default 0.9,0.05,0.05)");
    auto* split_seed = split_cmd->add_option("--seed", seed, "random seed (default 0)");
    split_cmd->callback([&] {
        const auto segments = load_folded(split_in);
        SplitRatios ratios;
        const std::size_t c1 = ratio_text.find(',');
        const std::size_t c2 = c1 == std::string::npos ? c1 : ratio_text.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ValidationError("--ratios must be three comma-separated numbers");
        ratios.train = std::stod(ratio_text.substr(0, c1));
        ratios.dev = std::stod(ratio_text.substr(c1 + 1, c2 - c1 - 1));
        ratios.test = std::stod(ratio_text.substr(c2 + 1));
        SplitResult sr = split_segments(segments, ratios, seed_or_warn(split_seed, seed));
        for (const auto& w : sr.warnings) std::cerr << "warning: " << w << '\n';
        write_file(split_out, split_manifest_tsv(segments, sr.assignment));
        if (!split_drops.empty()) write_file(split_drops, drops_tsv(segments, sr.drops));
    });

    // --- ablate ---
    auto* ablate_cmd = app.add_subcommand("ablate", "filter a split by an ablation spec");
    std::string ab_in, ab_splits, ab_spec_text, ab_out;
    bool nested = false;
    ablate_cmd->add_option("--folded", ab_in, "folded segments JSONL")->required();
    ablate_cmd->add_option("--splits", ab_splits, "split manifest TSV")->required();
    ablate_cmd->add_option("--ablate", ab_spec_text, "key=value spec")->required();
    ablate_cmd->add_option("--out", ab_out, "ablated split manifest TSV")->required();
    ablate_cmd->add_flag("--nested", nested, "nest volume subsets inside each other");
    auto* ab_seed = ablate_cmd->add_option("--seed", seed, "random seed (default 0)");
    ablate_cmd->callback([&] {
        const auto segments = load_folded(ab_in);
        // read the manifest back into an assignment
        const std::string manifest = read_file(ab_splits);
        std::map<std::string, Split> by_key;
        std::istringstream is(manifest);
        std::string line;
        bool header = true;
        while (std::getline(is, line)) {
            if (header) {
                header = false;
                continue;
            }
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) throw ValidationError("bad split manifest line");
            const std::string key = line.substr(0, tab);
            const std::string name = line.substr(tab + 1);
            Split s;
            if (name == "train") s = Split::Train;
            else if (name == "dev") s = Split::Dev;
            else if (name == "test") s = Split::Test;
            else throw ValidationError("bad split name: " + name);
            by_key[key] = s;
        }
        std::vector<Split> assignment(segments.size(), Split::Excluded);
        for (std::size_t i = 0; i < segments.size(); ++i) {
            const auto it = by_key.find(
                segment_key(segments[i].pair, segments[i].source, segments[i].hypothesis));
            if (it != by_key.end()) assignment[i] = it->second;
        }
        AblationSpec spec = parse_ablation_spec(ab_spec_text);
        spec.nested = nested;
        const auto ablated = ablate(segments, assignment, spec, seed_or_warn(ab_seed, seed));
        write_file(ab_out, split_manifest_tsv(segments, ablated));
    });

    // --- perturb ---
    auto* perturb_cmd = app.add_subcommand("perturb", "degrade sentences (one per input line)");
    std::string pt_in, pt_out, pt_lexicon, pt_mode = "single";
    perturb_cmd->add_option("--input", pt_in, "sentences, one per line")->required();
    perturb_cmd->add_option("--out", pt_out, "TSV: perturbed<TAB>types");
    perturb_cmd->add_option("--mode", pt_mode, "single|double (default single)");
    perturb_cmd->add_option("--lexicon", pt_lexicon, "synonym lexicon TSV");
    auto* pt_seed = perturb_cmd->add_option("--seed", seed, "random seed (default 0)");
    perturb_cmd->callback([&] {
        if (pt_mode != "single" && pt_mode != "double")
            throw ValidationError("--mode must be single or double");
        Lexicon lex;
        const Lexicon* lex_ptr = nullptr;
        if (!pt_lexicon.empty()) {
            lex = Lexicon::from_file(pt_lexicon);
            lex_ptr = &lex;
        }
        const std::uint64_t base_seed = seed_or_warn(pt_seed, seed);
        const std::string content = read_file(pt_in);
        std::ostringstream os;
        std::istringstream is(content);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            Rng rng(derive_seed(base_seed, "perturb:" + std::to_string(line_no)));
            const PerturbResult r = pt_mode == "single" ? perturb_once(line, lex_ptr, rng)
                                                        : perturb_multiple(line, lex_ptr, rng);
            os << r.sentence << '\t';
            for (std::size_t i = 0; i < r.steps.size(); ++i) {
                if (i) os << '+';
                os << perturb_type_name(r.steps[i].type);
            }
            os << '\n';
        }
        emit(pt_out, os.str());
    });

    // --- taskgen ---
    auto* taskgen_cmd = app.add_subcommand("taskgen", "assemble 44-slot rating task files");
    std::string tg_items, tg_qc, tg_dir;
    taskgen_cmd->add_option("--items", tg_items, "segment items JSONL")->required();
    taskgen_cmd->add_option("--qc-pool", tg_qc, "QC candidate items JSONL")->required();
    taskgen_cmd->add_option("--out-dir", tg_dir, "directory for task files")->required();
    auto* tg_seed = taskgen_cmd->add_option("--seed", seed, "random seed (default 0)");
    taskgen_cmd->callback([&] {
        const auto items = load_segment_items(tg_items);
        const auto qc_pool = load_segment_items(tg_qc);
        const auto files = build_task_files(items, qc_pool, seed_or_warn(tg_seed, seed));
        std::filesystem::create_directories(tg_dir);
        for (const auto& f : files) {
            write_file((std::filesystem::path(tg_dir) / (f.file_id + ".jsonl")).string(),
                       task_file_to_jsonl(f));
        }
        std::cerr << "wrote " << files.size() << " task files\n";
    });

    // --- score-surface ---
    auto* score_cmd = app.add_subcommand("score-surface", "BLEU/TER/chrF2 over folded segments");
    std::string sc_in, sc_out, sc_metrics = "bleu,ter,chrf2";
    bool negate_ter = false;
    score_cmd->add_option("--folded", sc_in, "folded segments JSONL")->required();
    score_cmd->add_option("--out", sc_out, "score file TSV")->required();
    score_cmd->add_option("--metrics", sc_metrics, "comma list of bleu,ter,chrf2");
    score_cmd->add_flag("--negate-ter", negate_ter, "emit -TER so higher is better");
    score_cmd->add_option("--jobs", jobs, "worker threads (default 1)");
    score_cmd->callback([&] {
        const auto segments = load_folded(sc_in);
        ScoreOptions opts;
        opts.bleu = sc_metrics.find("bleu") != std::string::npos;
        opts.ter = sc_metrics.find("ter") != std::string::npos;
        opts.chrf = sc_metrics.find("chrf") != std::string::npos;
        opts.negate_ter = negate_ter;
        opts.jobs = jobs;
        save_scores(score_surface(segments, opts), sc_out);
    });

    // --- correlate ---
    auto* corr_cmd = app.add_subcommand("correlate", "per-pair Kendall tau vs human scores");
    std::string co_gold, co_out, co_significance;
    std::vector<std::string> co_scores;
    int precision = 2;
    bool co_lenient = false, tau_a = false;
    corr_cmd->add_option("--gold", co_gold, "folded segments JSONL")->required();
    corr_cmd->add_option("--scores", co_scores, "score file TSV (repeatable)")
        ->required()
        ->expected(-1);
    corr_cmd->add_option("--out", co_out, "report TSV (default stdout)");
    corr_cmd->add_option("--precision", precision, "decimals in the report (default 2)");
    corr_cmd->add_flag("--lenient", co_lenient, "correlate on the joined subset");
    corr_cmd->add_flag("--tau-a", tau_a, "tau-a instead of tau-b");
    corr_cmd->add_option("--significance", co_significance,
                         "metricA,metricB: paired t-test over per-pair taus");
    corr_cmd->add_option("--jobs", jobs, "worker threads (default 1)");
    corr_cmd->callback([&] {
        const auto gold = load_folded(co_gold);
        const auto scores = load_scores(co_scores);
        CorrelateOptions opts;
        opts.strict = !co_lenient;
        opts.variant = tau_a ? TauVariant::TauA : TauVariant::TauB;
        opts.jobs = jobs;
        JoinDiagnostics diag;
        const CorrelationReport report = correlate(gold, scores, opts, &diag);
        if (diag.unjoined_scores > 0) {
            std::cerr << "warning: " << diag.unjoined_scores
                      << " scores had no matching gold segment\n";
        }
        emit(co_out, report_to_tsv(report, precision));
        if (!co_significance.empty()) {
            const auto comma = co_significance.find(',');
            if (comma == std::string::npos)
                throw ValidationError("--significance needs metricA,metricB");
            const TTestResult t =
                paired_metric_significance(report, co_significance.substr(0, comma), report,
                                           co_significance.substr(comma + 1));
            std::fprintf(stderr, "paired t-test %s: t=%.4f df=%.0f p=%.6g\n",
                         co_significance.c_str(), t.t_stat, t.df, t.p_two_tailed);
        }
    });

    // --- challenge ---
    auto* ch_cmd = app.add_subcommand("challenge", "pairwise discrimination on a challenge set");
    std::string ch_set, ch_out, ch_metric, ch_by = "pair";
    std::vector<std::string> ch_scores;
    ch_cmd->add_option("--set", ch_set, "challenge items JSONL")->required();
    ch_cmd->add_option("--scores", ch_scores, "score file TSV (repeatable)")
        ->required()
        ->expected(-1);
    ch_cmd->add_option("--metric", ch_metric, "metric name in the score file");
    ch_cmd->add_option("--by", ch_by, "pair|phenomenon (default pair)");
    ch_cmd->add_option("--out", ch_out, "TSV output (default stdout)");
    ch_cmd->add_option("--precision", precision, "decimals (default 2)");
    ch_cmd->callback([&] {
        const auto items = load_challenge(ch_set);
        const auto scores = load_scores(ch_scores);
        std::string metric = ch_metric;
        if (metric.empty()) {
            if (scores.size() != 1)
                throw ValidationError("--metric is required when the score file has several");
            metric = scores.begin()->first;
        }
        ChallengeGroupBy by;
        if (ch_by == "pair") by = ChallengeGroupBy::Pair;
        else if (ch_by == "phenomenon") by = ChallengeGroupBy::Phenomenon;
        else throw ValidationError("--by must be pair or phenomenon");
        emit(ch_out, challenge_to_tsv(challenge_eval(items, scores, metric, by), precision));
    });

    // --- pipeline ---
    auto* pipe_cmd = app.add_subcommand("pipeline", "run the full processing chain");
    std::string pipe_config;
    pipe_cmd->add_option("--config", pipe_config, "key=value config file")->required();
    pipe_cmd->callback([&] {
        const RunManifest manifest = run_pipeline(load_pipeline_config(pipe_config));
        std::cerr << "pipeline complete: " << manifest.stages.size() << " stages\n";
    });

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "recompute averages for tau cells");
    std::string rp_cells, rp_out;
    report_cmd->add_option("--cells", rp_cells, "TSV: src tgt count metric...")->required();
    report_cmd->add_option("--out", rp_out, "report TSV (default stdout)");
    report_cmd->add_option("--precision", precision, "decimals (default 2)");
    report_cmd->callback([&] { emit(rp_out, report_to_tsv(load_report_cells(rp_cells), precision)); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        std::cerr << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::Sub);
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mteval::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const mteval::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
