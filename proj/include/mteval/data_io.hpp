#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mteval/core.hpp"

namespace mteval {

// Stable join key between ratings and external score files: lowercase hex
// SHA-256 over UTF-8 "src 1F tgt 1F source 1F hypothesis".
std::string segment_key(const LanguagePair& pair, std::string_view source,
                        std::string_view hypothesis);

std::string sha256_hex(std::string_view bytes);

struct LineError {
    std::size_t line = 0;
    std::string message;
};

struct LoadOptions {
    bool strict = true; // strict: any invalid line aborts; lenient: collect and skip
    // Directions accepted during validation; empty means any pair whose codes
    // are known.
    std::vector<LanguagePair> allowed_pairs = comtail_directions();
};

struct LoadReport {
    std::vector<LineError> errors;
    std::vector<std::string> warnings;
};

struct LoadResult {
    RatingSet set;
    LoadReport report;
};

// Line-delimited JSON, one RatingRecord per line. Unknown fields survive a
// load/save round-trip.
LoadResult load_ratings(const std::string& path, const LoadOptions& opts = {});
LoadResult parse_ratings(std::string_view content, const LoadOptions& opts = {});

void save_ratings(const RatingSet& rs, const std::string& path);
std::string ratings_to_jsonl(const RatingSet& rs);

struct DropReport {
    int records_dropped = 0;
    int items_dropped = 0;       // distinct (pair, source) with no gold hypothesis
    int ambiguous_sources = 0;   // sources with more than one distinct gold text
};

// Sets each record's reference to the gold-origin hypothesis rated for the
// same source in the same pair; records with no locatable gold are dropped.
std::pair<RatingSet, DropReport> attach_references(const RatingSet& rs);

// --- folded segments -------------------------------------------------------

void save_folded(const std::vector<FoldedSegment>& segs, const std::string& path);
std::string folded_to_jsonl(const std::vector<FoldedSegment>& segs);
std::vector<FoldedSegment> load_folded(const std::string& path);
std::vector<FoldedSegment> parse_folded(std::string_view content);

// --- segment items (taskgen input) -----------------------------------------

std::vector<SegmentItem> load_segment_items(const std::string& path);
std::vector<SegmentItem> parse_segment_items(std::string_view content);

// --- score files ------------------------------------------------------------

struct ScoreRow {
    std::string key;
    std::string metric;
    double score = 0.0;
};

// metric name -> (segment_key -> score)
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

ScoreTable load_scores(const std::vector<std::string>& paths);
ScoreTable parse_scores(std::string_view content);
void save_scores(const std::vector<ScoreRow>& rows, const std::string& path);
std::string scores_to_tsv(const std::vector<ScoreRow>& rows);

// --- challenge sets ----------------------------------------------------------

struct ChallengeItem {
    LanguagePair pair;
    std::string phenomenon;
    std::string source;
    std::string good_translation;
    std::string incorrect_translation;
    std::string reference;
};

std::vector<ChallengeItem> load_challenge(const std::string& path);
std::vector<ChallengeItem> parse_challenge(std::string_view content);

// --- correlation reports ------------------------------------------------------

struct CorrelationReport {
    std::vector<std::string> metrics;
    struct Row {
        LanguagePair pair;
        int count = 0;
        std::vector<std::optional<double>> taus; // one per metric, missing = NA
    };
    std::vector<Row> rows;
    std::vector<std::optional<double>> simple_avg;   // per metric
    std::vector<std::optional<double>> weighted_avg; // per metric

    int total_count() const;
};

// Recomputes the two averages from the rows. Missing cells are excluded from
// both; weights are the per-pair counts.
void finalize_report(CorrelationReport& report);

// TSV: header, one row per pair, footer rows all* (simple) and all† (weighted).
std::string report_to_tsv(const CorrelationReport& report, int precision = 2);
void emit_report(const CorrelationReport& report, const std::string& path, int precision = 2);

// Reads a report-shaped TSV of per-pair cells (src, tgt, count, metrics...)
// and rebuilds the report, recomputing averages. Footer rows are ignored.
CorrelationReport load_report_cells(const std::string& path);
CorrelationReport parse_report_cells(std::string_view content);

// --- misc --------------------------------------------------------------------

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace mteval
