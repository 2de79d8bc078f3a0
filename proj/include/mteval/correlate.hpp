#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mteval/core.hpp"
#include "mteval/data_io.hpp"
#include "mteval/qc_stats.hpp"

namespace mteval {

enum class TauVariant { TauB, TauA };

// Kendall rank correlation. Tau-b (tie-corrected) by default; O(n log n).
// Returns nothing when either vector is fully tied (undefined correlation).
std::optional<double> kendall_tau(const std::vector<double>& x, const std::vector<double>& y,
                                  TauVariant variant = TauVariant::TauB);

struct CorrelateOptions {
    bool strict = true; // every gold segment must be scored by every metric
    TauVariant variant = TauVariant::TauB;
    int jobs = 1;
};

struct JoinDiagnostics {
    int unjoined_scores = 0;  // score keys with no gold segment
    int unscored_segments = 0; // gold segments missing from some metric
};

// Per-language-pair Kendall tau between each metric's scores and the folded
// gold norm_score, plus simple and count-weighted averages.
CorrelationReport correlate(const std::vector<FoldedSegment>& gold, const ScoreTable& scores,
                            const CorrelateOptions& opts = {},
                            JoinDiagnostics* diagnostics = nullptr);

// Paired t-test over the per-pair tau vectors of one metric from each report.
// Rows are matched by language pair; pairs missing a tau on either side drop.
TTestResult paired_metric_significance(const CorrelationReport& a, const std::string& metric_a,
                                       const CorrelationReport& b, const std::string& metric_b);

enum class ChallengeGroupBy { Pair, Phenomenon };

struct ChallengeGroupResult {
    std::string group;
    int n = 0;
    int correct = 0;    // score(good) > score(incorrect)
    int incorrect = 0;  // score(good) < score(incorrect)
    int ties = 0;       // counted as discordant
    double tau = 0.0;   // (correct - incorrect - ties) / n
};

// Pairwise discrimination on a challenge set: per group, tau over items where
// the metric ranks the good translation above the incorrect one.
std::vector<ChallengeGroupResult> challenge_eval(const std::vector<ChallengeItem>& items,
                                                 const ScoreTable& scores,
                                                 const std::string& metric,
                                                 ChallengeGroupBy by);

std::string challenge_to_tsv(const std::vector<ChallengeGroupResult>& results, int precision = 2);

} // namespace mteval
