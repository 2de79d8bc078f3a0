#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mteval/core.hpp"
#include "mteval/data_io.hpp"

namespace mteval {

// Sentence BLEU in [0,1]: modified n-gram precisions up to order 4 (capped at
// the hypothesis length), exponentially smoothed for zero higher-order counts,
// times the brevity penalty. Whitespace tokenization.
double sentence_bleu(std::string_view hyp, std::string_view ref);

// Translation edit rate >= 0: (insertions + deletions + substitutions +
// shifts) / reference length, with a greedy shift search. Lower is better.
double ter(std::string_view hyp, std::string_view ref);

// Character n-gram F-score in [0,100] over orders 1..6, whitespace removed,
// arithmetic-averaged precisions and recalls.
double chrf(std::string_view hyp, std::string_view ref, double beta = 2.0);

// Word-level Levenshtein distance (no shifts); used by TER and handy on its own.
int word_levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct ScoreOptions {
    bool bleu = true;
    bool ter = true;
    bool chrf = true;
    bool negate_ter = false; // flips TER sign so higher-is-better holds everywhere
    int jobs = 1;
};

// Scores hypothesis vs reference for every folded segment. Output rows are
// ordered segment-major, metric-minor and independent of the jobs setting.
std::vector<ScoreRow> score_surface(const std::vector<FoldedSegment>& segments,
                                    const ScoreOptions& opts = {});

} // namespace mteval
