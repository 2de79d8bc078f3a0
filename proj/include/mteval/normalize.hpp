#pragma once

#include <vector>

#include "mteval/core.hpp"

namespace mteval {

struct ScaleAnchors {
    double z_min = 0.0;
    double z_max = 1.0;
};

struct ZScoreOptions {
    bool population_std = false; // default: sample (n-1) standard deviation
    int jobs = 1;
};

// Standardizes raw scores per (language pair, rater). Raters with zero spread
// get z = 0 for all their items; a rater with a single rating is an error.
RatingSet zscore_by_rater(const RatingSet& rs, const ZScoreOptions& opts = {});

// Anchors from unanimously-scored items: z_min is the mean z over items whose
// every raw rating is 1, z_max the same for 100. Errors when either pool is
// empty; callers on non-COMTAIL-shaped data should use observed_anchors.
ScaleAnchors compute_anchors(const RatingSet& rs);

// Fallback: plain min/max over all observed z-scores.
ScaleAnchors observed_anchors(const RatingSet& rs);

// (z - z_min) / (z_max - z_min), clipped to [0, 1].
double minmax_clip(double z, const ScaleAnchors& anchors);

// Applies minmax_clip to every record's z.
RatingSet apply_minmax(const RatingSet& rs, const ScaleAnchors& anchors);

// Groups by (pair, source, hypothesis) and aggregates scores across raters.
// Output is ordered by segment_key. Conflicting metadata inside a group is an
// error naming the offenders.
std::vector<FoldedSegment> fold(const RatingSet& rs);

} // namespace mteval
