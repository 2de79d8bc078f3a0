#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mteval/core.hpp"

namespace mteval {

struct TTestResult {
    double t_stat = 0.0;
    double df = 0.0;
    double p_two_tailed = 1.0;
    int n_a = 0;
    int n_b = 0;
};

// Two-tailed survival function P(|T_df| >= |t|) via the regularized
// incomplete beta function.
double student_t_sf(double t, double df);

// Regularized incomplete beta I_x(a, b); exposed for reuse and testing.
double incomplete_beta(double a, double b, double x);

// Related-samples t-test on paired scores. Zero-variance differences give the
// limit values: p = 1 when the mean difference is also zero, p = 0 otherwise.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

// Two-sample t-test. Pooled (equal-variance) by default; Welch optional.
TTestResult independent_t_test(const std::vector<double>& a, const std::vector<double>& b,
                               bool welch = false);

struct QcCounts {
    int good_original = 0;
    int bad_original = 0;
    int good_repeat = 0;
    int bad_repeat = 0;
    int matched_bad_pairs = 0;
};

struct RaterVerdict {
    std::string rater_id;
    bool consistent = true;
    bool discerning = true;
    bool exempt_discernment = false;
    // Too few QC observations leave a test untestable; such raters are kept
    // and flagged rather than dropped.
    bool consistency_tested = false;
    bool discernment_tested = false;
    double p_consistency = std::numeric_limits<double>::quiet_NaN();
    double p_discernment = std::numeric_limits<double>::quiet_NaN();
    QcCounts n_qc_items;
};

struct VerdictOptions {
    double alpha = 0.05;
    bool welch = false;
    int jobs = 1;
};

// Per-rater consistency and discernment verdicts from the QC items.
// Consistency pairs bad qc_original scores with their qc_repeat (matched by
// rater and item_id); discernment compares original good vs bad scores.
// Raters whose targets are all exempt pass discernment unconditionally.
std::vector<RaterVerdict> rater_verdicts(const RatingSet& rs, const VerdictOptions& opts = {});

struct AuditStage {
    std::string stage;
    int raters_removed = 0;
    int records_removed = 0;
};

struct AuditReport {
    int input_records = 0;
    int output_records = 0;
    std::vector<AuditStage> stages;

    std::string to_tsv() const;
};

// Removes records of inconsistent raters, then of non-discerning non-exempt
// raters, then whole items left with fewer than two ratings, in that order.
std::pair<RatingSet, AuditReport> filter_ratings(const RatingSet& rs,
                                                 const std::vector<RaterVerdict>& verdicts);

std::string verdicts_to_tsv(const std::vector<RaterVerdict>& verdicts);

} // namespace mteval
