#include "mteval/qc_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "mteval/parallel.hpp"

namespace mteval {

namespace {

// Continued fraction for the incomplete beta function, modified Lentz scheme.
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h; // converged to machine precision for all practical (a, b, x)
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

TTestResult degenerate(double mean_diff, int n_a, int n_b, double df) {
    TTestResult r;
    r.n_a = n_a;
    r.n_b = n_b;
    r.df = df;
    if (mean_diff == 0.0) {
        r.t_stat = 0.0;
        r.p_two_tailed = 1.0;
    } else {
        r.t_stat = mean_diff > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
        r.p_two_tailed = 0.0;
    }
    return r;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("incomplete_beta: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw ValidationError("incomplete_beta: x must be in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
    if (!std::isfinite(df) || df <= 0.0) throw ValidationError("student_t_sf: df must be positive");
    if (std::isnan(t)) throw ValidationError("student_t_sf: t is NaN");
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    const double x = df / (df + t * t);
    return incomplete_beta(df / 2.0, 0.5, x);
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("paired_t_test: length mismatch");
    const int n = static_cast<int>(a.size());
    if (n < 2) throw ValidationError("paired_t_test: need at least 2 pairs");

    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double md = mean_of(d);
    const double var = sample_var(d, md);
    if (var == 0.0) return degenerate(md, n, n, n - 1.0);

    TTestResult r;
    r.n_a = r.n_b = n;
    r.df = n - 1.0;
    r.t_stat = md / std::sqrt(var / n);
    r.p_two_tailed = student_t_sf(r.t_stat, r.df);
    return r;
}

TTestResult independent_t_test(const std::vector<double>& a, const std::vector<double>& b,
                               bool welch) {
    const int na = static_cast<int>(a.size());
    const int nb = static_cast<int>(b.size());
    if (na < 2 || nb < 2) throw ValidationError("independent_t_test: need at least 2 per group");

    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = sample_var(a, ma);
    const double vb = sample_var(b, mb);

    if (va == 0.0 && vb == 0.0) return degenerate(ma - mb, na, nb, na + nb - 2.0);

    TTestResult r;
    r.n_a = na;
    r.n_b = nb;
    if (welch) {
        const double sa = va / na;
        const double sb = vb / nb;
        r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
        r.t_stat = (ma - mb) / std::sqrt(sa + sb);
    } else {
        const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        r.df = na + nb - 2.0;
        r.t_stat = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    }
    r.p_two_tailed = student_t_sf(r.t_stat, r.df);
    return r;
}

std::vector<RaterVerdict> rater_verdicts(const RatingSet& rs, const VerdictOptions& opts) {
    struct BadQcPair {
        std::optional<double> original;
        std::optional<double> repeat;
    };
    struct RaterData {
        std::vector<double> good_orig;
        std::vector<double> bad_orig;
        std::map<std::string, BadQcPair> bad_by_item; // item_id keyed
        QcCounts counts;
        std::set<std::string> targets;
    };

    std::map<std::string, RaterData> by_rater; // ordered for deterministic output
    for (const auto& rec : rs.records) {
        auto& rd = by_rater[rec.rater_id];
        rd.targets.insert(rec.pair.tgt);
        if (rec.qc_role == QcRole::None) continue;
        if (!rec.qc_quality.has_value())
            throw ValidationError("QC record without qc_quality (item " + rec.item_id + ")");
        const bool bad = *rec.qc_quality == QcQuality::Bad;
        const double score = rec.raw_score;
        if (rec.qc_role == QcRole::Original) {
            if (bad) {
                rd.counts.bad_original++;
                rd.bad_orig.push_back(score);
                rd.bad_by_item[rec.item_id].original = score;
            } else {
                rd.counts.good_original++;
                rd.good_orig.push_back(score);
            }
        } else {
            if (bad) {
                rd.counts.bad_repeat++;
                rd.bad_by_item[rec.item_id].repeat = score;
            } else {
                rd.counts.good_repeat++;
            }
        }
    }

    std::vector<std::pair<std::string, const RaterData*>> order;
    order.reserve(by_rater.size());
    for (const auto& [id, rd] : by_rater) order.emplace_back(id, &rd);

    std::vector<RaterVerdict> verdicts(order.size());
    parallel_for(order.size(), opts.jobs, [&](std::size_t i) {
        const auto& [id, rd] = order[i];
        RaterVerdict v;
        v.rater_id = id;
        v.n_qc_items = rd->counts;

        // Consistency: paired test on bad originals vs their matched repeats.
        // Unmatched repeats and originals without a repeat are ignored.
        std::vector<double> orig, rep;
        for (const auto& [item, pr] : rd->bad_by_item) {
            if (pr.original && pr.repeat) {
                orig.push_back(*pr.original);
                rep.push_back(*pr.repeat);
            }
        }
        v.n_qc_items.matched_bad_pairs = static_cast<int>(orig.size());
        if (orig.size() >= 2) {
            const TTestResult t = paired_t_test(orig, rep);
            v.consistency_tested = true;
            v.p_consistency = t.p_two_tailed;
            v.consistent = !(t.p_two_tailed < opts.alpha);
        }

        // Discernment: independent test, original good vs original bad scores
        // (repeats ignored). Rejecting H0 means the rater separates the two.
        v.exempt_discernment = !rd->targets.empty() &&
                               std::all_of(rd->targets.begin(), rd->targets.end(),
                                           [](const std::string& t) { return is_exempt_target(t); });
        if (rd->good_orig.size() >= 2 && rd->bad_orig.size() >= 2) {
            const TTestResult t = independent_t_test(rd->good_orig, rd->bad_orig, opts.welch);
            v.discernment_tested = true;
            v.p_discernment = t.p_two_tailed;
            v.discerning = t.p_two_tailed < opts.alpha;
        }
        if (v.exempt_discernment) v.discerning = true;

        verdicts[i] = v;
    });
    return verdicts;
}

std::pair<RatingSet, AuditReport> filter_ratings(const RatingSet& rs,
                                                 const std::vector<RaterVerdict>& verdicts) {
    AuditReport report;
    report.input_records = static_cast<int>(rs.size());

    std::set<std::string> inconsistent, nondiscerning, known;
    for (const auto& v : verdicts) {
        known.insert(v.rater_id);
        if (!v.consistent) inconsistent.insert(v.rater_id);
        else if (!v.discerning && !v.exempt_discernment) nondiscerning.insert(v.rater_id);
    }
    for (const auto& rec : rs.records) {
        if (!known.count(rec.rater_id))
            throw ValidationError("verdicts do not cover rater " + rec.rater_id);
    }

    RatingSet stage1;
    for (const auto& rec : rs.records) {
        if (!inconsistent.count(rec.rater_id)) stage1.records.push_back(rec);
    }
    report.stages.push_back({"consistency", static_cast<int>(inconsistent.size()),
                             static_cast<int>(rs.size() - stage1.size())});

    RatingSet stage2;
    for (const auto& rec : stage1.records) {
        if (!nondiscerning.count(rec.rater_id)) stage2.records.push_back(rec);
    }
    report.stages.push_back({"discernment", static_cast<int>(nondiscerning.size()),
                             static_cast<int>(stage1.size() - stage2.size())});

    // Items (unique pair+source+hypothesis) left with fewer than two ratings.
    std::map<std::tuple<std::string, std::string, std::string, std::string>, int> counts;
    for (const auto& rec : stage2.records) {
        counts[{rec.pair.src, rec.pair.tgt, rec.source, rec.hypothesis}]++;
    }
    RatingSet stage3;
    for (const auto& rec : stage2.records) {
        if (counts[{rec.pair.src, rec.pair.tgt, rec.source, rec.hypothesis}] >= 2)
            stage3.records.push_back(rec);
    }
    report.stages.push_back({"single_rating", 0, static_cast<int>(stage2.size() - stage3.size())});

    report.output_records = static_cast<int>(stage3.size());
    return {std::move(stage3), report};
}

std::string AuditReport::to_tsv() const {
    std::ostringstream os;
    os << "stage\traters_removed\titems_removed\tpct_of_input\n";
    for (const auto& s : stages) {
        const double pct =
            input_records > 0 ? 100.0 * s.records_removed / input_records : 0.0;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", pct);
        os << s.stage << '\t' << s.raters_removed << '\t' << s.records_removed << '\t' << buf
           << '\n';
    }
    return os.str();
}

std::string verdicts_to_tsv(const std::vector<RaterVerdict>& verdicts) {
    std::ostringstream os;
    os << "rater_id\tconsistent\tdiscerning\texempt\tconsistency_tested\tdiscernment_tested"
          "\tp_consistency\tp_discernment\tn_good_orig\tn_bad_orig\tn_good_rep\tn_bad_rep"
          "\tn_matched_bad_pairs\n";
    auto p_str = [](double p) {
        if (std::isnan(p)) return std::string("NA");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", p);
        return std::string(buf);
    };
    for (const auto& v : verdicts) {
        os << v.rater_id << '\t' << (v.consistent ? 1 : 0) << '\t' << (v.discerning ? 1 : 0)
           << '\t' << (v.exempt_discernment ? 1 : 0) << '\t' << (v.consistency_tested ? 1 : 0)
           << '\t' << (v.discernment_tested ? 1 : 0) << '\t' << p_str(v.p_consistency) << '\t'
           << p_str(v.p_discernment) << '\t' << v.n_qc_items.good_original << '\t'
           << v.n_qc_items.bad_original << '\t' << v.n_qc_items.good_repeat << '\t'
           << v.n_qc_items.bad_repeat << '\t' << v.n_qc_items.matched_bad_pairs << '\n';
    }
    return os.str();
}

} // namespace mteval
