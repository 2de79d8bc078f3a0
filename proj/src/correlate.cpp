#include "mteval/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mteval/parallel.hpp"

namespace mteval {

namespace {

// Counts inversions (strict descents) in v with a merge sort.
long long count_inversions(std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0;
    std::vector<double> buf(n);
    long long inversions = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    inversions += static_cast<long long>(mid - i);
                    buf[k++] = v[j++];
                } else {
                    buf[k++] = v[i++];
                }
            }
            while (i < mid) buf[k++] = v[i++];
            while (j < hi) buf[k++] = v[j++];
            std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
        }
    }
    return inversions;
}

long long tie_term(const std::vector<double>& sorted) {
    long long total = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const long long t = static_cast<long long>(j - i);
        total += t * (t - 1) / 2;
        i = j;
    }
    return total;
}

} // namespace

std::optional<double> kendall_tau(const std::vector<double>& x, const std::vector<double>& y,
                                  TauVariant variant) {
    if (x.size() != y.size()) throw ValidationError("kendall_tau: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw ValidationError("kendall_tau: need at least 2 observations");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw ValidationError("kendall_tau: non-finite value");
    }

    // Knight's algorithm: sort by (x, y), then discordant pairs are exactly
    // the strict inversions of the y sequence.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    const long long n0 = static_cast<long long>(n) * (n - 1) / 2;

    long long x_ties = 0, joint_ties = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && x[order[j]] == x[order[i]]) ++j;
            const long long t = static_cast<long long>(j - i);
            x_ties += t * (t - 1) / 2;
            std::size_t a = i;
            while (a < j) {
                std::size_t b = a;
                while (b < j && y[order[b]] == y[order[a]]) ++b;
                const long long u = static_cast<long long>(b - a);
                joint_ties += u * (u - 1) / 2;
                a = b;
            }
            i = j;
        }
    }

    std::vector<double> y_seq(n);
    for (std::size_t i = 0; i < n; ++i) y_seq[i] = y[order[i]];
    const long long discordant = count_inversions(y_seq); // y_seq is now sorted
    const long long y_ties = tie_term(y_seq);

    const long long concordant = n0 - x_ties - y_ties + joint_ties - discordant;
    const double diff = static_cast<double>(concordant - discordant);

    if (n0 == x_ties || n0 == y_ties) return std::nullopt; // one side fully tied
    if (variant == TauVariant::TauA) {
        return diff / static_cast<double>(n0);
    }
    const double denom = std::sqrt(static_cast<double>(n0 - x_ties)) *
                         std::sqrt(static_cast<double>(n0 - y_ties));
    return diff / denom;
}

CorrelationReport correlate(const std::vector<FoldedSegment>& gold, const ScoreTable& scores,
                            const CorrelateOptions& opts, JoinDiagnostics* diagnostics) {
    if (gold.empty()) throw ValidationError("correlate: no gold segments");
    if (scores.empty()) throw ValidationError("correlate: no scores");

    CorrelationReport report;
    for (const auto& [metric, rows] : scores) report.metrics.push_back(metric);

    struct PairData {
        std::vector<std::size_t> idx;
    };
    std::map<std::string, PairData> pairs; // key: "src-tgt"
    std::vector<std::string> keys(gold.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        keys[i] = segment_key(gold[i].pair, gold[i].source, gold[i].hypothesis);
        pairs[pair_code(gold[i].pair)].idx.push_back(i);
    }

    JoinDiagnostics diag;
    std::set<std::string> gold_keys(keys.begin(), keys.end());
    for (const auto& [metric, rows] : scores) {
        for (const auto& [key, score] : rows) {
            if (!gold_keys.count(key)) diag.unjoined_scores++;
        }
        for (const auto& key : gold_keys) {
            if (!rows.count(key)) diag.unscored_segments++;
        }
    }
    if (opts.strict && diag.unscored_segments > 0) {
        throw ValidationError("correlate: " + std::to_string(diag.unscored_segments) +
                              " gold segment/metric cells have no score (use lenient mode to "
                              "correlate on the joined subset)");
    }

    struct Cell {
        std::size_t row;
        std::size_t metric;
    };
    std::vector<CorrelationReport::Row> rows(pairs.size());
    std::vector<const PairData*> pair_data;
    std::size_t r = 0;
    for (const auto& [code, pd] : pairs) {
        rows[r].pair = parse_pair(code);
        rows[r].count = static_cast<int>(pd.idx.size());
        rows[r].taus.assign(report.metrics.size(), std::nullopt);
        pair_data.push_back(&pd);
        ++r;
    }

    std::vector<Cell> cells;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t m = 0; m < report.metrics.size(); ++m) cells.push_back({i, m});
    }
    parallel_for(cells.size(), opts.jobs, [&](std::size_t c) {
        const auto [row, m] = cells[c];
        const auto& metric_scores = scores.at(report.metrics[m]);
        std::vector<double> xs, ys;
        xs.reserve(pair_data[row]->idx.size());
        for (std::size_t i : pair_data[row]->idx) {
            auto it = metric_scores.find(keys[i]);
            if (it == metric_scores.end()) continue;
            xs.push_back(it->second);
            ys.push_back(gold[i].norm_score);
        }
        if (xs.size() >= 2) {
            rows[row].taus[m] = kendall_tau(xs, ys, opts.variant);
        }
    });

    report.rows = std::move(rows);
    finalize_report(report);
    if (diagnostics) *diagnostics = diag;
    return report;
}

TTestResult paired_metric_significance(const CorrelationReport& a, const std::string& metric_a,
                                       const CorrelationReport& b, const std::string& metric_b) {
    const auto find_metric = [](const CorrelationReport& rep, const std::string& m) {
        const auto it = std::find(rep.metrics.begin(), rep.metrics.end(), m);
        if (it == rep.metrics.end())
            throw ValidationError("report has no metric named " + m);
        return static_cast<std::size_t>(it - rep.metrics.begin());
    };
    const std::size_t ka = find_metric(a, metric_a);
    const std::size_t kb = find_metric(b, metric_b);

    std::map<std::string, double> taus_b;
    for (const auto& row : b.rows) {
        if (row.taus[kb]) taus_b[pair_code(row.pair)] = *row.taus[kb];
    }
    std::vector<double> va, vb;
    for (const auto& row : a.rows) {
        if (!row.taus[ka]) continue;
        auto it = taus_b.find(pair_code(row.pair));
        if (it == taus_b.end()) continue;
        va.push_back(*row.taus[ka]);
        vb.push_back(it->second);
    }
    if (va.size() < 2)
        throw ValidationError("paired_metric_significance: fewer than 2 common pairs");
    return paired_t_test(va, vb);
}

std::vector<ChallengeGroupResult> challenge_eval(const std::vector<ChallengeItem>& items,
                                                 const ScoreTable& scores,
                                                 const std::string& metric, ChallengeGroupBy by) {
    if (items.empty()) throw ValidationError("challenge_eval: no items");
    const auto it = scores.find(metric);
    if (it == scores.end()) throw ValidationError("no scores for metric " + metric);
    const auto& table = it->second;

    std::map<std::string, ChallengeGroupResult> groups;
    for (const auto& item : items) {
        const std::string good_key = segment_key(item.pair, item.source, item.good_translation);
        const std::string bad_key =
            segment_key(item.pair, item.source, item.incorrect_translation);
        const auto g = table.find(good_key);
        const auto b = table.find(bad_key);
        if (g == table.end() || b == table.end()) {
            throw ValidationError("challenge item lacks a score for both translations (" +
                                  pair_code(item.pair) + ", " + item.phenomenon + ")");
        }
        const std::string key =
            by == ChallengeGroupBy::Pair ? pair_code(item.pair) : item.phenomenon;
        auto& res = groups[key];
        res.group = key;
        res.n++;
        if (g->second > b->second) res.correct++;
        else if (g->second < b->second) res.incorrect++;
        else res.ties++;
    }

    std::vector<ChallengeGroupResult> out;
    out.reserve(groups.size());
    for (auto& [key, res] : groups) {
        // ties count against the metric
        res.tau = static_cast<double>(res.correct - res.incorrect - res.ties) /
                  static_cast<double>(res.n);
        out.push_back(res);
    }
    return out;
}

std::string challenge_to_tsv(const std::vector<ChallengeGroupResult>& results, int precision) {
    std::ostringstream os;
    os << "group\tcount\tcorrect\tincorrect\tties\ttau\n";
    char buf[32];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof(buf), "%.*f", precision, r.tau);
        os << r.group << '\t' << r.n << '\t' << r.correct << '\t' << r.incorrect << '\t'
           << r.ties << '\t' << buf << '\n';
    }
    return os.str();
}

} // namespace mteval
