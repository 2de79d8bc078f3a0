#include "mteval/surface_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "mteval/parallel.hpp"
#include "mteval/text.hpp"

namespace mteval {

namespace {

// n-gram multiset as joined tokens; 0x1F cannot occur inside a token.
std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& toks,
                                                  std::size_t n) {
    std::unordered_map<std::string, int> counts;
    if (toks.size() < n) return counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key = toks[i];
        for (std::size_t k = 1; k < n; ++k) {
            key += '\x1f';
            key += toks[i + k];
        }
        counts[key]++;
    }
    return counts;
}

} // namespace

double sentence_bleu(std::string_view hyp, std::string_view ref) {
    const std::vector<std::string> r = text::words(ref);
    if (r.empty()) throw ValidationError("sentence_bleu: empty reference");
    const std::vector<std::string> h = text::words(hyp);
    if (h.empty()) return 0.0;

    const std::size_t max_order = std::min<std::size_t>(4, h.size());
    double log_sum = 0.0;
    int zero_orders = 0;
    for (std::size_t n = 1; n <= max_order; ++n) {
        const auto hc = ngram_counts(h, n);
        const auto rc = ngram_counts(r, n);
        long long matched = 0, total = 0;
        for (const auto& [gram, count] : hc) {
            total += count;
            auto it = rc.find(gram);
            if (it != rc.end()) matched += std::min(count, it->second);
        }
        double p;
        if (matched > 0) {
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else if (n == 1) {
            return 0.0; // no unigram overlap at all
        } else {
            // exponential smoothing: the k-th zero order counts 1/2^k
            ++zero_orders;
            p = 1.0 / (std::pow(2.0, zero_orders) * static_cast<double>(total));
        }
        log_sum += std::log(p);
    }
    const double geo_mean = std::exp(log_sum / static_cast<double>(max_order));
    const double bp =
        h.size() >= r.size()
            ? 1.0
            : std::exp(1.0 - static_cast<double>(r.size()) / static_cast<double>(h.size()));
    return bp * geo_mean;
}

int word_levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

namespace {

// Moves words [start, start+len) to position dest of the remaining sequence.
std::vector<std::string> apply_shift(const std::vector<std::string>& words, std::size_t start,
                                     std::size_t len, std::size_t dest) {
    std::vector<std::string> rest;
    rest.reserve(words.size());
    rest.insert(rest.end(), words.begin(), words.begin() + start);
    rest.insert(rest.end(), words.begin() + start + len, words.end());
    std::vector<std::string> out;
    out.reserve(words.size());
    out.insert(out.end(), rest.begin(), rest.begin() + dest);
    out.insert(out.end(), words.begin() + start, words.begin() + start + len);
    out.insert(out.end(), rest.begin() + dest, rest.end());
    return out;
}

} // namespace

double ter(std::string_view hyp, std::string_view ref) {
    const std::vector<std::string> r = text::words(ref);
    if (r.empty()) throw ValidationError("ter: empty reference");
    std::vector<std::string> h = text::words(hyp);

    int shifts = 0;
    int dist = word_levenshtein(h, r);
    while (dist > 1 && h.size() > 1) {
        // Greedy: take the single shift that most reduces the edit distance.
        // Candidates scan long blocks first, then left origins, then left
        // destinations, so the first strict improvement wins ties.
        int best = dist;
        std::vector<std::string> best_words;
        for (std::size_t len = h.size() - 1; len >= 1; --len) {
            for (std::size_t start = 0; start + len <= h.size(); ++start) {
                for (std::size_t dest = 0; dest <= h.size() - len; ++dest) {
                    if (dest == start) continue;
                    std::vector<std::string> cand = apply_shift(h, start, len, dest);
                    const int d = word_levenshtein(cand, r);
                    if (d < best) {
                        best = d;
                        best_words = std::move(cand);
                    }
                }
            }
            if (len == 1) break;
        }
        // A shift costs one edit, so it must save at least two to pay off.
        if (best + 1 >= dist) break;
        h = std::move(best_words);
        dist = best;
        ++shifts;
    }
    return static_cast<double>(shifts + dist) / static_cast<double>(r.size());
}

namespace {

std::unordered_map<std::u32string, int> char_ngrams(const std::u32string& s, std::size_t n) {
    std::unordered_map<std::u32string, int> counts;
    if (s.size() < n) return counts;
    for (std::size_t i = 0; i + n <= s.size(); ++i) counts[s.substr(i, n)]++;
    return counts;
}

} // namespace

double chrf(std::string_view hyp, std::string_view ref, double beta) {
    const std::u32string r = text::strip_spaces(ref);
    if (r.empty()) throw ValidationError("chrf: empty reference");
    const std::u32string h = text::strip_spaces(hyp);
    if (h.empty()) return 0.0;

    double p_sum = 0.0, r_sum = 0.0;
    int orders = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto hc = char_ngrams(h, n);
        const auto rc = char_ngrams(r, n);
        long long h_total = 0, r_total = 0, matched = 0;
        for (const auto& [g, c] : hc) h_total += c;
        for (const auto& [g, c] : rc) r_total += c;
        if (h_total == 0 && r_total == 0) continue; // both too short for this order
        for (const auto& [g, c] : hc) {
            auto it = rc.find(g);
            if (it != rc.end()) matched += std::min(c, it->second);
        }
        p_sum += h_total > 0 ? static_cast<double>(matched) / static_cast<double>(h_total) : 0.0;
        r_sum += r_total > 0 ? static_cast<double>(matched) / static_cast<double>(r_total) : 0.0;
        ++orders;
    }
    if (orders == 0) return 0.0;
    const double prec = p_sum / orders;
    const double rec = r_sum / orders;
    const double b2 = beta * beta;
    const double denom = b2 * prec + rec;
    if (denom == 0.0) return 0.0;
    return 100.0 * (1.0 + b2) * prec * rec / denom;
}

std::vector<ScoreRow> score_surface(const std::vector<FoldedSegment>& segments,
                                    const ScoreOptions& opts) {
    for (const auto& s : segments) {
        if (s.reference.empty())
            throw ValidationError("segment without reference cannot be scored: " +
                                  segment_key(s.pair, s.source, s.hypothesis));
    }
    std::vector<std::string> metrics;
    if (opts.bleu) metrics.push_back("bleu");
    if (opts.ter) metrics.push_back("ter");
    if (opts.chrf) metrics.push_back("chrf2");
    if (metrics.empty()) throw ValidationError("no metrics selected");

    std::vector<ScoreRow> rows(segments.size() * metrics.size());
    parallel_for(segments.size(), opts.jobs, [&](std::size_t i) {
        const auto& s = segments[i];
        const std::string key = segment_key(s.pair, s.source, s.hypothesis);
        std::size_t slot = i * metrics.size();
        if (opts.bleu) {
            rows[slot++] = {key, "bleu", sentence_bleu(s.hypothesis, s.reference)};
        }
        if (opts.ter) {
            double t = ter(s.hypothesis, s.reference);
            if (opts.negate_ter) t = -t;
            rows[slot++] = {key, "ter", t};
        }
        if (opts.chrf) {
            rows[slot++] = {key, "chrf2", chrf(s.hypothesis, s.reference)};
        }
    });
    return rows;
}

} // namespace mteval
