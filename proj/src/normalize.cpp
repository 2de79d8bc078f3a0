#include "mteval/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "mteval/data_io.hpp"
#include "mteval/parallel.hpp"

namespace mteval {

RatingSet zscore_by_rater(const RatingSet& rs, const ZScoreOptions& opts) {
    using GroupKey = std::tuple<std::string, std::string, std::string>; // src, tgt, rater
    std::map<GroupKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < rs.records.size(); ++i) {
        const auto& r = rs.records[i];
        groups[{r.pair.src, r.pair.tgt, r.rater_id}].push_back(i);
    }

    std::vector<const std::vector<std::size_t>*> order;
    order.reserve(groups.size());
    for (const auto& [key, idx] : groups) {
        if (idx.size() < 2) {
            throw ValidationError("rater " + std::get<2>(key) + " has a single rating in " +
                                  std::get<0>(key) + "-" + std::get<1>(key) +
                                  "; filter such raters before standardizing");
        }
        order.push_back(&idx);
    }

    RatingSet out = rs;
    parallel_for(order.size(), opts.jobs, [&](std::size_t g) {
        const auto& idx = *order[g];
        double sum = 0.0;
        for (std::size_t i : idx) sum += rs.records[i].raw_score;
        const double mean = sum / static_cast<double>(idx.size());
        double ss = 0.0;
        for (std::size_t i : idx) {
            const double d = rs.records[i].raw_score - mean;
            ss += d * d;
        }
        const double denom =
            opts.population_std ? static_cast<double>(idx.size()) : static_cast<double>(idx.size() - 1);
        const double sd = std::sqrt(ss / denom);
        for (std::size_t i : idx) {
            out.records[i].z = sd > 0.0 ? (rs.records[i].raw_score - mean) / sd : 0.0;
        }
    });
    return out;
}

namespace {

using ItemKey = std::tuple<std::string, std::string, std::string, std::string>;

ItemKey item_key(const RatingRecord& r) {
    return {r.pair.src, r.pair.tgt, r.source, r.hypothesis};
}

void require_z(const RatingSet& rs) {
    for (const auto& r : rs.records) {
        if (std::isnan(r.z)) {
            throw ValidationError("record " + r.item_id + " has no z-score; standardize first");
        }
    }
}

} // namespace

ScaleAnchors compute_anchors(const RatingSet& rs) {
    require_z(rs);
    struct Pool {
        bool all_one = true;
        bool all_hundred = true;
        std::vector<double> zs;
    };
    std::map<ItemKey, Pool> items;
    for (const auto& r : rs.records) {
        auto& p = items[item_key(r)];
        p.all_one = p.all_one && r.raw_score == 1;
        p.all_hundred = p.all_hundred && r.raw_score == 100;
        p.zs.push_back(r.z);
    }

    double min_sum = 0.0, max_sum = 0.0;
    std::size_t min_n = 0, max_n = 0;
    for (const auto& [key, p] : items) {
        if (p.all_one) {
            for (double z : p.zs) min_sum += z;
            min_n += p.zs.size();
        }
        if (p.all_hundred) {
            for (double z : p.zs) max_sum += z;
            max_n += p.zs.size();
        }
    }
    if (min_n == 0 || max_n == 0) {
        throw ValidationError(
            std::string("no unanimously ") + (min_n == 0 ? "all-1" : "all-100") +
            " scored items to anchor the scale; rerun with observed min-max anchors "
            "(anchor_mode=observed) for data without planted anchor items");
    }
    ScaleAnchors a;
    a.z_min = min_sum / static_cast<double>(min_n);
    a.z_max = max_sum / static_cast<double>(max_n);
    if (!(a.z_min < a.z_max)) {
        throw ValidationError("degenerate anchors: z_min >= z_max");
    }
    return a;
}

ScaleAnchors observed_anchors(const RatingSet& rs) {
    require_z(rs);
    if (rs.empty()) throw ValidationError("cannot compute anchors on an empty set");
    double lo = rs.records.front().z, hi = rs.records.front().z;
    for (const auto& r : rs.records) {
        lo = std::min(lo, r.z);
        hi = std::max(hi, r.z);
    }
    if (!(lo < hi)) throw ValidationError("degenerate anchors: all z-scores equal");
    return {lo, hi};
}

double minmax_clip(double z, const ScaleAnchors& anchors) {
    const double v = (z - anchors.z_min) / (anchors.z_max - anchors.z_min);
    return std::clamp(v, 0.0, 1.0);
}

RatingSet apply_minmax(const RatingSet& rs, const ScaleAnchors& anchors) {
    require_z(rs);
    RatingSet out = rs;
    for (auto& r : out.records) r.norm = minmax_clip(r.z, anchors);
    return out;
}

std::vector<FoldedSegment> fold(const RatingSet& rs) {
    struct Group {
        std::vector<std::size_t> idx;
    };
    std::map<ItemKey, Group> groups;
    for (std::size_t i = 0; i < rs.records.size(); ++i) {
        groups[item_key(rs.records[i])].idx.push_back(i);
    }

    std::vector<FoldedSegment> out;
    out.reserve(groups.size());
    for (const auto& [key, g] : groups) {
        const auto& first = rs.records[g.idx.front()];
        FoldedSegment s;
        s.pair = first.pair;
        s.source = first.source;
        s.hypothesis = first.hypothesis;
        s.origin = first.origin;
        s.domain = first.domain;
        s.bucket = first.bucket;
        s.reference = first.reference;

        std::set<std::string> raters;
        double raw_sum = 0.0, z_sum = 0.0, norm_sum = 0.0;
        for (std::size_t i : g.idx) {
            const auto& r = rs.records[i];
            if (r.origin != first.origin || r.domain != first.domain ||
                (!r.reference.empty() && !first.reference.empty() &&
                 r.reference != first.reference)) {
                throw ValidationError("conflicting metadata for identical text: items " +
                                      first.item_id + " and " + r.item_id + " (" +
                                      pair_code(first.pair) + ")");
            }
            if (std::isnan(r.z) || std::isnan(r.norm)) {
                throw ValidationError("record " + r.item_id +
                                      " lacks z or normalized score; normalize before folding");
            }
            raters.insert(r.rater_id);
            raw_sum += r.raw_score;
            z_sum += r.z;
            norm_sum += r.norm;
        }
        const double n = static_cast<double>(g.idx.size());
        s.n_ratings = static_cast<int>(g.idx.size());
        s.n_raters = static_cast<int>(raters.size());
        s.raw_mean = raw_sum / n;
        s.z_mean = z_sum / n;
        s.norm_score = norm_sum / n;
        out.push_back(std::move(s));
    }

    std::sort(out.begin(), out.end(), [](const FoldedSegment& a, const FoldedSegment& b) {
        return segment_key(a.pair, a.source, a.hypothesis) <
               segment_key(b.pair, b.source, b.hypothesis);
    });
    return out;
}

} // namespace mteval
