#include "mteval/dataset_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "mteval/data_io.hpp"
#include "mteval/rng.hpp"

namespace mteval {

std::string_view split_name(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
    case Split::Excluded: return "excluded";
    }
    return "?";
}

namespace {

// Largest-remainder allocation of n into three parts.
std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitRatios& ratios) {
    const double rs[3] = {ratios.train, ratios.dev, ratios.test};
    std::array<std::size_t, 3> base{};
    double rem[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double quota = rs[i] * static_cast<double>(n);
        base[i] = static_cast<std::size_t>(std::floor(quota));
        rem[i] = quota - std::floor(quota);
        assigned += base[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (rem[a] != rem[b]) return rem[a] > rem[b];
        return a < b; // train, then dev, then test on exact ties
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) base[order[k % 3]]++;
    return base;
}

} // namespace

SplitResult split_segments(const std::vector<FoldedSegment>& segments, const SplitRatios& ratios,
                           std::uint64_t seed) {
    const double sum = ratios.train + ratios.dev + ratios.test;
    if (std::fabs(sum - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");

    SplitResult result;
    result.assignment.assign(segments.size(), Split::Train);

    std::map<std::string, std::vector<std::size_t>> by_pair;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        by_pair[pair_code(segments[i].pair)].push_back(i);
    }

    for (auto& [code, idx] : by_pair) {
        if (idx.size() < 20) {
            result.warnings.push_back("pair " + code + " has only " +
                                      std::to_string(idx.size()) +
                                      " segments; assigning all to train");
            continue; // already Train
        }
        Rng rng(derive_seed(seed, "split:" + code));
        rng.shuffle(idx);
        const auto counts = allocate_counts(idx.size(), ratios);
        std::size_t p = 0;
        for (std::size_t k = 0; k < counts[0]; ++k) result.assignment[idx[p++]] = Split::Train;
        for (std::size_t k = 0; k < counts[1]; ++k) result.assignment[idx[p++]] = Split::Dev;
        for (std::size_t k = 0; k < counts[2]; ++k) result.assignment[idx[p++]] = Split::Test;
    }

    result.drops = leakage_filter(segments, result.assignment);
    return result;
}

std::vector<SplitResult::Drop> leakage_filter(const std::vector<FoldedSegment>& segments,
                                              std::vector<Split>& assignment) {
    if (segments.size() != assignment.size())
        throw ValidationError("leakage_filter: assignment size mismatch");
    std::set<std::pair<std::string, std::string>> train_texts;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (assignment[i] == Split::Train)
            train_texts.insert({segments[i].source, segments[i].hypothesis});
    }
    std::vector<SplitResult::Drop> drops;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (assignment[i] != Split::Dev && assignment[i] != Split::Test) continue;
        if (train_texts.count({segments[i].source, segments[i].hypothesis})) {
            drops.push_back({i, std::string("leakage_from_") +
                                    std::string(split_name(assignment[i]))});
            assignment[i] = Split::Excluded;
        }
    }
    return drops;
}

AblationSpec parse_ablation_spec(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
        throw ValidationError("ablation spec must look like key=value, got: " + std::string(text));
    const std::string key(text.substr(0, eq));
    const std::string value(text.substr(eq + 1));
    AblationSpec spec;
    if (key == "volume") {
        spec.kind = AblationSpec::Kind::Volume;
        if (value != "10" && value != "25" && value != "50" && value != "75" && value != "100")
            throw ValidationError("volume must be one of 10, 25, 50, 75, 100");
        spec.volume_pct = std::stoi(value);
    } else if (key == "quality") {
        spec.kind = AblationSpec::Kind::Quality;
        spec.quality = parse_quality(value);
    } else if (key == "domain") {
        spec.kind = AblationSpec::Kind::Domain;
        spec.domain = parse_domain(value);
        if (spec.domain == Domain::General)
            throw ValidationError("domain ablation covers governance and health only");
    } else if (key == "direction") {
        spec.kind = AblationSpec::Kind::Direction;
        if (value == "en-il") spec.direction_src = "eng";
        else if (value == "hi-il") spec.direction_src = "hin";
        else throw ValidationError("direction must be en-il or hi-il");
    } else if (key == "family") {
        spec.kind = AblationSpec::Kind::Family;
        spec.family = parse_family(value);
    } else if (key == "subfamily") {
        spec.kind = AblationSpec::Kind::Subfamily;
        spec.subfamily = parse_subfamily(value);
    } else if (key == "pair") {
        spec.kind = AblationSpec::Kind::Pair;
        spec.pair = parse_pair(value);
    } else {
        throw ValidationError("unknown ablation key: " + key);
    }
    return spec;
}

std::vector<Split> ablate(const std::vector<FoldedSegment>& segments,
                          const std::vector<Split>& assignment, const AblationSpec& spec,
                          std::uint64_t seed) {
    if (segments.size() != assignment.size())
        throw ValidationError("ablate: assignment size mismatch");

    std::vector<Split> out = assignment;

    if (spec.kind == AblationSpec::Kind::Volume) {
        if (spec.volume_pct == 100) return out;
        std::vector<std::size_t> train_idx;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (assignment[i] == Split::Train) train_idx.push_back(i);
        }
        // Fresh sample per percentage unless nested, where one shared
        // permutation makes smaller subsets prefixes of larger ones.
        const std::string label = spec.nested
                                      ? std::string("ablate:volume:nested")
                                      : "ablate:volume:" + std::to_string(spec.volume_pct);
        Rng rng(derive_seed(seed, label));
        rng.shuffle(train_idx);
        const auto keep = static_cast<std::size_t>(
            std::floor(static_cast<double>(train_idx.size()) * spec.volume_pct / 100.0 + 0.5));
        for (std::size_t k = keep; k < train_idx.size(); ++k) out[train_idx[k]] = Split::Excluded;
        return out;
    }

    const auto keep_segment = [&](const FoldedSegment& s) {
        switch (spec.kind) {
        case AblationSpec::Kind::Quality:
            return classify_quality(s.origin) == spec.quality;
        case AblationSpec::Kind::Domain:
            return s.domain == spec.domain;
        case AblationSpec::Kind::Direction:
            return s.pair.src == spec.direction_src;
        case AblationSpec::Kind::Family:
            return family_of(s.pair.tgt).family == spec.family;
        case AblationSpec::Kind::Subfamily:
            return family_of(s.pair.tgt).subfamily == spec.subfamily;
        case AblationSpec::Kind::Pair:
            return s.pair == spec.pair;
        case AblationSpec::Kind::Volume:
            return true;
        }
        return true;
    };
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (out[i] == Split::Excluded) continue;
        if (!keep_segment(segments[i])) out[i] = Split::Excluded;
    }
    return out;
}

std::string split_manifest_tsv(const std::vector<FoldedSegment>& segments,
                               const std::vector<Split>& assignment) {
    if (segments.size() != assignment.size())
        throw ValidationError("split_manifest_tsv: assignment size mismatch");
    std::ostringstream os;
    os << "segment_key\tsplit\n";
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (assignment[i] == Split::Excluded) continue;
        os << segment_key(segments[i].pair, segments[i].source, segments[i].hypothesis) << '\t'
           << split_name(assignment[i]) << '\n';
    }
    return os.str();
}

std::string drops_tsv(const std::vector<FoldedSegment>& segments,
                      const std::vector<SplitResult::Drop>& drops) {
    std::ostringstream os;
    os << "segment_key\treason\n";
    for (const auto& d : drops) {
        const auto& s = segments[d.index];
        os << segment_key(s.pair, s.source, s.hypothesis) << '\t' << d.reason << '\n';
    }
    return os.str();
}

} // namespace mteval
