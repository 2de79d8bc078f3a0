#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mteval/core.hpp"

namespace mteval {

enum class Split { Train, Dev, Test, Excluded };

std::string_view split_name(Split s);

struct SplitRatios {
    double train = 0.9;
    double dev = 0.05;
    double test = 0.05;
};

struct SplitResult {
    std::vector<Split> assignment; // parallel to the segment vector
    struct Drop {
        std::size_t index;
        std::string reason;
    };
    std::vector<Drop> drops; // leakage-filtered dev/test segments
    std::vector<std::string> warnings;
};

// Groups by language pair, shuffles deterministically from the seed, allocates
// per-pair counts by largest remainder, then removes dev/test segments whose
// (source, hypothesis) also appears in train. Pairs with fewer than 20
// segments go entirely to train with a warning.
SplitResult split_segments(const std::vector<FoldedSegment>& segments,
                           const SplitRatios& ratios, std::uint64_t seed);

// Leakage filtering alone, for pre-assigned splits: marks as Excluded any
// dev/test segment whose (source, hypothesis) occurs in train.
std::vector<SplitResult::Drop> leakage_filter(const std::vector<FoldedSegment>& segments,
                                              std::vector<Split>& assignment);

struct AblationSpec {
    enum class Kind { Volume, Quality, Domain, Direction, Family, Subfamily, Pair };
    Kind kind = Kind::Volume;
    int volume_pct = 100;              // Volume
    QualityClass quality = QualityClass::Good; // Quality
    Domain domain = Domain::Governance;        // Domain
    std::string direction_src;         // Direction: "eng" or "hin"
    Family family = Family::IndoAryan; // Family
    Subfamily subfamily = Subfamily::IaNorth; // Subfamily
    LanguagePair pair;                 // Pair
    bool nested = false;               // Volume: reuse one permutation across percentages
};

// Parses "key=value": volume=10|25|50|75|100, quality=good|bad|neutral,
// domain=governance|health, direction=en-il|hi-il, family=indo-aryan|dravidian,
// subfamily=<group>, pair=src-tgt.
AblationSpec parse_ablation_spec(std::string_view text);

// Volume ablation samples the train split (dev/test untouched); every other
// kind filters all three splits by the named attribute. Removed segments
// become Excluded.
std::vector<Split> ablate(const std::vector<FoldedSegment>& segments,
                          const std::vector<Split>& assignment, const AblationSpec& spec,
                          std::uint64_t seed);

// TSV segment_key -> split for everything not Excluded.
std::string split_manifest_tsv(const std::vector<FoldedSegment>& segments,
                               const std::vector<Split>& assignment);

std::string drops_tsv(const std::vector<FoldedSegment>& segments,
                      const std::vector<SplitResult::Drop>& drops);

} // namespace mteval
