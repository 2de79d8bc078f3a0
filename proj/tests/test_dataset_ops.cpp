#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "mteval/data_io.hpp"
#include "mteval/dataset_ops.hpp"
#include "mteval/rng.hpp"

using namespace mteval;

namespace {

std::vector<FoldedSegment> make_segments(const std::map<std::string, int>& per_pair,
                                         std::uint64_t seed = 1) {
    std::vector<FoldedSegment> out;
    Rng rng(seed);
    for (const auto& [code, n] : per_pair) {
        for (int i = 0; i < n; ++i) {
            FoldedSegment s;
            s.pair = parse_pair(code);
            s.source = code + " source " + std::to_string(i);
            s.hypothesis = code + " hyp " + std::to_string(i);
            s.reference = "ref";
            s.origin = static_cast<Origin>(rng.below(kNumOrigins));
            s.domain = static_cast<Domain>(rng.below(3));
            s.n_ratings = 2;
            s.n_raters = 2;
            s.norm_score = rng.unit();
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::map<Split, int> tally(const std::vector<Split>& assignment,
                           const std::vector<FoldedSegment>& segs, const std::string& code) {
    std::map<Split, int> counts;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (pair_code(segs[i].pair) == code) counts[assignment[i]]++;
    }
    return counts;
}

} // namespace

TEST_CASE("1000 segments split 900/50/50") {
    const auto segs = make_segments({{"eng-hin", 1000}});
    const SplitResult r = split_segments(segs, {}, 42);
    const auto counts = tally(r.assignment, segs, "eng-hin");
    CHECK(counts.at(Split::Train) == 900);
    CHECK(counts.at(Split::Dev) == 50);
    CHECK(counts.at(Split::Test) == 50);
    CHECK(r.drops.empty());
}

TEST_CASE("999 segments allocate 899/50/50 by largest remainder") {
    const auto segs = make_segments({{"eng-hin", 999}});
    const SplitResult r = split_segments(segs, {}, 42);
    const auto counts = tally(r.assignment, segs, "eng-hin");
    CHECK(counts.at(Split::Train) == 899);
    CHECK(counts.at(Split::Dev) == 50);
    CHECK(counts.at(Split::Test) == 50);
}

TEST_CASE("same seed reproduces the exact assignment; different seed does not") {
    const auto segs = make_segments({{"eng-hin", 500}, {"hin-urd", 300}});
    const SplitResult a = split_segments(segs, {}, 7);
    const SplitResult b = split_segments(segs, {}, 7);
    CHECK(a.assignment == b.assignment);
    const SplitResult c = split_segments(segs, {}, 8);
    CHECK(a.assignment != c.assignment);
}

TEST_CASE("tiny pairs go wholly to train with a warning") {
    const auto segs = make_segments({{"eng-kas", 12}, {"eng-hin", 200}});
    const SplitResult r = split_segments(segs, {}, 3);
    const auto kas = tally(r.assignment, segs, "eng-kas");
    CHECK(kas.at(Split::Train) == 12);
    CHECK(kas.count(Split::Dev) == 0);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("eng-kas") != std::string::npos);
}

TEST_CASE("every segment lands in exactly one split before filtering") {
    const auto segs = make_segments({{"eng-hin", 350}, {"eng-tam", 211}, {"hin-doi", 97}});
    const SplitResult r = split_segments(segs, {}, 11);
    REQUIRE(r.assignment.size() == segs.size());
    int excluded = 0;
    for (const Split s : r.assignment) {
        if (s == Split::Excluded) ++excluded;
    }
    CHECK(excluded == static_cast<int>(r.drops.size()));
}

TEST_CASE("leakage: identical (source, hypothesis) in train removes the dev/test copy") {
    auto segs = make_segments({{"eng-hin", 400}});
    // plant duplicates of the first 40 segments (same text, higher indices)
    for (int i = 0; i < 40; ++i) {
        FoldedSegment dup = segs[i];
        segs.push_back(dup);
    }
    const SplitResult r = split_segments(segs, {}, 19);
    // exhaustive: no dev/test text may appear in train
    std::set<std::pair<std::string, std::string>> train;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (r.assignment[i] == Split::Train) train.insert({segs[i].source, segs[i].hypothesis});
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (r.assignment[i] == Split::Dev || r.assignment[i] == Split::Test) {
            CHECK(train.count({segs[i].source, segs[i].hypothesis}) == 0);
        }
    }
    // every drop is recorded
    for (const auto& d : r.drops) {
        CHECK(r.assignment[d.index] == Split::Excluded);
        CHECK(d.reason.find("leakage") == 0);
    }
}

TEST_CASE("same source with different hypotheses is not leakage") {
    std::vector<FoldedSegment> segs;
    for (int i = 0; i < 100; ++i) {
        FoldedSegment s;
        s.pair = make_lang_pair("eng", "hin");
        s.source = "shared source";
        s.hypothesis = "hyp " + std::to_string(i);
        s.reference = "ref";
        s.n_ratings = 2;
        segs.push_back(s);
    }
    const SplitResult r = split_segments(segs, {}, 5);
    CHECK(r.drops.empty());
}

TEST_CASE("disjoint texts: leakage filter is a no-op") {
    const auto segs = make_segments({{"eng-hin", 300}});
    std::vector<Split> assignment(300, Split::Train);
    for (int i = 0; i < 30; ++i) assignment[i] = Split::Test;
    const auto drops = leakage_filter(segs, assignment);
    CHECK(drops.empty());
}

TEST_CASE("per-pair proportions stay within half a point for 500+ segments") {
    const auto segs = make_segments({{"eng-hin", 523}, {"eng-tel", 9000}, {"hin-urd", 640}});
    const SplitResult r = split_segments(segs, {}, 29);
    for (const char* code : {"eng-hin", "eng-tel", "hin-urd"}) {
        // tally before leakage: planted data has unique texts, so no drops
        const auto counts = tally(r.assignment, segs, code);
        const double total = counts.at(Split::Train) + counts.at(Split::Dev) +
                             counts.at(Split::Test);
        CHECK(std::abs(counts.at(Split::Train) / total - 0.90) < 0.005);
        CHECK(std::abs(counts.at(Split::Dev) / total - 0.05) < 0.005);
        CHECK(std::abs(counts.at(Split::Test) / total - 0.05) < 0.005);
    }
}

TEST_CASE("ratios must sum to one") {
    const auto segs = make_segments({{"eng-hin", 100}});
    SplitRatios bad{0.9, 0.05, 0.10};
    CHECK_THROWS_AS(split_segments(segs, bad, 1), ValidationError);
}

TEST_CASE("ablation spec parsing") {
    CHECK(parse_ablation_spec("volume=25").volume_pct == 25);
    CHECK(parse_ablation_spec("quality=bad").quality == QualityClass::Bad);
    CHECK(parse_ablation_spec("domain=health").domain == Domain::Health);
    CHECK(parse_ablation_spec("direction=en-il").direction_src == "eng");
    CHECK(parse_ablation_spec("direction=hi-il").direction_src == "hin");
    CHECK(parse_ablation_spec("family=dravidian").family == Family::Dravidian);
    CHECK(parse_ablation_spec("subfamily=ia-dardic").subfamily == Subfamily::IaDardic);
    CHECK(parse_ablation_spec("pair=eng-urd").pair == make_lang_pair("eng", "urd"));
    CHECK_THROWS_AS(parse_ablation_spec("volume=33"), ValidationError);
    CHECK_THROWS_AS(parse_ablation_spec("domain=general"), ValidationError);
    CHECK_THROWS_AS(parse_ablation_spec("nonsense=1"), ValidationError);
    CHECK_THROWS_AS(parse_ablation_spec("volume"), ValidationError);
}

TEST_CASE("volume ablation samples train only") {
    const auto segs = make_segments({{"eng-hin", 2000}});
    const SplitResult r = split_segments(segs, {}, 13);
    const auto before = tally(r.assignment, segs, "eng-hin");

    const auto spec = parse_ablation_spec("volume=25");
    const auto ablated = ablate(segs, r.assignment, spec, 13);
    const auto after = tally(ablated, segs, "eng-hin");
    // dev/test untouched
    CHECK(after.at(Split::Dev) == before.at(Split::Dev));
    CHECK(after.at(Split::Test) == before.at(Split::Test));
    // train shrinks to 25% (round half up)
    const int expect = static_cast<int>(std::floor(before.at(Split::Train) * 0.25 + 0.5));
    CHECK(after.at(Split::Train) == expect);
}

TEST_CASE("volume=100 keeps everything") {
    const auto segs = make_segments({{"eng-hin", 500}});
    const SplitResult r = split_segments(segs, {}, 13);
    const auto spec = parse_ablation_spec("volume=100");
    CHECK(ablate(segs, r.assignment, spec, 13) == r.assignment);
}

TEST_CASE("nested volume subsets are prefixes; fresh ones are not") {
    const auto segs = make_segments({{"eng-hin", 2000}});
    const SplitResult r = split_segments(segs, {}, 13);

    auto spec10 = parse_ablation_spec("volume=10");
    auto spec25 = parse_ablation_spec("volume=25");
    spec10.nested = spec25.nested = true;
    const auto a10 = ablate(segs, r.assignment, spec10, 99);
    const auto a25 = ablate(segs, r.assignment, spec25, 99);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (a10[i] == Split::Train) CHECK(a25[i] == Split::Train);
    }

    spec10.nested = spec25.nested = false;
    const auto f10 = ablate(segs, r.assignment, spec10, 99);
    const auto f25 = ablate(segs, r.assignment, spec25, 99);
    int contained = 0, kept10 = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (f10[i] == Split::Train) {
            ++kept10;
            if (f25[i] == Split::Train) ++contained;
        }
    }
    CHECK(contained < kept10); // fresh draws are not nested
}

TEST_CASE("attribute ablations filter all splits and partition the set") {
    const auto segs =
        make_segments({{"eng-hin", 300}, {"eng-tam", 200}, {"hin-doi", 150}, {"hin-kan", 100}});
    const SplitResult r = split_segments(segs, {}, 21);

    SUBCASE("quality classes partition") {
        std::vector<int> seen(segs.size(), 0);
        for (const char* q : {"quality=good", "quality=bad", "quality=neutral"}) {
            const auto ab = ablate(segs, r.assignment, parse_ablation_spec(q), 0);
            for (std::size_t i = 0; i < segs.size(); ++i) {
                if (ab[i] != Split::Excluded) seen[i]++;
            }
        }
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const int expected = r.assignment[i] == Split::Excluded ? 0 : 1;
            CHECK(seen[i] == expected);
        }
    }
    SUBCASE("families partition") {
        std::vector<int> seen(segs.size(), 0);
        for (const char* f : {"family=indo-aryan", "family=dravidian"}) {
            const auto ab = ablate(segs, r.assignment, parse_ablation_spec(f), 0);
            for (std::size_t i = 0; i < segs.size(); ++i) {
                if (ab[i] != Split::Excluded) seen[i]++;
            }
        }
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const int expected = r.assignment[i] == Split::Excluded ? 0 : 1;
            CHECK(seen[i] == expected);
        }
    }
    SUBCASE("dravidian keeps only kan, tel, tam targets") {
        const auto ab = ablate(segs, r.assignment, parse_ablation_spec("family=dravidian"), 0);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (ab[i] == Split::Excluded) continue;
            const auto& t = segs[i].pair.tgt;
            CHECK((t == "kan" || t == "tel" || t == "tam"));
        }
    }
    SUBCASE("direction filter keeps one source") {
        const auto ab = ablate(segs, r.assignment, parse_ablation_spec("direction=hi-il"), 0);
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (ab[i] != Split::Excluded) CHECK(segs[i].pair.src == "hin");
        }
    }
    SUBCASE("pair filter keeps one direction") {
        const auto ab = ablate(segs, r.assignment, parse_ablation_spec("pair=eng-tam"), 0);
        int kept = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (ab[i] != Split::Excluded) {
                ++kept;
                CHECK(pair_code(segs[i].pair) == "eng-tam");
            }
        }
        CHECK(kept == 200);
    }
    SUBCASE("every ablation is a subset of the input assignment") {
        for (const char* text : {"quality=bad", "domain=health", "subfamily=ia-east"}) {
            const auto ab = ablate(segs, r.assignment, parse_ablation_spec(text), 0);
            for (std::size_t i = 0; i < segs.size(); ++i) {
                if (r.assignment[i] == Split::Excluded) CHECK(ab[i] == Split::Excluded);
                if (ab[i] != Split::Excluded) CHECK(ab[i] == r.assignment[i]);
            }
        }
    }
}

TEST_CASE("split manifest and drop ledger TSVs") {
    auto segs = make_segments({{"eng-hin", 60}});
    // force a leakage drop
    segs.push_back(segs[0]);
    const SplitResult r = split_segments(segs, {}, 2);
    const std::string manifest = split_manifest_tsv(segs, r.assignment);
    CHECK(manifest.find("segment_key\tsplit\n") == 0);
    const std::string ledger = drops_tsv(segs, r.drops);
    CHECK(ledger.find("segment_key\treason\n") == 0);
    // excluded segments are in the ledger, not the manifest
    for (const auto& d : r.drops) {
        const std::string key =
            segment_key(segs[d.index].pair, segs[d.index].source, segs[d.index].hypothesis);
        CHECK(ledger.find(key) != std::string::npos);
    }
}
