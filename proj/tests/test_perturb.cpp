#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <set>

#include "mteval/perturb.hpp"
#include "mteval/text.hpp"
#include "test_support.hpp"

using namespace mteval;

TEST_CASE("word budget follows max(1, round-half-up of 20%)") {
    CHECK(perturb_word_budget(1) == 1);
    CHECK(perturb_word_budget(2) == 1);
    CHECK(perturb_word_budget(3) == 1);  // round(0.6) = 1
    CHECK(perturb_word_budget(7) == 1);  // round(1.4) = 1
    CHECK(perturb_word_budget(8) == 2);  // round(1.6) = 2
    CHECK(perturb_word_budget(10) == 2);
    CHECK(perturb_word_budget(12) == 2); // round(2.4) = 2
    CHECK(perturb_word_budget(13) == 3); // round(2.6) = 3
    CHECK(perturb_word_budget(100) == 20);
}

TEST_CASE("lexicon parsing") {
    const Lexicon lex = Lexicon::from_tsv("cat\tfeline|kitty\ndog\thound\n");
    CHECK(lex.size() == 2);
    REQUIRE(lex.lookup("cat") != nullptr);
    CHECK(lex.lookup("cat")->size() == 2);
    CHECK(lex.lookup("bird") == nullptr);
    CHECK_THROWS_AS(Lexicon::from_tsv("broken-line-no-tab\n"), ValidationError);
    CHECK_THROWS_AS(Lexicon::from_tsv("word\t\n"), ValidationError);
}

TEST_CASE("length deltas per type") {
    Rng rng(101);
    const std::string ten = "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9";
    for (int trial = 0; trial < 500; ++trial) {
        const PerturbResult r = perturb_once(ten, nullptr, rng);
        REQUIRE(r.steps.size() == 1);
        CHECK(r.steps[0].k == 2);
        const auto n = text::word_count(r.sentence);
        switch (r.steps[0].type) {
        case PerturbType::Insertion: CHECK(n == 12); break;
        case PerturbType::Deletion: CHECK(n == 8); break;
        case PerturbType::Substitution: CHECK(n == 10); break;
        case PerturbType::Synonym: CHECK(n == 10); break;
        }
        // deletion and insertion always change the sentence
        if (r.steps[0].type != PerturbType::Synonym) {
            CHECK(r.sentence != ten);
        }
    }
}

TEST_CASE("three-word sentence perturbs exactly one word") {
    Rng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const PerturbResult r = perturb_once("alpha beta gamma", nullptr, rng);
        CHECK(r.steps[0].k == 1);
    }
}

TEST_CASE("substitution never no-ops when the vocabulary offers choices") {
    Rng rng(9);
    const std::string s = "a b c d e f g h i j";
    for (int trial = 0; trial < 300; ++trial) {
        const PerturbResult r = perturb_once(s, nullptr, rng);
        if (r.steps[0].type == PerturbType::Substitution) {
            CHECK(r.sentence != s);
        }
    }
}

TEST_CASE("empty sentence is rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(perturb_once("", nullptr, rng), ValidationError);
    CHECK_THROWS_AS(perturb_once("   ", nullptr, rng), ValidationError);
    CHECK_THROWS_AS(perturb_multiple("", nullptr, rng), ValidationError);
}

TEST_CASE("synonym replacement only with a lexicon") {
    SUBCASE("never drawn without one") {
        Rng rng(2);
        for (int trial = 0; trial < 400; ++trial) {
            const PerturbResult r = perturb_once("a b c d e", nullptr, rng);
            CHECK(r.steps[0].type != PerturbType::Synonym);
        }
    }
    SUBCASE("drawn and applied with one") {
        const Lexicon lex = Lexicon::from_tsv("alpha\tALPHA\nbeta\tBETA\n");
        Rng rng(3);
        bool saw_synonym = false;
        for (int trial = 0; trial < 400; ++trial) {
            const PerturbResult r = perturb_once("alpha beta gamma delta", &lex, rng);
            if (r.steps[0].type == PerturbType::Synonym) {
                saw_synonym = true;
                // the one affected word must be a lexicon replacement
                CHECK((r.sentence.find("ALPHA") != std::string::npos ||
                       r.sentence.find("BETA") != std::string::npos));
            }
        }
        CHECK(saw_synonym);
    }
    SUBCASE("coverage below k tops up with substitution, length unchanged") {
        const Lexicon lex = Lexicon::from_tsv("w0\tW0\n");
        Rng rng(4);
        const std::string s = "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9"; // k = 2, coverage 1
        for (int trial = 0; trial < 200; ++trial) {
            const PerturbResult r = perturb_once(s, &lex, rng);
            if (r.steps[0].type == PerturbType::Synonym) {
                CHECK(text::word_count(r.sentence) == 10);
                CHECK(r.sentence != s);
            }
        }
    }
}

TEST_CASE("type draw is uniform over the admissible set") {
    Rng rng(6);
    std::map<PerturbType, int> histogram;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const PerturbResult r = perturb_once("w0 w1 w2 w3 w4 w5 w6 w7 w8 w9", nullptr, rng);
        histogram[r.steps[0].type]++;
    }
    CHECK(histogram.size() == 3);
    // chi-square against uniform over 3 types; df=2, p=0.001 cutoff 13.82
    double chi2 = 0.0;
    const double expect = draws / 3.0;
    for (const auto& [t, n] : histogram) {
        chi2 += (n - expect) * (n - expect) / expect;
    }
    CHECK(chi2 < 13.82);

    const Lexicon lex = Lexicon::from_tsv("w0\tW0\n");
    histogram.clear();
    Rng rng2(7);
    for (int i = 0; i < draws; ++i) {
        const PerturbResult r = perturb_once("w0 w1 w2 w3 w4 w5 w6 w7 w8 w9", &lex, rng2);
        histogram[r.steps[0].type]++;
    }
    CHECK(histogram.size() == 4);
    // df=3, p=0.001 cutoff 16.27
    chi2 = 0.0;
    const double expect4 = draws / 4.0;
    for (const auto& [t, n] : histogram) {
        chi2 += (n - expect4) * (n - expect4) / expect4;
    }
    CHECK(chi2 < 16.27);
}

TEST_CASE("double perturbation uses two distinct types") {
    Rng rng(8);
    const std::string s = "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9";
    for (int trial = 0; trial < 500; ++trial) {
        const PerturbResult r = perturb_multiple(s, nullptr, rng);
        REQUIRE(r.steps.size() == 2);
        CHECK(r.steps[0].type != r.steps[1].type);
    }
}

TEST_CASE("double perturbation recomputes k on the intermediate sentence") {
    Rng rng(12);
    const std::string s = "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9";
    for (int trial = 0; trial < 2000; ++trial) {
        const PerturbResult r = perturb_multiple(s, nullptr, rng);
        if (r.steps[0].type == PerturbType::Deletion &&
            r.steps[1].type == PerturbType::Insertion) {
            // 10 words - 2, then k recomputed on 8 words: round(1.6) = 2 back
            CHECK(r.steps[0].k == 2);
            CHECK(r.steps[1].k == 2);
            CHECK(text::word_count(r.sentence) == 10);
        }
        // length accounting holds for every combination
        long long expect = 10;
        for (const auto& step : r.steps) {
            if (step.type == PerturbType::Insertion) expect += static_cast<long long>(step.k);
            if (step.type == PerturbType::Deletion) expect -= static_cast<long long>(step.k);
        }
        CHECK(static_cast<long long>(text::word_count(r.sentence)) == expect);
    }
}

TEST_CASE("fixed seed reproduces the perturbation exactly") {
    const std::string s = "the quick brown fox jumps over the lazy dog";
    const PerturbResult a = perturb_once(s, nullptr, 1234);
    const PerturbResult b = perturb_once(s, nullptr, 1234);
    CHECK(a.sentence == b.sentence);
    CHECK(a.steps[0].type == b.steps[0].type);
    const PerturbResult c = perturb_multiple(s, nullptr, 99);
    const PerturbResult d = perturb_multiple(s, nullptr, 99);
    CHECK(c.sentence == d.sentence);
    // a different seed changes the outcome at least sometimes
    bool differs = false;
    for (std::uint64_t seed = 0; seed < 10 && !differs; ++seed) {
        differs = perturb_once(s, nullptr, seed).sentence != a.sentence;
    }
    CHECK(differs);
}
