#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

#include "mteval/taskgen.hpp"

using namespace mteval;

namespace {

SegmentItem item(const std::string& tag, Origin origin) {
    SegmentItem s;
    s.pair = make_lang_pair("eng", "hin");
    s.source = "source " + tag;
    s.hypothesis = "hyp " + tag;
    s.origin = origin;
    s.domain = Domain::General;
    s.bucket = length_bucket(s.source);
    s.reference = "ref " + tag;
    return s;
}

std::vector<SegmentItem> regular_items(int n) {
    std::vector<SegmentItem> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(item("r" + std::to_string(i), Origin::Google));
    }
    return out;
}

std::vector<SegmentItem> qc_pool() {
    return {item("qgold", Origin::Gold), item("qgold2", Origin::VersionVN),
            item("qbad", Origin::Perturb), item("qbad2", Origin::OldX)};
}

const std::vector<Origin> kAllOrigins = {
    Origin::Gpt35,   Origin::Google, Origin::IndicTrans2,       Origin::MsBing,
    Origin::Seamless, Origin::Gold,  Origin::OldX,              Origin::Perturb,
    Origin::PerturbedMultiple,       Origin::VersionVN};

} // namespace

TEST_CASE("hypothesis sampling composition") {
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const auto picked = sample_hypotheses(kAllOrigins, rng);
        REQUIRE(picked.size() == 5);
        std::map<SamplingGroup, int> groups;
        for (Origin o : picked) groups[sampling_group(o)]++;
        CHECK(groups[SamplingGroup::Primary] == 2);
        CHECK(groups[SamplingGroup::Degraded] == 1);
        CHECK(groups[SamplingGroup::Llm] == 1);
        CHECK(groups[SamplingGroup::Human] == 1);
        // the two primary draws are distinct engines
        CHECK(picked[0] != picked[1]);
        // the human group is a singleton, so gold is always present
        CHECK(std::count(picked.begin(), picked.end(), Origin::Gold) == 1);
    }
}

TEST_CASE("hypothesis sampling names the missing group") {
    Rng rng(4);
    const std::vector<Origin> one_primary = {Origin::Google, Origin::Perturb, Origin::Gpt35,
                                             Origin::Gold};
    CHECK_THROWS_WITH_AS(sample_hypotheses(one_primary, rng), doctest::Contains("primary"),
                         ValidationError);
    const std::vector<Origin> no_llm = {Origin::Google, Origin::MsBing, Origin::Perturb,
                                        Origin::Gold};
    CHECK_THROWS_WITH_AS(sample_hypotheses(no_llm, rng), doctest::Contains("LLM"),
                         ValidationError);
    const std::vector<Origin> no_human = {Origin::Google, Origin::MsBing, Origin::Perturb,
                                          Origin::Gpt35};
    CHECK_THROWS_WITH_AS(sample_hypotheses(no_human, rng), doctest::Contains("human"),
                         ValidationError);
    const std::vector<Origin> no_degraded = {Origin::Google, Origin::MsBing, Origin::Gpt35,
                                             Origin::Gold};
    CHECK_THROWS_WITH_AS(sample_hypotheses(no_degraded, rng), doctest::Contains("degraded"),
                         ValidationError);
}

TEST_CASE("80 regular items make two full 44-slot files") {
    const auto files = build_task_files(regular_items(80), qc_pool(), 5);
    REQUIRE(files.size() == 2);
    for (const auto& f : files) {
        CHECK(f.slots.size() == kTaskFileSlots);
        int originals = 0, repeats = 0, regular = 0;
        for (const auto& slot : f.slots) {
            if (slot.qc_role == QcRole::Original) ++originals;
            else if (slot.qc_role == QcRole::Repeat) ++repeats;
            else ++regular;
        }
        CHECK(originals == 2);
        CHECK(repeats == 2);
        CHECK(regular == kRegularPerFile);
    }
}

TEST_CASE("QC repeats reference identical text and sit 10+ slots after originals") {
    const auto files = build_task_files(regular_items(400), qc_pool(), 17);
    for (const auto& f : files) {
        std::map<std::string, std::vector<const TaskSlot*>> qc_by_id;
        for (const auto& slot : f.slots) {
            if (slot.qc_role != QcRole::None) qc_by_id[slot.item_id].push_back(&slot);
        }
        REQUIRE(qc_by_id.size() == 2);
        for (const auto& [id, slots] : qc_by_id) {
            REQUIRE(slots.size() == 2);
            const TaskSlot* orig = slots[0]->qc_role == QcRole::Original ? slots[0] : slots[1];
            const TaskSlot* rep = slots[0]->qc_role == QcRole::Repeat ? slots[0] : slots[1];
            CHECK(orig->qc_role == QcRole::Original);
            CHECK(rep->qc_role == QcRole::Repeat);
            CHECK(orig->item.source == rep->item.source);
            CHECK(orig->item.hypothesis == rep->item.hypothesis);
            CHECK(rep->slot - orig->slot >= kQcRepeatMinGap);
            CHECK(orig->qc_quality == rep->qc_quality);
        }
    }
}

TEST_CASE("every regular item appears exactly once across all files") {
    const auto items = regular_items(173);
    const auto files = build_task_files(items, qc_pool(), 23);
    std::map<std::string, int> seen;
    for (const auto& f : files) {
        for (const auto& slot : f.slots) {
            if (slot.qc_role == QcRole::None) seen[slot.item.hypothesis]++;
        }
    }
    CHECK(seen.size() == items.size());
    for (const auto& [hyp, n] : seen) CHECK(n == 1);
}

TEST_CASE("trailing short file still carries the full QC block") {
    // 50 regular items: one full file and one short file of 10 + 4 slots
    const auto files = build_task_files(regular_items(50), qc_pool(), 29);
    REQUIRE(files.size() == 2);
    CHECK(files[0].slots.size() == 44);
    CHECK(files[1].slots.size() == 14);
    int qc = 0;
    for (const auto& slot : files[1].slots) {
        if (slot.qc_role != QcRole::None) ++qc;
    }
    CHECK(qc == 4);
}

TEST_CASE("one good and one bad QC item per file") {
    const auto files = build_task_files(regular_items(120), qc_pool(), 31);
    for (const auto& f : files) {
        int good = 0, bad = 0;
        for (const auto& slot : f.slots) {
            if (slot.qc_role == QcRole::Original) {
                if (*slot.qc_quality == QcQuality::Good) ++good;
                else ++bad;
            }
        }
        CHECK(good == 1);
        CHECK(bad == 1);
    }
}

TEST_CASE("qc pool must provide both classes") {
    CHECK_THROWS_AS(build_task_files(regular_items(10), {}, 1), ValidationError);
    const std::vector<SegmentItem> only_good = {item("g", Origin::Gold)};
    CHECK_THROWS_AS(build_task_files(regular_items(10), only_good, 1), ValidationError);
    const std::vector<SegmentItem> with_neutral = {item("g", Origin::Gold),
                                                   item("b", Origin::Perturb),
                                                   item("n", Origin::Gpt35)};
    CHECK_THROWS_AS(build_task_files(regular_items(10), with_neutral, 1), ValidationError);
}

TEST_CASE("determinism under seed, variation across seeds") {
    const auto items = regular_items(90);
    const auto a = build_task_files(items, qc_pool(), 7);
    const auto b = build_task_files(items, qc_pool(), 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(task_file_to_jsonl(a[i]) == task_file_to_jsonl(b[i]));
    }
    const auto c = build_task_files(items, qc_pool(), 8);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size() && !any_diff; ++i) {
        any_diff = task_file_to_jsonl(a[i]) != task_file_to_jsonl(c[i]);
    }
    CHECK(any_diff);
}

TEST_CASE("task file lines hide QC markers behind the meta field") {
    const auto files = build_task_files(regular_items(40), qc_pool(), 11);
    const std::string jsonl = task_file_to_jsonl(files[0]);
    CHECK(jsonl.find("qc_role") == std::string::npos);
    CHECK(jsonl.find("qc_original") == std::string::npos);
    CHECK(jsonl.find("\"origin\"") == std::string::npos);

    const TaskFile back = parse_task_file(jsonl, files[0].file_id);
    REQUIRE(back.slots.size() == files[0].slots.size());
    for (std::size_t i = 0; i < back.slots.size(); ++i) {
        CHECK(back.slots[i].item_id == files[0].slots[i].item_id);
        CHECK(back.slots[i].qc_role == files[0].slots[i].qc_role);
        CHECK(back.slots[i].item.origin == files[0].slots[i].item.origin);
        CHECK(back.slots[i].item.reference == files[0].slots[i].item.reference);
    }
}
