#include "mteval/taskgen.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"

#include "mteval/data_io.hpp"
#include "mteval/error.hpp"

namespace mteval {

using nlohmann::json;

std::vector<Origin> sample_hypotheses(const std::vector<Origin>& available, Rng& rng) {
    std::vector<Origin> primary, degraded, llm, human;
    for (Origin o : available) {
        switch (sampling_group(o)) {
        case SamplingGroup::Primary: primary.push_back(o); break;
        case SamplingGroup::Degraded: degraded.push_back(o); break;
        case SamplingGroup::Llm: llm.push_back(o); break;
        case SamplingGroup::Human: human.push_back(o); break;
        }
    }
    const auto dedupe = [](std::vector<Origin>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedupe(primary);
    dedupe(degraded);
    dedupe(llm);
    dedupe(human);
    if (primary.size() < 2)
        throw ValidationError("sample_hypotheses: need at least 2 primary origins, have " +
                              std::to_string(primary.size()));
    if (degraded.empty()) throw ValidationError("sample_hypotheses: no degraded origin available");
    if (llm.empty()) throw ValidationError("sample_hypotheses: no LLM origin available");
    if (human.empty()) throw ValidationError("sample_hypotheses: no human origin available");

    std::vector<Origin> out;
    const std::size_t p1 = rng.below(primary.size());
    std::size_t p2;
    do {
        p2 = rng.below(primary.size());
    } while (p2 == p1);
    out.push_back(primary[p1]);
    out.push_back(primary[p2]);
    out.push_back(degraded[rng.below(degraded.size())]);
    out.push_back(llm[rng.below(llm.size())]);
    out.push_back(human[rng.below(human.size())]);
    return out;
}

std::vector<Origin> sample_hypotheses(const std::vector<Origin>& available, std::uint64_t seed) {
    Rng rng(seed);
    return sample_hypotheses(available, rng);
}

namespace {

// Four distinct QC slots (good original/repeat, bad original/repeat) with each
// repeat at least `gap` slots after its original. Rejection sampling; the slot
// space is dense enough that this terminates quickly.
struct QcSlots {
    std::size_t good_orig, good_rep, bad_orig, bad_rep;
};

QcSlots draw_qc_slots(std::size_t file_len, Rng& rng) {
    // Short trailing files cannot honor the full gap; shrink it just enough
    // to stay feasible (two pairs need gap <= len - 2).
    const std::size_t gap = std::min<std::size_t>(kQcRepeatMinGap, file_len - 2);
    while (true) {
        const std::size_t go = rng.below(file_len - gap);
        const std::size_t gr = go + gap + rng.below(file_len - go - gap);
        const std::size_t bo = rng.below(file_len - gap);
        const std::size_t br = bo + gap + rng.below(file_len - bo - gap);
        const std::set<std::size_t> distinct = {go, gr, bo, br};
        if (distinct.size() == 4) return {go, gr, bo, br};
    }
}

} // namespace

std::vector<TaskFile> build_task_files(const std::vector<SegmentItem>& items,
                                       const std::vector<SegmentItem>& qc_pool,
                                       std::uint64_t seed) {
    if (items.empty()) throw ValidationError("build_task_files: no items");
    std::vector<const SegmentItem*> qc_good, qc_bad;
    for (const auto& item : qc_pool) {
        switch (classify_quality(item.origin)) {
        case QualityClass::Good: qc_good.push_back(&item); break;
        case QualityClass::Bad: qc_bad.push_back(&item); break;
        case QualityClass::Neutral:
            throw ValidationError("qc pool must contain only good- or bad-class origins");
        }
    }
    if (qc_good.empty() || qc_bad.empty())
        throw ValidationError("qc pool needs at least one good-class and one bad-class item");

    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(seed, "taskgen:order"));
    shuffle_rng.shuffle(order);

    std::vector<TaskFile> files;
    std::size_t consumed = 0;
    std::size_t file_no = 0;
    while (consumed < order.size()) {
        const std::size_t regular =
            std::min<std::size_t>(kRegularPerFile, order.size() - consumed);
        const std::size_t file_len = regular + 4;

        Rng rng(derive_seed(seed, "taskgen:file:" + std::to_string(file_no)));
        const QcSlots qc = draw_qc_slots(file_len, rng);
        const SegmentItem* good = qc_good[rng.below(qc_good.size())];
        const SegmentItem* bad = qc_bad[rng.below(qc_bad.size())];

        char buf[32];
        std::snprintf(buf, sizeof(buf), "task_%04zu", file_no);
        TaskFile file;
        file.file_id = buf;
        file.slots.resize(file_len);

        const std::string good_id = file.file_id + ":qc_good";
        const std::string bad_id = file.file_id + ":qc_bad";
        for (std::size_t s = 0; s < file_len; ++s) {
            TaskSlot& slot = file.slots[s];
            slot.slot = static_cast<int>(s);
            if (s == qc.good_orig || s == qc.good_rep) {
                slot.item = *good;
                slot.item_id = good_id;
                slot.qc_role = s == qc.good_orig ? QcRole::Original : QcRole::Repeat;
                slot.qc_quality = QcQuality::Good;
            } else if (s == qc.bad_orig || s == qc.bad_rep) {
                slot.item = *bad;
                slot.item_id = bad_id;
                slot.qc_role = s == qc.bad_orig ? QcRole::Original : QcRole::Repeat;
                slot.qc_quality = QcQuality::Bad;
            } else {
                const std::size_t idx = order[consumed++];
                slot.item = items[idx];
                slot.item_id = file.file_id + ":r" + std::to_string(idx);
            }
        }
        files.push_back(std::move(file));
        ++file_no;
    }
    return files;
}

std::string task_file_to_jsonl(const TaskFile& file) {
    std::string out;
    for (const auto& slot : file.slots) {
        json meta;
        meta["item_id"] = slot.item_id;
        meta["origin"] = origin_name(slot.item.origin);
        meta["domain"] = domain_name(slot.item.domain);
        meta["bucket"] = bucket_name(slot.item.bucket);
        meta["qc_role"] = qc_role_name(slot.qc_role);
        if (slot.qc_quality)
            meta["qc_quality"] = *slot.qc_quality == QcQuality::Good ? "good" : "bad";
        if (!slot.item.reference.empty()) meta["reference"] = slot.item.reference;
        const std::string meta_json = meta.dump();

        // Hex-encoded so the rater-facing line carries no legible QC markers.
        static const char* hex = "0123456789abcdef";
        std::string opaque;
        opaque.reserve(meta_json.size() * 2);
        for (unsigned char c : meta_json) {
            opaque.push_back(hex[c >> 4]);
            opaque.push_back(hex[c & 0xF]);
        }

        json j;
        j["slot"] = slot.slot;
        j["src"] = slot.item.pair.src;
        j["tgt"] = slot.item.pair.tgt;
        j["source"] = slot.item.source;
        j["hypothesis"] = slot.item.hypothesis;
        j["meta"] = opaque;
        out += j.dump();
        out += '\n';
    }
    return out;
}

TaskFile parse_task_file(std::string_view content, std::string file_id) {
    TaskFile file;
    file.file_id = std::move(file_id);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        const std::size_t nl = content.find('\n', pos);
        std::string_view line = content.substr(
            pos, nl == std::string_view::npos ? content.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? content.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
        TaskSlot slot;
        slot.slot = j.at("slot").get<int>();
        slot.item.pair = make_lang_pair(j.at("src").get<std::string>(), j.at("tgt").get<std::string>());
        slot.item.source = j.at("source").get<std::string>();
        slot.item.hypothesis = j.at("hypothesis").get<std::string>();

        const std::string opaque = j.at("meta").get<std::string>();
        if (opaque.size() % 2 != 0)
            throw ValidationError("line " + std::to_string(line_no) + ": bad meta field");
        std::string meta_json;
        meta_json.reserve(opaque.size() / 2);
        const auto nibble = [&](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            throw ValidationError("line " + std::to_string(line_no) + ": bad meta field");
        };
        for (std::size_t i = 0; i < opaque.size(); i += 2) {
            meta_json.push_back(static_cast<char>(nibble(opaque[i]) * 16 + nibble(opaque[i + 1])));
        }
        const json meta = json::parse(meta_json);
        slot.item_id = meta.at("item_id").get<std::string>();
        slot.item.origin = parse_origin(meta.at("origin").get<std::string>());
        slot.item.domain = parse_domain(meta.at("domain").get<std::string>());
        slot.item.bucket = parse_bucket(meta.at("bucket").get<std::string>());
        slot.qc_role = parse_qc_role(meta.at("qc_role").get<std::string>());
        if (meta.contains("qc_quality")) {
            slot.qc_quality = meta.at("qc_quality").get<std::string>() == "good"
                                  ? QcQuality::Good
                                  : QcQuality::Bad;
        }
        if (meta.contains("reference")) slot.item.reference = meta.at("reference").get<std::string>();
        file.slots.push_back(std::move(slot));
    }
    return file;
}

} // namespace mteval
