#include "mteval/core.hpp"

#include <algorithm>
#include <array>

#include "mteval/text.hpp"

namespace mteval {

namespace {

constexpr std::array<std::string_view, kNumOrigins> kOriginNames = {
    "GPT3.5",  "Google", "IndicTrans2", "MS_Bing",            "Seamless",
    "gold",    "oldX",   "perturb",     "perturbed_multiple", "versionvN",
};

constexpr std::array<std::string_view, 3> kQualityNames = {"good", "bad", "neutral"};
constexpr std::array<std::string_view, 4> kGroupNames = {"primary", "degraded", "LLM", "human"};
constexpr std::array<std::string_view, 3> kDomainNames = {"general", "governance", "health"};
constexpr std::array<std::string_view, 4> kBucketNames = {"0-10", "10-20", "20-35", "35-100"};
constexpr std::array<std::string_view, 3> kQcRoleNames = {"none", "qc_original", "qc_repeat"};
constexpr std::array<std::string_view, 2> kFamilyNames = {"indo-aryan", "dravidian"};
constexpr std::array<std::string_view, 9> kSubfamilyNames = {
    "ia-north", "ia-north-west", "ia-south",  "ia-east",         "ia-west",
    "ia-central", "ia-dardic",   "dv-south",  "dv-south-central",
};

const std::vector<std::string> kTargets = {"ban", "doi", "guj", "hin", "kan", "kas", "mar",
                                           "odi", "pan", "snd", "tam", "tel", "urd"};

template <std::size_t N>
int index_of(const std::array<std::string_view, N>& names, std::string_view name) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

} // namespace

std::string_view origin_name(Origin o) { return kOriginNames[static_cast<int>(o)]; }

Origin parse_origin(std::string_view name) {
    const int i = index_of(kOriginNames, name);
    if (i < 0) throw ValidationError("unknown origin: " + std::string(name));
    return static_cast<Origin>(i);
}

std::string_view quality_name(QualityClass q) { return kQualityNames[static_cast<int>(q)]; }

QualityClass parse_quality(std::string_view name) {
    const int i = index_of(kQualityNames, name);
    if (i < 0) throw ValidationError("unknown quality class: " + std::string(name));
    return static_cast<QualityClass>(i);
}

std::string_view group_name(SamplingGroup g) { return kGroupNames[static_cast<int>(g)]; }

std::string_view domain_name(Domain d) { return kDomainNames[static_cast<int>(d)]; }

Domain parse_domain(std::string_view name) {
    const int i = index_of(kDomainNames, name);
    if (i < 0) throw ValidationError("unknown domain: " + std::string(name));
    return static_cast<Domain>(i);
}

std::string_view bucket_name(LengthBucket b) { return kBucketNames[static_cast<int>(b)]; }

LengthBucket parse_bucket(std::string_view name) {
    const int i = index_of(kBucketNames, name);
    if (i < 0) throw ValidationError("unknown length bucket: " + std::string(name));
    return static_cast<LengthBucket>(i);
}

std::string_view qc_role_name(QcRole r) { return kQcRoleNames[static_cast<int>(r)]; }

QcRole parse_qc_role(std::string_view name) {
    const int i = index_of(kQcRoleNames, name);
    if (i < 0) throw ValidationError("unknown qc_role: " + std::string(name));
    return static_cast<QcRole>(i);
}

std::string_view family_name(Family f) { return kFamilyNames[static_cast<int>(f)]; }

Family parse_family(std::string_view name) {
    const int i = index_of(kFamilyNames, name);
    if (i < 0) throw ValidationError("unknown family: " + std::string(name));
    return static_cast<Family>(i);
}

std::string_view subfamily_name(Subfamily s) { return kSubfamilyNames[static_cast<int>(s)]; }

Subfamily parse_subfamily(std::string_view name) {
    const int i = index_of(kSubfamilyNames, name);
    if (i < 0) throw ValidationError("unknown subfamily: " + std::string(name));
    return static_cast<Subfamily>(i);
}

bool is_known_source(std::string_view code) { return code == "eng" || code == "hin"; }

bool is_known_target(std::string_view code) {
    return std::find(kTargets.begin(), kTargets.end(), code) != kTargets.end();
}

const std::vector<std::string>& target_codes() { return kTargets; }

bool is_exempt_target(std::string_view tgt) {
    return tgt == "kas" || tgt == "snd" || tgt == "doi";
}

const std::vector<LanguagePair>& comtail_directions() {
    // hin-tam was dropped from the retained set (too few ratings).
    static const std::vector<LanguagePair> dirs = [] {
        std::vector<LanguagePair> v;
        for (const char* t : {"ban", "guj", "hin", "kan", "kas", "mar", "odi", "pan", "tam", "tel", "urd"})
            v.push_back({"eng", t});
        for (const char* t : {"ban", "doi", "guj", "kan", "mar", "odi", "pan", "snd", "tel", "urd"})
            v.push_back({"hin", t});
        return v;
    }();
    return dirs;
}

bool is_comtail_direction(const LanguagePair& p) {
    const auto& dirs = comtail_directions();
    return std::find(dirs.begin(), dirs.end(), p) != dirs.end();
}

LanguagePair make_lang_pair(std::string_view src, std::string_view tgt) {
    if (!is_known_source(src))
        throw ValidationError("unknown source language code: " + std::string(src));
    if (!is_known_target(tgt))
        throw ValidationError("unknown target language code: " + std::string(tgt));
    return {std::string(src), std::string(tgt)};
}

LanguagePair parse_pair(std::string_view code) {
    const auto dash = code.find('-');
    if (dash == std::string_view::npos)
        throw ValidationError("language pair must look like src-tgt, got: " + std::string(code));
    return make_lang_pair(code.substr(0, dash), code.substr(dash + 1));
}

std::string pair_code(const LanguagePair& p) { return p.src + "-" + p.tgt; }

QualityClass classify_quality(Origin o) {
    switch (o) {
    case Origin::VersionVN:
    case Origin::Gold:
    case Origin::MsBing:
    case Origin::Google:
        return QualityClass::Good;
    case Origin::Perturb:
    case Origin::OldX:
    case Origin::PerturbedMultiple:
        return QualityClass::Bad;
    case Origin::Gpt35:
    case Origin::IndicTrans2:
    case Origin::Seamless:
        return QualityClass::Neutral;
    }
    throw ValidationError("invalid origin value");
}

SamplingGroup sampling_group(Origin o) {
    switch (o) {
    case Origin::MsBing:
    case Origin::Google:
    case Origin::Seamless:
    case Origin::IndicTrans2:
    case Origin::VersionVN:
        return SamplingGroup::Primary;
    case Origin::OldX:
    case Origin::Perturb:
    case Origin::PerturbedMultiple:
        return SamplingGroup::Degraded;
    case Origin::Gpt35:
        return SamplingGroup::Llm;
    case Origin::Gold:
        return SamplingGroup::Human;
    }
    throw ValidationError("invalid origin value");
}

LengthBucket bucket_for_count(std::size_t word_count) {
    if (word_count == 0) throw ValidationError("cannot bucket an empty sentence");
    if (word_count <= 10) return LengthBucket::B0_10;
    if (word_count <= 20) return LengthBucket::B10_20;
    if (word_count <= 35) return LengthBucket::B20_35;
    if (word_count <= 100) return LengthBucket::B35_100;
    throw ValidationError("source length out of range: " + std::to_string(word_count) +
                          " words (buckets cover 1-100)");
}

LengthBucket length_bucket(std::string_view source) {
    return bucket_for_count(text::word_count(source));
}

FamilyTag family_of(std::string_view tgt) {
    if (tgt == "doi") return {Family::IndoAryan, Subfamily::IaNorth};
    if (tgt == "pan" || tgt == "snd") return {Family::IndoAryan, Subfamily::IaNorthWest};
    if (tgt == "mar") return {Family::IndoAryan, Subfamily::IaSouth};
    if (tgt == "ban" || tgt == "odi") return {Family::IndoAryan, Subfamily::IaEast};
    if (tgt == "guj") return {Family::IndoAryan, Subfamily::IaWest};
    if (tgt == "hin" || tgt == "urd") return {Family::IndoAryan, Subfamily::IaCentral};
    if (tgt == "kas") return {Family::IndoAryan, Subfamily::IaDardic};
    if (tgt == "tam" || tgt == "kan") return {Family::Dravidian, Subfamily::DvSouth};
    if (tgt == "tel") return {Family::Dravidian, Subfamily::DvSouthCentral};
    throw ValidationError("unknown target language code: " + std::string(tgt));
}

} // namespace mteval
