#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mteval/error.hpp"

namespace mteval {

// The ten hypothesis origins found in the ratings data.
enum class Origin {
    Gpt35,
    Google,
    IndicTrans2,
    MsBing,
    Seamless,
    Gold,
    OldX,
    Perturb,
    PerturbedMultiple,
    VersionVN,
};

inline constexpr int kNumOrigins = 10;

enum class QualityClass { Good, Bad, Neutral };

enum class SamplingGroup { Primary, Degraded, Llm, Human };

enum class Domain { General, Governance, Health };

// Source length buckets over whitespace word counts. Boundaries are half-open
// low < w <= high, so a 10-word sentence lands in B0_10.
enum class LengthBucket { B0_10, B10_20, B20_35, B35_100 };

enum class QcRole { None, Original, Repeat };

enum class QcQuality { Good, Bad };

enum class Family { IndoAryan, Dravidian };

enum class Subfamily {
    IaNorth,
    IaNorthWest,
    IaSouth,
    IaEast,
    IaWest,
    IaCentral,
    IaDardic,
    DvSouth,
    DvSouthCentral,
};

struct FamilyTag {
    Family family;
    Subfamily subfamily;
};

struct LanguagePair {
    std::string src;
    std::string tgt;

    bool operator==(const LanguagePair&) const = default;
    auto operator<=>(const LanguagePair&) const = default;
};

// One rater's raw judgment of one (source, hypothesis) item. z and norm are
// filled in by the normalization stages; NaN means "not yet computed".
struct RatingRecord {
    std::string item_id;
    LanguagePair pair;
    std::string source;
    std::string hypothesis;
    Origin origin = Origin::Gold;
    Domain domain = Domain::General;
    LengthBucket bucket = LengthBucket::B0_10;
    std::string rater_id;
    int raw_score = 0; // 0..100
    QcRole qc_role = QcRole::None;
    std::optional<QcQuality> qc_quality;
    std::string reference;
    double z = std::numeric_limits<double>::quiet_NaN();
    double norm = std::numeric_limits<double>::quiet_NaN();
    std::string extra_json; // unrecognized input fields, kept for round-trips
};

struct RatingSet {
    std::vector<RatingRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// A unique rateable unit, before any rating has been attached.
struct SegmentItem {
    LanguagePair pair;
    std::string source;
    std::string hypothesis;
    Origin origin = Origin::Gold;
    Domain domain = Domain::General;
    LengthBucket bucket = LengthBucket::B0_10;
    std::string reference;
};

// A unique (source, hypothesis) with scores aggregated across its raters.
struct FoldedSegment {
    LanguagePair pair;
    std::string source;
    std::string hypothesis;
    Origin origin = Origin::Gold;
    Domain domain = Domain::General;
    LengthBucket bucket = LengthBucket::B0_10;
    std::string reference;
    int n_ratings = 0;
    int n_raters = 0;
    double raw_mean = 0.0;
    double z_mean = 0.0;
    double norm_score = 0.0;
};

// --- names / parsing -------------------------------------------------------

std::string_view origin_name(Origin o);
Origin parse_origin(std::string_view name);

std::string_view quality_name(QualityClass q);
QualityClass parse_quality(std::string_view name);

std::string_view group_name(SamplingGroup g);

std::string_view domain_name(Domain d);
Domain parse_domain(std::string_view name);

std::string_view bucket_name(LengthBucket b);
LengthBucket parse_bucket(std::string_view name);

std::string_view qc_role_name(QcRole r);
QcRole parse_qc_role(std::string_view name);

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

std::string_view subfamily_name(Subfamily s);
Subfamily parse_subfamily(std::string_view name);

// --- language codes --------------------------------------------------------

bool is_known_source(std::string_view code); // eng, hin
bool is_known_target(std::string_view code); // the 13 target codes

const std::vector<std::string>& target_codes();

// Targets exempt from discernment filtering (very low digital presence).
bool is_exempt_target(std::string_view tgt);

// The 21 retained translation directions.
const std::vector<LanguagePair>& comtail_directions();
bool is_comtail_direction(const LanguagePair& p);

// Validates codes only, not direction membership.
LanguagePair make_lang_pair(std::string_view src, std::string_view tgt);
// Parses "src-tgt".
LanguagePair parse_pair(std::string_view code);
std::string pair_code(const LanguagePair& p);

// --- classification --------------------------------------------------------

QualityClass classify_quality(Origin o);
SamplingGroup sampling_group(Origin o);

// Bucket from a whitespace word count; counts above 100 are out of range.
LengthBucket bucket_for_count(std::size_t word_count);
// Bucket from the source text itself.
LengthBucket length_bucket(std::string_view source);

FamilyTag family_of(std::string_view tgt);

} // namespace mteval
