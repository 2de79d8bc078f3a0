#include "mteval/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

#include "mteval/text.hpp"

namespace mteval {

using nlohmann::json;

namespace {

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void require_field(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key)) {
        throw ValidationError("line " + std::to_string(line) + ": missing field '" + key + "'");
    }
}

std::string get_string(const json& j, const char* key, std::size_t line) {
    require_field(j, key, line);
    if (!j.at(key).is_string()) {
        throw ValidationError("line " + std::to_string(line) + ": field '" + key +
                              "' must be a string");
    }
    return j.at(key).get<std::string>();
}

// Parses one ratings line; throws ValidationError with the line number.
RatingRecord parse_record(const json& in, std::size_t line, const LoadOptions& opts) {
    json j = in;
    RatingRecord r;

    r.item_id = get_string(j, "item_id", line);
    if (r.item_id.empty())
        throw ValidationError("line " + std::to_string(line) + ": empty item_id");
    const std::string src = get_string(j, "src", line);
    const std::string tgt = get_string(j, "tgt", line);
    try {
        r.pair = make_lang_pair(src, tgt);
    } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    if (!opts.allowed_pairs.empty() &&
        std::find(opts.allowed_pairs.begin(), opts.allowed_pairs.end(), r.pair) ==
            opts.allowed_pairs.end()) {
        throw ValidationError("line " + std::to_string(line) + ": direction " +
                              pair_code(r.pair) + " not in the allowed set");
    }
    r.source = get_string(j, "source", line);
    if (r.source.empty())
        throw ValidationError("line " + std::to_string(line) + ": empty source");
    r.hypothesis = get_string(j, "hypothesis", line);
    r.rater_id = get_string(j, "rater_id", line);
    if (r.rater_id.empty())
        throw ValidationError("line " + std::to_string(line) + ": empty rater_id");

    try {
        r.origin = parse_origin(get_string(j, "origin", line));
        r.domain = parse_domain(get_string(j, "domain", line));
        r.bucket = length_bucket(r.source);
    } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line) + ": " + e.what());
    }
    if (j.contains("bucket")) {
        LengthBucket stated;
        try {
            stated = parse_bucket(get_string(j, "bucket", line));
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line) + ": " + e.what());
        }
        if (stated != r.bucket) {
            throw ValidationError("line " + std::to_string(line) + ": bucket '" +
                                  std::string(bucket_name(stated)) +
                                  "' does not match source length (" +
                                  std::string(bucket_name(r.bucket)) + ")");
        }
    }

    require_field(j, "raw_score", line);
    const json& score = j.at("raw_score");
    if (!score.is_number_integer() && !score.is_number_unsigned()) {
        throw ValidationError("line " + std::to_string(line) + ": raw_score must be an integer");
    }
    const long long v = score.get<long long>();
    if (v < 0 || v > 100) {
        throw ValidationError("line " + std::to_string(line) + ": raw_score " +
                              std::to_string(v) + " outside [0,100]");
    }
    r.raw_score = static_cast<int>(v);

    if (j.contains("qc_role")) {
        try {
            r.qc_role = parse_qc_role(get_string(j, "qc_role", line));
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line) + ": " + e.what());
        }
    }
    if (j.contains("qc_quality") && !j.at("qc_quality").is_null()) {
        const std::string q = get_string(j, "qc_quality", line);
        if (q == "good") r.qc_quality = QcQuality::Good;
        else if (q == "bad") r.qc_quality = QcQuality::Bad;
        else
            throw ValidationError("line " + std::to_string(line) + ": qc_quality must be good|bad");
    }
    if ((r.qc_role != QcRole::None) != r.qc_quality.has_value()) {
        throw ValidationError("line " + std::to_string(line) +
                              ": qc_quality must be present exactly when qc_role is set");
    }

    if (j.contains("reference") && !j.at("reference").is_null())
        r.reference = get_string(j, "reference", line);
    if (j.contains("z") && j.at("z").is_number()) r.z = j.at("z").get<double>();
    if (j.contains("norm_score") && j.at("norm_score").is_number())
        r.norm = j.at("norm_score").get<double>();

    for (const char* key : {"item_id", "src", "tgt", "source", "hypothesis", "origin", "domain",
                            "bucket", "rater_id", "raw_score", "qc_role", "qc_quality",
                            "reference", "z", "norm_score"}) {
        j.erase(key);
    }
    if (!j.empty()) r.extra_json = j.dump();
    return r;
}

json record_to_json(const RatingRecord& r) {
    json j = r.extra_json.empty() ? json::object() : json::parse(r.extra_json);
    j["item_id"] = r.item_id;
    j["src"] = r.pair.src;
    j["tgt"] = r.pair.tgt;
    j["source"] = r.source;
    j["hypothesis"] = r.hypothesis;
    j["origin"] = origin_name(r.origin);
    j["domain"] = domain_name(r.domain);
    j["bucket"] = bucket_name(r.bucket);
    j["rater_id"] = r.rater_id;
    j["raw_score"] = r.raw_score;
    j["qc_role"] = qc_role_name(r.qc_role);
    if (r.qc_quality) j["qc_quality"] = *r.qc_quality == QcQuality::Good ? "good" : "bad";
    if (!r.reference.empty()) j["reference"] = r.reference;
    if (std::isfinite(r.z)) j["z"] = r.z;
    if (std::isfinite(r.norm)) j["norm_score"] = r.norm;
    return j;
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(len) * 2, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = hex[md[i] >> 4];
        out[2 * i + 1] = hex[md[i] & 0xF];
    }
    return out;
}

std::string segment_key(const LanguagePair& pair, std::string_view source,
                        std::string_view hypothesis) {
    std::string buf;
    buf.reserve(pair.src.size() + pair.tgt.size() + source.size() + hypothesis.size() + 3);
    buf.append(pair.src);
    buf.push_back('\x1f');
    buf.append(pair.tgt);
    buf.push_back('\x1f');
    buf.append(source);
    buf.push_back('\x1f');
    buf.append(hypothesis);
    return sha256_hex(buf);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

LoadResult parse_ratings(std::string_view content, const LoadOptions& opts) {
    LoadResult result;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool any_line = false;
    while (pos <= content.size()) {
        const std::size_t nl = content.find('\n', pos);
        std::string_view line = content.substr(
            pos, nl == std::string_view::npos ? content.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        any_line = true;
        try {
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!j.is_object())
                throw ValidationError("line " + std::to_string(line_no) + ": not a JSON object");
            result.set.records.push_back(parse_record(j, line_no, opts));
        } catch (const ValidationError& e) {
            if (opts.strict) throw;
            result.report.errors.push_back({line_no, e.what()});
        }
    }
    if (!any_line) result.report.warnings.push_back("ratings file is empty");
    return result;
}

LoadResult load_ratings(const std::string& path, const LoadOptions& opts) {
    return parse_ratings(read_file(path), opts);
}

std::string ratings_to_jsonl(const RatingSet& rs) {
    std::string out;
    for (const auto& r : rs.records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

void save_ratings(const RatingSet& rs, const std::string& path) {
    write_file(path, ratings_to_jsonl(rs));
}

std::pair<RatingSet, DropReport> attach_references(const RatingSet& rs) {
    // (src, tgt, source) -> gold hypothesis texts seen for that source
    std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> gold;
    for (const auto& rec : rs.records) {
        if (rec.origin == Origin::Gold) {
            gold[{rec.pair.src, rec.pair.tgt, rec.source}].insert(rec.hypothesis);
        }
    }

    DropReport report;
    for (const auto& [key, texts] : gold) {
        if (texts.size() > 1) report.ambiguous_sources++;
    }

    RatingSet out;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> dropped_items;
    for (const auto& rec : rs.records) {
        auto it = gold.find({rec.pair.src, rec.pair.tgt, rec.source});
        if (it == gold.end()) {
            report.records_dropped++;
            dropped_items.insert({rec.pair.src, rec.pair.tgt, rec.source, rec.hypothesis});
            continue;
        }
        RatingRecord copy = rec;
        // Multiple distinct gold texts for one source are a data wart; the
        // lexicographically smallest wins so reruns agree.
        copy.reference = *it->second.begin();
        out.records.push_back(std::move(copy));
    }
    report.items_dropped = static_cast<int>(dropped_items.size());
    return {std::move(out), report};
}

// --- folded segments ---------------------------------------------------------

std::string folded_to_jsonl(const std::vector<FoldedSegment>& segs) {
    std::string out;
    for (const auto& s : segs) {
        json j;
        j["src"] = s.pair.src;
        j["tgt"] = s.pair.tgt;
        j["source"] = s.source;
        j["hypothesis"] = s.hypothesis;
        j["origin"] = origin_name(s.origin);
        j["domain"] = domain_name(s.domain);
        j["bucket"] = bucket_name(s.bucket);
        j["reference"] = s.reference;
        j["n_ratings"] = s.n_ratings;
        j["n_raters"] = s.n_raters;
        j["raw_mean"] = s.raw_mean;
        j["z_mean"] = s.z_mean;
        j["norm_score"] = s.norm_score;
        j["segment_key"] = segment_key(s.pair, s.source, s.hypothesis);
        out += j.dump();
        out += '\n';
    }
    return out;
}

void save_folded(const std::vector<FoldedSegment>& segs, const std::string& path) {
    write_file(path, folded_to_jsonl(segs));
}

std::vector<FoldedSegment> parse_folded(std::string_view content) {
    std::vector<FoldedSegment> out;
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
        FoldedSegment s;
        s.pair = make_lang_pair(get_string(j, "src", line_no), get_string(j, "tgt", line_no));
        s.source = get_string(j, "source", line_no);
        s.hypothesis = get_string(j, "hypothesis", line_no);
        s.origin = parse_origin(get_string(j, "origin", line_no));
        s.domain = parse_domain(get_string(j, "domain", line_no));
        s.bucket = parse_bucket(get_string(j, "bucket", line_no));
        s.reference = get_string(j, "reference", line_no);
        require_field(j, "n_ratings", line_no);
        require_field(j, "n_raters", line_no);
        s.n_ratings = j.at("n_ratings").get<int>();
        s.n_raters = j.at("n_raters").get<int>();
        require_field(j, "raw_mean", line_no);
        require_field(j, "z_mean", line_no);
        require_field(j, "norm_score", line_no);
        s.raw_mean = j.at("raw_mean").get<double>();
        s.z_mean = j.at("z_mean").get<double>();
        s.norm_score = j.at("norm_score").get<double>();
        if (j.contains("segment_key")) {
            const std::string stated = j.at("segment_key").get<std::string>();
            if (stated != segment_key(s.pair, s.source, s.hypothesis)) {
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": segment_key does not match its texts");
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<FoldedSegment> load_folded(const std::string& path) {
    return parse_folded(read_file(path));
}

// --- segment items -------------------------------------------------------------

std::vector<SegmentItem> parse_segment_items(std::string_view content) {
    std::vector<SegmentItem> out;
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
        SegmentItem s;
        s.pair = make_lang_pair(get_string(j, "src", line_no), get_string(j, "tgt", line_no));
        s.source = get_string(j, "source", line_no);
        if (s.source.empty())
            throw ValidationError("line " + std::to_string(line_no) + ": empty source");
        s.hypothesis = get_string(j, "hypothesis", line_no);
        s.origin = parse_origin(get_string(j, "origin", line_no));
        s.domain = parse_domain(get_string(j, "domain", line_no));
        s.bucket = length_bucket(s.source);
        if (j.contains("reference")) s.reference = get_string(j, "reference", line_no);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SegmentItem> load_segment_items(const std::string& path) {
    return parse_segment_items(read_file(path));
}

// --- score files ------------------------------------------------------------------

ScoreTable parse_scores(std::string_view content) {
    ScoreTable table;
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
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t1 == std::string_view::npos || t2 == std::string_view::npos) {
            throw ValidationError("scores line " + std::to_string(line_no) +
                                  ": expected key<TAB>metric<TAB>score");
        }
        const std::string key(line.substr(0, t1));
        const std::string metric(line.substr(t1 + 1, t2 - t1 - 1));
        const std::string score_str(line.substr(t2 + 1));
        if (key.empty() || metric.empty()) {
            throw ValidationError("scores line " + std::to_string(line_no) +
                                  ": empty key or metric");
        }
        char* end = nullptr;
        const double score = std::strtod(score_str.c_str(), &end);
        if (end == score_str.c_str() || *end != '\0' || !std::isfinite(score)) {
            throw ValidationError("scores line " + std::to_string(line_no) +
                                  ": score is not a finite number: " + score_str);
        }
        auto [it, inserted] = table[metric].emplace(key, score);
        if (!inserted) {
            throw ValidationError("scores line " + std::to_string(line_no) +
                                  ": duplicate score for (" + key + ", " + metric + ")");
        }
    }
    return table;
}

ScoreTable load_scores(const std::vector<std::string>& paths) {
    ScoreTable table;
    for (const auto& path : paths) {
        ScoreTable part = parse_scores(read_file(path));
        for (auto& [metric, rows] : part) {
            for (auto& [key, score] : rows) {
                auto [it, inserted] = table[metric].emplace(key, score);
                if (!inserted) {
                    throw ValidationError("duplicate score for (" + key + ", " + metric +
                                          ") across score files");
                }
            }
        }
    }
    return table;
}

std::string scores_to_tsv(const std::vector<ScoreRow>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.key;
        out += '\t';
        out += r.metric;
        out += '\t';
        out += format_double(r.score, "%.17g");
        out += '\n';
    }
    return out;
}

void save_scores(const std::vector<ScoreRow>& rows, const std::string& path) {
    write_file(path, scores_to_tsv(rows));
}

// --- challenge sets -----------------------------------------------------------------

std::vector<ChallengeItem> parse_challenge(std::string_view content) {
    std::vector<ChallengeItem> out;
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
        ChallengeItem c;
        // Challenge pairs cover arbitrary directions, so codes are free-form.
        c.pair.src = get_string(j, "src", line_no);
        c.pair.tgt = get_string(j, "tgt", line_no);
        if (c.pair.src.empty() || c.pair.tgt.empty())
            throw ValidationError("line " + std::to_string(line_no) + ": empty language code");
        c.phenomenon = get_string(j, "phenomenon", line_no);
        if (c.phenomenon.empty())
            throw ValidationError("line " + std::to_string(line_no) + ": empty phenomenon");
        c.source = get_string(j, "source", line_no);
        c.good_translation = get_string(j, "good_translation", line_no);
        c.incorrect_translation = get_string(j, "incorrect_translation", line_no);
        if (c.good_translation == c.incorrect_translation) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": good and incorrect translations are identical");
        }
        if (j.contains("reference")) c.reference = get_string(j, "reference", line_no);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<ChallengeItem> load_challenge(const std::string& path) {
    return parse_challenge(read_file(path));
}

// --- correlation reports ---------------------------------------------------------------

int CorrelationReport::total_count() const {
    int n = 0;
    for (const auto& r : rows) n += r.count;
    return n;
}

void finalize_report(CorrelationReport& report) {
    const std::size_t m = report.metrics.size();
    report.simple_avg.assign(m, std::nullopt);
    report.weighted_avg.assign(m, std::nullopt);
    for (std::size_t k = 0; k < m; ++k) {
        double sum = 0.0, wsum = 0.0;
        long long weight = 0;
        int n = 0;
        for (const auto& row : report.rows) {
            if (row.taus.size() != m)
                throw ValidationError("report row has wrong number of metric cells");
            if (!row.taus[k].has_value()) continue;
            sum += *row.taus[k];
            wsum += *row.taus[k] * row.count;
            weight += row.count;
            ++n;
        }
        if (n > 0) report.simple_avg[k] = sum / n;
        if (weight > 0) report.weighted_avg[k] = wsum / static_cast<double>(weight);
    }
}

std::string report_to_tsv(const CorrelationReport& report, int precision) {
    std::ostringstream os;
    const std::string fmt = "%." + std::to_string(precision) + "f";
    auto cell = [&](const std::optional<double>& v) {
        return v ? format_double(*v, fmt.c_str()) : std::string("NA");
    };
    os << "src\ttgt\tcount";
    for (const auto& m : report.metrics) os << '\t' << m;
    os << '\n';
    for (const auto& row : report.rows) {
        os << row.pair.src << '\t' << row.pair.tgt << '\t' << row.count;
        for (const auto& t : row.taus) os << '\t' << cell(t);
        os << '\n';
    }
    os << "all*\tall\t" << report.total_count();
    for (const auto& v : report.simple_avg) os << '\t' << cell(v);
    os << '\n';
    os << "all\xe2\x80\xa0\tall\t" << report.total_count();
    for (const auto& v : report.weighted_avg) os << '\t' << cell(v);
    os << '\n';
    return os.str();
}

void emit_report(const CorrelationReport& report, const std::string& path, int precision) {
    write_file(path, report_to_tsv(report, precision));
}

CorrelationReport parse_report_cells(std::string_view content) {
    CorrelationReport report;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos < content.size()) {
        const std::size_t nl = content.find('\n', pos);
        std::string_view line = content.substr(
            pos, nl == std::string_view::npos ? content.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? content.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            cols.emplace_back(line.substr(start, tab == std::string_view::npos ? line.size() - start
                                                                                : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (cols.size() < 4) {
            throw ValidationError("cells line " + std::to_string(line_no) +
                                  ": expected src, tgt, count and at least one metric column");
        }
        if (!have_header) {
            if (cols[0] != "src" || cols[1] != "tgt" || cols[2] != "count") {
                throw ValidationError("cells file must start with header src/tgt/count/metrics");
            }
            report.metrics.assign(cols.begin() + 3, cols.end());
            have_header = true;
            continue;
        }
        if (cols[0].rfind("all", 0) == 0) continue; // footer rows are derived, not data
        CorrelationReport::Row row;
        row.pair = make_lang_pair(cols[0], cols[1]);
        row.count = std::stoi(cols[2]);
        for (std::size_t k = 3; k < cols.size(); ++k) {
            if (cols[k] == "NA") {
                row.taus.push_back(std::nullopt);
            } else {
                row.taus.push_back(std::stod(cols[k]));
            }
        }
        if (row.taus.size() != report.metrics.size()) {
            throw ValidationError("cells line " + std::to_string(line_no) +
                                  ": column count does not match header");
        }
        report.rows.push_back(std::move(row));
    }
    if (!have_header) throw ValidationError("cells file is empty");
    finalize_report(report);
    return report;
}

CorrelationReport load_report_cells(const std::string& path) {
    return parse_report_cells(read_file(path));
}

} // namespace mteval
