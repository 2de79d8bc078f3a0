#include "mteval/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mteval/data_io.hpp"
#include "mteval/error.hpp"
#include "mteval/text.hpp"

namespace mteval {

std::string_view perturb_type_name(PerturbType t) {
    switch (t) {
    case PerturbType::Insertion: return "insertion";
    case PerturbType::Substitution: return "substitution";
    case PerturbType::Deletion: return "deletion";
    case PerturbType::Synonym: return "synonym";
    }
    return "?";
}

Lexicon Lexicon::from_tsv(std::string_view content) {
    Lexicon lex;
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
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0) {
            throw ValidationError("lexicon line " + std::to_string(line_no) +
                                  ": expected word<TAB>syn1|syn2|...");
        }
        const std::string word(line.substr(0, tab));
        std::vector<std::string> syns;
        std::string_view rest = line.substr(tab + 1);
        while (!rest.empty()) {
            const std::size_t bar = rest.find('|');
            std::string_view syn = rest.substr(0, bar);
            if (!syn.empty()) syns.emplace_back(syn);
            if (bar == std::string_view::npos) break;
            rest = rest.substr(bar + 1);
        }
        if (syns.empty()) {
            throw ValidationError("lexicon line " + std::to_string(line_no) +
                                  ": no synonyms for '" + word + "'");
        }
        lex.entries_[word] = std::move(syns);
    }
    return lex;
}

Lexicon Lexicon::from_file(const std::string& path) { return from_tsv(read_file(path)); }

const std::vector<std::string>* Lexicon::lookup(std::string_view word) const {
    const auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

std::size_t perturb_word_budget(std::size_t n_words) {
    const std::size_t rounded =
        static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(n_words) + 0.5));
    return std::max<std::size_t>(1, rounded);
}

namespace {

// k distinct positions in [0, n)
std::vector<std::size_t> pick_positions(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    rng.shuffle(all);
    all.resize(std::min(k, n));
    std::sort(all.begin(), all.end());
    return all;
}

// Replacement drawn from the sentence's own vocabulary, different from the
// current word whenever the vocabulary offers an alternative.
std::string draw_replacement(const std::vector<std::string>& vocab, const std::string& current,
                             Rng& rng) {
    if (vocab.size() < 2) return vocab.empty() ? current : vocab[0];
    std::string pick;
    do {
        pick = vocab[rng.below(vocab.size())];
    } while (pick == current);
    return pick;
}

std::vector<std::string> distinct_vocab(const std::vector<std::string>& words) {
    std::set<std::string> seen(words.begin(), words.end());
    return {seen.begin(), seen.end()};
}

std::vector<std::string> apply_step(const std::vector<std::string>& words, PerturbType type,
                                    std::size_t k, const Lexicon* lexicon, Rng& rng) {
    std::vector<std::string> out = words;
    const std::vector<std::string> vocab = distinct_vocab(words);
    switch (type) {
    case PerturbType::Insertion: {
        for (std::size_t i = 0; i < k; ++i) {
            const std::string word = vocab[rng.below(vocab.size())];
            const std::size_t pos = rng.below(out.size() + 1);
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), word);
        }
        break;
    }
    case PerturbType::Deletion: {
        const auto positions = pick_positions(out.size(), k, rng);
        for (auto it = positions.rbegin(); it != positions.rend(); ++it) {
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(*it));
        }
        break;
    }
    case PerturbType::Substitution: {
        for (std::size_t pos : pick_positions(out.size(), k, rng)) {
            out[pos] = draw_replacement(vocab, out[pos], rng);
        }
        break;
    }
    case PerturbType::Synonym: {
        // Positions with lexicon coverage get a synonym; if coverage falls
        // short of k, the remainder is topped up with substitution.
        std::vector<std::size_t> covered, uncovered;
        for (std::size_t i = 0; i < out.size(); ++i) {
            (lexicon && lexicon->lookup(out[i]) ? covered : uncovered).push_back(i);
        }
        rng.shuffle(covered);
        const std::size_t syn_n = std::min(k, covered.size());
        for (std::size_t i = 0; i < syn_n; ++i) {
            const auto& syns = *lexicon->lookup(out[covered[i]]);
            out[covered[i]] = syns[rng.below(syns.size())];
        }
        std::size_t remaining = k - syn_n;
        if (remaining > 0) {
            std::vector<std::size_t> pool(covered.begin() + static_cast<std::ptrdiff_t>(syn_n),
                                          covered.end());
            pool.insert(pool.end(), uncovered.begin(), uncovered.end());
            rng.shuffle(pool);
            for (std::size_t i = 0; i < remaining && i < pool.size(); ++i) {
                out[pool[i]] = draw_replacement(vocab, out[pool[i]], rng);
            }
        }
        break;
    }
    }
    return out;
}

std::vector<PerturbType> admissible_types(const Lexicon* lexicon) {
    std::vector<PerturbType> types = {PerturbType::Insertion, PerturbType::Substitution,
                                      PerturbType::Deletion};
    if (lexicon != nullptr) types.push_back(PerturbType::Synonym);
    return types;
}

} // namespace

PerturbResult perturb_once(std::string_view sentence, const Lexicon* lexicon, Rng& rng) {
    const std::vector<std::string> words = text::words(sentence);
    if (words.empty()) throw ValidationError("perturb: empty sentence");

    const auto types = admissible_types(lexicon);
    const PerturbType type = types[rng.below(types.size())];
    const std::size_t k = perturb_word_budget(words.size());

    PerturbResult result;
    result.steps.push_back({type, k});
    result.sentence = text::join(apply_step(words, type, k, lexicon, rng), " ");
    return result;
}

PerturbResult perturb_once(std::string_view sentence, const Lexicon* lexicon,
                           std::uint64_t seed) {
    Rng rng(seed);
    return perturb_once(sentence, lexicon, rng);
}

PerturbResult perturb_multiple(std::string_view sentence, const Lexicon* lexicon, Rng& rng) {
    std::vector<std::string> words = text::words(sentence);
    if (words.empty()) throw ValidationError("perturb: empty sentence");

    // An ordered pair of distinct types, uniform over all permutations.
    auto types = admissible_types(lexicon);
    const std::size_t first = rng.below(types.size());
    const PerturbType t1 = types[first];
    types.erase(types.begin() + static_cast<std::ptrdiff_t>(first));
    const PerturbType t2 = types[rng.below(types.size())];

    PerturbResult result;
    const std::size_t k1 = perturb_word_budget(words.size());
    words = apply_step(words, t1, k1, lexicon, rng);
    result.steps.push_back({t1, k1});
    if (words.empty()) {
        throw ValidationError("perturb: sentence vanished after the first perturbation; "
                              "double perturbation needs at least 2 words");
    }
    const std::size_t k2 = perturb_word_budget(words.size());
    words = apply_step(words, t2, k2, lexicon, rng);
    result.steps.push_back({t2, k2});
    result.sentence = text::join(words, " ");
    return result;
}

PerturbResult perturb_multiple(std::string_view sentence, const Lexicon* lexicon,
                               std::uint64_t seed) {
    Rng rng(seed);
    return perturb_multiple(sentence, lexicon, rng);
}

} // namespace mteval
