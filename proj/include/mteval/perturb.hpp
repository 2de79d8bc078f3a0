#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mteval/rng.hpp"

namespace mteval {

enum class PerturbType { Insertion, Substitution, Deletion, Synonym };

std::string_view perturb_type_name(PerturbType t);

// Exact-surface-form synonym lookup, loaded from TSV `word<TAB>syn1|syn2|...`.
class Lexicon {
public:
    static Lexicon from_tsv(std::string_view content);
    static Lexicon from_file(const std::string& path);

    const std::vector<std::string>* lookup(std::string_view word) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

struct PerturbStep {
    PerturbType type;
    std::size_t k = 0; // words affected, computed on the pre-step length
};

struct PerturbResult {
    std::string sentence;
    std::vector<PerturbStep> steps;
};

// One perturbation: the type is drawn uniformly (synonym only when a lexicon
// is supplied) and k = max(1, round_half_up(0.2 n)) words are affected.
PerturbResult perturb_once(std::string_view sentence, const Lexicon* lexicon, Rng& rng);
PerturbResult perturb_once(std::string_view sentence, const Lexicon* lexicon,
                           std::uint64_t seed);

// Two distinct types applied sequentially; the second k is recomputed on the
// intermediate sentence.
PerturbResult perturb_multiple(std::string_view sentence, const Lexicon* lexicon, Rng& rng);
PerturbResult perturb_multiple(std::string_view sentence, const Lexicon* lexicon,
                               std::uint64_t seed);

// k = max(1, round_half_up(0.2 n))
std::size_t perturb_word_budget(std::size_t n_words);

} // namespace mteval
