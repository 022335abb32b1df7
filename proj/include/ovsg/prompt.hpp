#pragma once
// Text prompt construction: positives plus sampled negative words, object
// section first, relation section second, padded to a fixed token budget.
// Layout: [CLS] obj1. obj2. ... [SEP] rel1. rel2. ... [SEP] [PAD] ...

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ovsg/core.hpp"

namespace ovsg {

struct Prompt {
    std::vector<std::string> tokens;
    std::set<std::string> positives;
    std::set<std::string> negatives;
    int cap = 0;  // M: |positives| + |negatives| <= cap
};

// Builds the prompt for a set of positive concept names. Negatives are
// sampled uniformly without replacement from the rest of the vocabulary
// until the total word count reaches m (or the vocabulary is exhausted).
// Deterministic per seed.
inline Prompt build_prompt(const std::vector<std::string>& positives,
                           const ConceptSpace& cs, int m, std::uint64_t seed,
                           int token_budget = 256) {
    require(m >= 0, "build_prompt: negative cap");
    Prompt prompt;
    prompt.cap = m;

    std::set<std::string> positive_set;
    for (const auto& raw : positives) {
        std::string name = normalize_name(raw);
        require(cs.find_object(name) != nullptr || cs.find_relation(name) != nullptr,
                "build_prompt: positive not in vocabulary: " + name);
        positive_set.insert(name);
    }
    require(static_cast<int>(positive_set.size()) <= m,
            "build_prompt: cap smaller than the positive set");
    prompt.positives = positive_set;

    // candidate negatives, sorted for a reproducible sampling order
    std::vector<std::string> pool;
    for (const auto& c : cs.objects)
        if (!positive_set.count(c.name)) pool.push_back(c.name);
    for (const auto& c : cs.relations)
        if (!positive_set.count(c.name)) pool.push_back(c.name);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    Rng rng(mix_seed(seed, 0x9C0));
    std::size_t want = static_cast<std::size_t>(m) - positive_set.size();
    std::vector<std::string> sampled = sample_without_replacement(pool, want, rng);
    prompt.negatives.insert(sampled.begin(), sampled.end());

    // section order: sorted positives first, negatives in sampled order
    std::vector<std::string> object_words;
    std::vector<std::string> relation_words;
    for (const auto& name : positive_set)
        (cs.find_object(name) ? object_words : relation_words).push_back(name);
    for (const auto& name : sampled)
        (cs.find_object(name) ? object_words : relation_words).push_back(name);

    prompt.tokens.push_back("[CLS]");
    for (const auto& w : object_words) prompt.tokens.push_back(w + ".");
    prompt.tokens.push_back("[SEP]");
    for (const auto& w : relation_words) prompt.tokens.push_back(w + ".");
    prompt.tokens.push_back("[SEP]");
    require(static_cast<int>(prompt.tokens.size()) <= token_budget,
            "build_prompt: token budget exceeded");
    while (static_cast<int>(prompt.tokens.size()) < token_budget)
        prompt.tokens.push_back("[PAD]");
    return prompt;
}

inline std::string prompt_text(const Prompt& prompt) {
    std::string out;
    for (std::size_t i = 0; i < prompt.tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += prompt.tokens[i];
    }
    return out;
}

}  // namespace ovsg
