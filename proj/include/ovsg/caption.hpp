#pragma once
// Caption-to-triplet extraction and triplet grounding. The parser is a small
// pattern grammar over lexicon-tagged chunks, not a dependency parser: noun
// phrases end at their head noun, copulas collapse into the following
// predicate ("is on" -> "on"), predicates attach to the nearest preceding
// noun phrase (copula-marked ones to the sentence subject), and conjunctions
// distribute over subjects and objects.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ovsg/core.hpp"

namespace ovsg {

enum class TripletSource { parser, llm, mllm };

inline const char* to_string(TripletSource s) {
    switch (s) {
        case TripletSource::parser: return "parser";
        case TripletSource::llm: return "llm";
        case TripletSource::mllm: return "mllm";
    }
    return "parser";
}

inline TripletSource triplet_source_from_string(const std::string& s) {
    if (s == "parser") return TripletSource::parser;
    if (s == "llm") return TripletSource::llm;
    if (s == "mllm") return TripletSource::mllm;
    throw ContractError("unknown triplet source: " + s);
}

// A (subject, predicate, object) phrase triple not yet attached to boxes.
struct UngroundedTriplet {
    std::string subject_phrase;
    std::string predicate_phrase;
    std::string object_phrase;
    TripletSource source = TripletSource::parser;

    bool operator==(const UngroundedTriplet&) const = default;
};

// Externally synthesized scene graph, normalized on ingest. Boxes are
// optional (the LLM pipeline emits none); boxes from the multimodal pipeline
// are kept but flagged low-trust.
struct SynthNode {
    std::optional<BBox> box;
    std::string category;
    double score = 1.0;

    bool operator==(const SynthNode&) const = default;
};

struct SynthesizedGraphRecord {
    std::string image_id;
    int width = 0;   // 0 when unknown
    int height = 0;
    std::vector<SynthNode> nodes;
    std::vector<Edge> edges;
    std::string pipeline;  // parser | llm | mllm
    std::string model;
    bool boxes_low_trust = false;

    bool operator==(const SynthesizedGraphRecord&) const = default;
};

namespace detail {

inline bool is_determiner(const std::string& w) {
    static const std::set<std::string> kDet = {
        "a",     "an",    "the",  "his",   "her",  "its",  "their", "this",
        "that",  "these", "those", "some", "two",  "three", "four", "five",
        "several", "many", "one"};
    return kDet.count(w) > 0;
}

inline bool is_copula(const std::string& w) {
    return w == "is" || w == "are" || w == "was" || w == "were";
}

inline bool is_preposition(const std::string& w) {
    static const std::set<std::string> kPrep = {
        "on",     "in",     "at",     "under",   "over",    "near",  "behind",
        "above",  "below",  "beside", "with",    "of",      "along", "against",
        "across", "around", "inside", "outside", "between", "by",    "upon"};
    return kPrep.count(w) > 0;
}

inline bool ends_with(const std::string& w, const std::string& suffix) {
    return w.size() >= suffix.size() &&
           w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// crude inflection strip: riding -> rid/ride, wears -> wear, horses -> horse
inline std::vector<std::string> stem_variants(const std::string& w) {
    std::vector<std::string> out{w};
    if (ends_with(w, "ing") && w.size() > 4) {
        std::string base = w.substr(0, w.size() - 3);
        out.push_back(base);
        out.push_back(base + "e");
        if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2])
            out.push_back(base.substr(0, base.size() - 1));
    }
    if (ends_with(w, "ies") && w.size() > 3)
        out.push_back(w.substr(0, w.size() - 3) + "y");
    if (ends_with(w, "es") && w.size() > 2) out.push_back(w.substr(0, w.size() - 2));
    if (ends_with(w, "s") && w.size() > 1) out.push_back(w.substr(0, w.size() - 1));
    return out;
}

inline bool stems_overlap(const std::string& a, const std::string& b) {
    for (const auto& va : stem_variants(a))
        for (const auto& vb : stem_variants(b))
            if (va == vb) return true;
    return false;
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Exact, then inflection-stripped, then edit-distance-1 match against the
// lexicon. Returns the lexicon form, or nullopt.
inline std::optional<std::string> lexicon_match(const std::string& word,
                                                const std::vector<Concept>& lexicon) {
    for (const auto& c : lexicon)
        if (c.name == word) return c.name;
    for (const auto& c : lexicon)
        if (c.name.find(' ') == std::string::npos && stems_overlap(word, c.name))
            return c.name;
    if (word.size() >= 4)
        for (const auto& c : lexicon)
            if (c.name.find(' ') == std::string::npos &&
                edit_distance(word, c.name) <= 1)
                return c.name;
    return std::nullopt;
}

inline std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(cur), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::vector<std::string> tokenize_caption(const std::string& caption) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char raw : caption) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'') {
            cur.push_back(c);
        } else {
            if (!cur.empty()) tokens.push_back(cur), cur.clear();
            if (c == ',') tokens.push_back(",");
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

// Longest relation-lexicon entry matching tokens[i..] with stem tolerance.
// Returns (lexicon form, tokens consumed).
inline std::optional<std::pair<std::string, std::size_t>> match_lexicon_relation(
    const std::vector<std::string>& tokens, std::size_t i,
    const ConceptSpace& lexicon) {
    std::optional<std::pair<std::string, std::size_t>> best;
    for (const auto& c : lexicon.relations) {
        std::vector<std::string> parts = split_words(c.name);
        if (i + parts.size() > tokens.size()) continue;
        if (best && parts.size() <= best->second) continue;
        bool all = true;
        for (std::size_t k = 0; k < parts.size() && all; ++k)
            all = stems_overlap(tokens[i + k], parts[k]);
        if (all) best = {c.name, parts.size()};
    }
    return best;
}

// Predicate starting at tokens[i]: a lexicon relation, a preposition, or a
// participle ("-ing" word not naming an object and not determiner-led),
// absorbing trailing prepositions. Returns (raw phrase, tokens consumed).
inline std::optional<std::pair<std::string, std::size_t>> match_predicate(
    const std::vector<std::string>& tokens, std::size_t i,
    const ConceptSpace& lexicon, bool after_determiner) {
    if (i >= tokens.size()) return std::nullopt;
    if (auto hit = match_lexicon_relation(tokens, i, lexicon)) {
        std::string phrase = hit->first;
        std::size_t consumed = hit->second;
        // the lexicon form may already include the preposition; only absorb
        // one more if that longer form is also a lexicon relation
        if (i + consumed < tokens.size() && is_preposition(tokens[i + consumed])) {
            std::string extended = phrase + " " + tokens[i + consumed];
            if (lexicon.find_relation(extended)) {
                phrase = extended;
                consumed += 1;
            }
        }
        return {{phrase, consumed}};
    }
    const std::string& w = tokens[i];
    bool participle = ends_with(w, "ing") && w.size() > 4 && !after_determiner &&
                      !lexicon_match(w, lexicon.objects).has_value();
    if (!participle && !is_preposition(w)) return std::nullopt;
    std::string phrase = w;
    std::size_t consumed = 1;
    while (participle && i + consumed < tokens.size() &&
           is_preposition(tokens[i + consumed]) && consumed < 3) {
        phrase += ' ';
        phrase += tokens[i + consumed];
        ++consumed;
    }
    return {{phrase, consumed}};
}

struct Chunk {
    enum Kind { noun_group, predicate } kind = noun_group;
    std::vector<std::string> nouns;  // conjunction group, head nouns
    std::string pred;                // normalized predicate
    bool copula_marked = false;      // "is riding": attaches to the subject
};

}  // namespace detail

// Normalizes a predicate phrase to the relation lexicon when an exact,
// inflection-stripped, or edit-distance-1 form exists; otherwise the raw
// phrase is kept (open vocabulary).
inline std::string normalize_predicate(const std::string& phrase,
                                       const ConceptSpace& lexicon) {
    std::string p = normalize_name(phrase);
    if (p.empty() || lexicon.find_relation(p)) return p;
    std::vector<std::string> words = detail::split_words(p);
    if (words.size() == 1) {
        if (auto hit = detail::lexicon_match(p, lexicon.relations)) return *hit;
        return p;
    }
    // multiword: match word-for-word with stem tolerance
    for (const auto& c : lexicon.relations) {
        std::vector<std::string> parts = detail::split_words(c.name);
        if (parts.size() != words.size()) continue;
        bool all = true;
        for (std::size_t k = 0; k < parts.size() && all; ++k)
            all = detail::stems_overlap(words[k], parts[k]);
        if (all) return c.name;
    }
    return p;
}

// Head noun of a phrase: the last word, lexicon-normalized when possible.
inline std::string head_noun(const std::string& phrase, const ConceptSpace& lexicon) {
    std::string p = normalize_name(phrase);
    if (const Concept* c = lexicon.find_object(p)) return c->name;
    auto space = p.rfind(' ');
    std::string head = space == std::string::npos ? p : p.substr(space + 1);
    if (auto hit = detail::lexicon_match(head, lexicon.objects)) return *hit;
    return head;
}

// Rule-based triplet extraction. Deterministic and total: captions the
// grammar cannot handle yield an empty list.
inline std::vector<UngroundedTriplet> parse_caption(const std::string& caption,
                                                    const ConceptSpace& lexicon) {
    using detail::Chunk;
    std::vector<std::string> tokens = detail::tokenize_caption(caption);

    // Pass 1: chunk into noun groups and predicates.
    std::vector<Chunk> chunks;
    std::vector<std::string> phrase;  // words of the noun phrase in progress
    bool pending_conj = false;
    bool after_determiner = false;

    auto flush_noun = [&] {
        if (phrase.empty()) return;
        std::string head = phrase.back();
        if (auto hit = detail::lexicon_match(head, lexicon.objects)) head = *hit;
        if (pending_conj && !chunks.empty() &&
            chunks.back().kind == Chunk::noun_group) {
            chunks.back().nouns.push_back(head);
        } else {
            Chunk c;
            c.kind = Chunk::noun_group;
            c.nouns = {head};
            chunks.push_back(std::move(c));
        }
        pending_conj = false;
        phrase.clear();
    };

    std::size_t i = 0;
    while (i < tokens.size()) {
        const std::string& w = tokens[i];
        if (detail::is_copula(w)) {
            flush_noun();
            if (auto pred = detail::match_predicate(tokens, i + 1, lexicon, false)) {
                Chunk c;
                c.kind = Chunk::predicate;
                c.pred = normalize_predicate(pred->first, lexicon);
                c.copula_marked = true;
                chunks.push_back(std::move(c));
                i += 1 + pred->second;
            } else {
                ++i;  // bare copula ("the sky is blue") carries no relation
            }
            after_determiner = false;
            continue;
        }
        if (auto pred = detail::match_predicate(tokens, i, lexicon, after_determiner)) {
            flush_noun();
            Chunk c;
            c.kind = Chunk::predicate;
            c.pred = normalize_predicate(pred->first, lexicon);
            chunks.push_back(std::move(c));
            i += pred->second;
            after_determiner = false;
            continue;
        }
        if (w == "and" || w == ",") {
            flush_noun();
            pending_conj = !chunks.empty() && chunks.back().kind == Chunk::noun_group;
            ++i;
            after_determiner = false;
            continue;
        }
        if (detail::is_determiner(w)) {
            flush_noun();
            ++i;
            after_determiner = true;
            continue;
        }
        phrase.push_back(w);
        after_determiner = false;
        ++i;
    }
    flush_noun();

    // Pass 2: emit triplets. Each predicate takes the next noun group as its
    // object; the subject is the nearest preceding group, or the sentence
    // subject for copula-marked predicates.
    std::vector<UngroundedTriplet> out;
    std::vector<std::string> main_subjects;
    int last_group = -1;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        if (chunks[c].kind == Chunk::noun_group) {
            if (main_subjects.empty()) main_subjects = chunks[c].nouns;
            last_group = static_cast<int>(c);
            continue;
        }
        std::size_t obj_idx = c + 1;
        while (obj_idx < chunks.size() && chunks[obj_idx].kind != Chunk::noun_group)
            ++obj_idx;
        if (obj_idx >= chunks.size() || chunks[c].pred.empty()) continue;
        const std::vector<std::string>* subjects = nullptr;
        if (chunks[c].copula_marked && !main_subjects.empty())
            subjects = &main_subjects;
        else if (last_group >= 0)
            subjects = &chunks[last_group].nouns;
        if (!subjects) continue;
        for (const auto& s : *subjects)
            for (const auto& o : chunks[obj_idx].nouns)
                out.push_back({s, chunks[c].pred, o, TripletSource::parser});
    }
    return out;
}

// Grounding: each phrase takes the highest-scoring candidate whose category
// equals the phrase head noun (ties: larger box area, then lower index).
// Triplets with an unmatched phrase or with both phrases landing on the same
// candidate are dropped and counted.
struct GroundingResult {
    std::vector<Edge> edges;
    int dropped = 0;
};

inline GroundingResult ground_triplets(const std::vector<UngroundedTriplet>& triplets,
                                       const std::vector<Node>& candidates,
                                       const ConceptSpace& lexicon) {
    auto best_candidate = [&](const std::string& phrase) -> int {
        std::string head = head_noun(phrase, lexicon);
        int best = -1;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (candidates[i].category != head) continue;
            if (best < 0 || candidates[i].score > candidates[best].score ||
                (candidates[i].score == candidates[best].score &&
                 candidates[i].box.area() > candidates[best].box.area()))
                best = static_cast<int>(i);
        }
        return best;
    };
    GroundingResult result;
    for (const auto& t : triplets) {
        int sub = best_candidate(t.subject_phrase);
        int obj = best_candidate(t.object_phrase);
        if (sub < 0 || obj < 0 || sub == obj) {
            result.dropped += 1;
            continue;
        }
        Edge e;
        e.subject = sub;
        e.object = obj;
        e.predicate = normalize_predicate(t.predicate_phrase, lexicon);
        e.score = candidates[sub].score * candidates[obj].score;
        result.edges.push_back(std::move(e));
    }
    return result;
}

}  // namespace ovsg
