#include <catch2/catch_amalgamated.hpp>

#include "ovsg/caption.hpp"

using ovsg::UngroundedTriplet;

namespace {

ovsg::Concept make_concept(const std::string& name, ovsg::ConceptKind kind) {
    return {name, kind, ovsg::VocabSplit::base, {1.0, 0.0}};
}

ovsg::ConceptSpace lexicon() {
    ovsg::ConceptSpace cs;
    cs.dim = 2;
    for (const char* name :
         {"man", "woman", "skateboard", "shirt", "helmet", "wheel", "dog", "horse",
          "bench", "table", "plate", "kitchen", "wall", "painting", "phone",
          "pizza", "fence", "umbrella", "girl", "hat"})
        cs.objects.push_back(make_concept(name, ovsg::ConceptKind::object));
    for (const char* name :
         {"on", "in", "wearing", "riding", "holding", "under", "near", "behind",
          "sitting on", "standing on", "of", "with"})
        cs.relations.push_back(make_concept(name, ovsg::ConceptKind::relation));
    return cs;
}

std::vector<std::tuple<std::string, std::string, std::string>> as_tuples(
    const std::vector<UngroundedTriplet>& ts) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& t : ts)
        out.emplace_back(t.subject_phrase, t.predicate_phrase, t.object_phrase);
    return out;
}

}  // namespace

TEST_CASE("copula plus preposition collapses onto the subject") {
    auto ts = ovsg::parse_caption("a man is on a skateboard", lexicon());
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].subject_phrase == "man");
    CHECK(ts[0].predicate_phrase == "on");
    CHECK(ts[0].object_phrase == "skateboard");
    CHECK(ts[0].source == ovsg::TripletSource::parser);
}

TEST_CASE("participial modifier attaches locally, main verb to the subject") {
    auto ts =
        ovsg::parse_caption("a man wearing a shirt is riding a skateboard", lexicon());
    auto got = as_tuples(ts);
    REQUIRE(got.size() == 2);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "man", "wearing", "shirt"});
    CHECK(got[1] == std::tuple<std::string, std::string, std::string>{
                        "man", "riding", "skateboard"});
}

TEST_CASE("empty and relation-free captions yield nothing") {
    CHECK(ovsg::parse_caption("", lexicon()).empty());
    CHECK(ovsg::parse_caption("a man and a woman", lexicon()).empty());
    CHECK(ovsg::parse_caption("the sky is blue", lexicon()).empty());
}

TEST_CASE("conjunctions distribute over subjects") {
    auto got = as_tuples(ovsg::parse_caption("a man and a woman riding horses", lexicon()));
    REQUIRE(got.size() == 2);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "man", "riding", "horse"});
    CHECK(got[1] == std::tuple<std::string, std::string, std::string>{
                        "woman", "riding", "horse"});
}

TEST_CASE("conjunctions distribute over objects") {
    auto got =
        as_tuples(ovsg::parse_caption("a man holding a phone and a pizza", lexicon()));
    REQUIRE(got.size() == 2);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "man", "holding", "phone"});
    CHECK(got[1] == std::tuple<std::string, std::string, std::string>{
                        "man", "holding", "pizza"});
}

TEST_CASE("preposition chains attach to the nearest noun phrase") {
    auto got =
        as_tuples(ovsg::parse_caption("a plate on a table in a kitchen", lexicon()));
    REQUIRE(got.size() == 2);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "plate", "on", "table"});
    CHECK(got[1] == std::tuple<std::string, std::string, std::string>{
                        "table", "in", "kitchen"});
}

TEST_CASE("determiner-led -ing words are nouns, bare ones are predicates") {
    auto got = as_tuples(ovsg::parse_caption("a painting on a wall", lexicon()));
    REQUIRE(got.size() == 1);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "painting", "on", "wall"});
}

TEST_CASE("inflected verbs normalize to the lexicon form") {
    auto got = as_tuples(ovsg::parse_caption("a dog sits on a bench", lexicon()));
    REQUIRE(got.size() == 1);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "dog", "sitting on", "bench"});
}

TEST_CASE("modifiers are skipped, the head noun survives") {
    auto got = as_tuples(
        ovsg::parse_caption("a young man wearing a bright red shirt", lexicon()));
    REQUIRE(got.size() == 1);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "man", "wearing", "shirt"});
}

TEST_CASE("unknown nouns survive as open-vocabulary phrases") {
    auto got = as_tuples(ovsg::parse_caption("a zebra is on a skateboard", lexicon()));
    REQUIRE(got.size() == 1);
    CHECK(got[0] == std::tuple<std::string, std::string, std::string>{
                        "zebra", "on", "skateboard"});
}

TEST_CASE("unknown -ing predicates survive raw") {
    auto got = as_tuples(ovsg::parse_caption("a dog jumping over a fence", lexicon()));
    REQUIRE(got.size() == 1);
    CHECK(std::get<0>(got[0]) == "dog");
    CHECK(std::get<1>(got[0]) == "jumping over");
    CHECK(std::get<2>(got[0]) == "fence");
}

TEST_CASE("parser is deterministic and bounded by predicate-ish tokens") {
    auto cs = lexicon();
    const std::string caption =
        "a man wearing a helmet riding a skateboard near a dog on a bench";
    auto a = ovsg::parse_caption(caption, cs);
    auto b = ovsg::parse_caption(caption, cs);
    CHECK(a == b);
    // triplets never outnumber verbs + prepositions in the caption
    std::size_t predicate_tokens = 0;
    for (const auto& tok : ovsg::detail::tokenize_caption(caption)) {
        if (ovsg::detail::is_preposition(tok) ||
            (ovsg::detail::ends_with(tok, "ing") && tok.size() > 4))
            ++predicate_tokens;
    }
    CHECK(a.size() <= predicate_tokens);
}

TEST_CASE("normalize_predicate handles typos and inflection") {
    auto cs = lexicon();
    CHECK(ovsg::normalize_predicate("wearng", cs) == "wearing");   // edit distance 1
    CHECK(ovsg::normalize_predicate("rides", cs) == "riding");     // inflection
    CHECK(ovsg::normalize_predicate("Standing  On", cs) == "standing on");
    CHECK(ovsg::normalize_predicate("juggling", cs) == "juggling");  // kept raw
}

TEST_CASE("grounding picks the best candidate per head noun") {
    auto cs = lexicon();
    std::vector<ovsg::Node> candidates = {
        {ovsg::BBox{0, 0, 10, 10}, "man", 0.9, std::nullopt},
        {ovsg::BBox{20, 0, 30, 10}, "man", 0.7, std::nullopt},
        {ovsg::BBox{40, 0, 55, 10}, "skateboard", 0.8, std::nullopt},
    };
    std::vector<UngroundedTriplet> ts = {
        {"man", "on", "skateboard", ovsg::TripletSource::parser}};
    auto grounded = ovsg::ground_triplets(ts, candidates, cs);
    REQUIRE(grounded.edges.size() == 1);
    CHECK(grounded.dropped == 0);
    CHECK(grounded.edges[0].subject == 0);  // the 0.9 man wins
    CHECK(grounded.edges[0].object == 2);
    CHECK(grounded.edges[0].predicate == "on");

    SECTION("score ties break by larger box area") {
        candidates[1].score = 0.9;
        candidates[1].box = ovsg::BBox{20, 0, 35, 12};  // bigger than candidate 0
        auto g2 = ovsg::ground_triplets(ts, candidates, cs);
        REQUIRE(g2.edges.size() == 1);
        CHECK(g2.edges[0].subject == 1);
    }
}

TEST_CASE("grounding drops triplets without candidates and counts them") {
    auto cs = lexicon();
    std::vector<ovsg::Node> candidates = {
        {ovsg::BBox{0, 0, 10, 10}, "man", 0.9, std::nullopt}};
    std::vector<UngroundedTriplet> ts = {
        {"zebra", "on", "man", ovsg::TripletSource::parser},
        {"man", "near", "man", ovsg::TripletSource::parser}};  // same candidate twice
    auto grounded = ovsg::ground_triplets(ts, candidates, cs);
    CHECK(grounded.edges.empty());
    CHECK(grounded.dropped == 2);
}

TEST_CASE("grounding never invents nodes") {
    auto cs = lexicon();
    ovsg::Rng rng(17);
    std::vector<ovsg::Node> candidates;
    for (int i = 0; i < 6; ++i) {
        double x = 12.0 * i;
        candidates.push_back({ovsg::BBox{x, 0, x + 10, 10},
                              cs.objects[rng.uniform_index(cs.objects.size())].name,
                              rng.uniform(), std::nullopt});
    }
    std::vector<UngroundedTriplet> ts;
    for (int i = 0; i < 20; ++i)
        ts.push_back({cs.objects[rng.uniform_index(cs.objects.size())].name,
                      cs.relations[rng.uniform_index(cs.relations.size())].name,
                      cs.objects[rng.uniform_index(cs.objects.size())].name,
                      ovsg::TripletSource::parser});
    auto grounded = ovsg::ground_triplets(ts, candidates, cs);
    for (const auto& e : grounded.edges) {
        CHECK(e.subject >= 0);
        CHECK(e.subject < 6);
        CHECK(e.object >= 0);
        CHECK(e.object < 6);
        CHECK(e.subject != e.object);
    }
}
