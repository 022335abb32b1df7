#include <catch2/catch_amalgamated.hpp>

#include "ovsg/prompt.hpp"

namespace {

ovsg::ConceptSpace vocab(int n_obj, int n_rel) {
    ovsg::ConceptSpace cs;
    cs.dim = 2;
    for (int i = 0; i < n_obj; ++i)
        cs.objects.push_back({"obj" + std::to_string(i), ovsg::ConceptKind::object,
                              ovsg::VocabSplit::base, {1, 0}});
    for (int i = 0; i < n_rel; ++i)
        cs.relations.push_back({"rel" + std::to_string(i),
                                ovsg::ConceptKind::relation, ovsg::VocabSplit::base,
                                {0, 1}});
    return cs;
}

}  // namespace

TEST_CASE("prompt layout: [CLS] objects [SEP] relations [SEP] padding") {
    auto cs = vocab(4, 3);
    ovsg::Prompt p = ovsg::build_prompt({"obj1", "rel0"}, cs, 4, 7, 16);
    REQUIRE(p.tokens.size() == 16);
    CHECK(p.tokens.front() == "[CLS]");
    // find the two separators
    std::vector<std::size_t> seps;
    for (std::size_t i = 0; i < p.tokens.size(); ++i)
        if (p.tokens[i] == "[SEP]") seps.push_back(i);
    REQUIRE(seps.size() == 2);
    for (std::size_t i = 1; i < seps[0]; ++i) {
        std::string word = p.tokens[i].substr(0, p.tokens[i].size() - 1);
        CHECK(cs.find_object(word) != nullptr);
        CHECK(p.tokens[i].back() == '.');
    }
    for (std::size_t i = seps[0] + 1; i < seps[1]; ++i) {
        std::string word = p.tokens[i].substr(0, p.tokens[i].size() - 1);
        CHECK(cs.find_relation(word) != nullptr);
    }
    for (std::size_t i = seps[1] + 1; i < p.tokens.size(); ++i)
        CHECK(p.tokens[i] == "[PAD]");
    CHECK(ovsg::prompt_text(p).find("[CLS] obj1.") == 0);
}

TEST_CASE("all positives of a 10-word vocabulary with m = 10 leaves no negatives") {
    auto cs = vocab(6, 4);
    std::vector<std::string> all;
    for (const auto& c : cs.objects) all.push_back(c.name);
    for (const auto& c : cs.relations) all.push_back(c.name);
    ovsg::Prompt p = ovsg::build_prompt(all, cs, 10, 1);
    CHECK(p.positives.size() == 10);
    CHECK(p.negatives.empty());
    int words = 0;
    for (const auto& t : p.tokens)
        if (t != "[CLS]" && t != "[SEP]" && t != "[PAD]") ++words;
    CHECK(words == 10);
}

TEST_CASE("cap 80 with 30 positives gives exactly 50 sampled negatives") {
    auto cs = vocab(150, 50);
    std::vector<std::string> positives;
    for (int i = 0; i < 25; ++i) positives.push_back("obj" + std::to_string(i));
    for (int i = 0; i < 5; ++i) positives.push_back("rel" + std::to_string(i));
    ovsg::Prompt p = ovsg::build_prompt(positives, cs, 80, 3);
    CHECK(p.positives.size() == 30);
    CHECK(p.negatives.size() == 50);
    for (const auto& n : p.negatives) CHECK(p.positives.count(n) == 0);
}

TEST_CASE("empty positives with m = 5 samples 5 negatives") {
    auto cs = vocab(20, 10);
    ovsg::Prompt p = ovsg::build_prompt({}, cs, 5, 9);
    CHECK(p.positives.empty());
    CHECK(p.negatives.size() == 5);
}

TEST_CASE("same seed gives a byte-identical prompt, different seed varies") {
    auto cs = vocab(40, 20);
    ovsg::Prompt a = ovsg::build_prompt({"obj0", "rel1"}, cs, 20, 42);
    ovsg::Prompt b = ovsg::build_prompt({"obj0", "rel1"}, cs, 20, 42);
    ovsg::Prompt c = ovsg::build_prompt({"obj0", "rel1"}, cs, 20, 43);
    CHECK(ovsg::prompt_text(a) == ovsg::prompt_text(b));
    CHECK(ovsg::prompt_text(a) != ovsg::prompt_text(c));
}

TEST_CASE("every positive appears exactly once") {
    auto cs = vocab(30, 20);
    std::vector<std::string> positives = {"obj3", "rel7", "obj12", "rel0"};
    ovsg::Prompt p = ovsg::build_prompt(positives, cs, 25, 5);
    for (const auto& pos : positives) {
        int count = 0;
        for (const auto& t : p.tokens)
            if (t == pos + ".") ++count;
        CHECK(count == 1);
    }
    // no duplicates anywhere
    std::set<std::string> seen;
    for (const auto& t : p.tokens) {
        if (t == "[CLS]" || t == "[SEP]" || t == "[PAD]") continue;
        CHECK(seen.insert(t).second);
    }
}

TEST_CASE("contract errors: cap too small, unknown positive, budget overflow") {
    auto cs = vocab(10, 5);
    CHECK_THROWS_AS(ovsg::build_prompt({"obj0", "obj1"}, cs, 1, 0),
                    ovsg::ContractError);
    CHECK_THROWS_AS(ovsg::build_prompt({"unicorn"}, cs, 5, 0), ovsg::ContractError);
    CHECK_THROWS_AS(ovsg::build_prompt({"obj0"}, cs, 15, 0, 4), ovsg::ContractError);
}

TEST_CASE("positives are case-folded on the way in") {
    auto cs = vocab(10, 5);
    ovsg::Prompt p = ovsg::build_prompt({"  Obj3 "}, cs, 5, 0);
    CHECK(p.positives.count("obj3") == 1);
}
