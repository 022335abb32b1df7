#include <catch2/catch_amalgamated.hpp>

#include "ovsg/core.hpp"

using ovsg::BBox;
using ovsg::Edge;
using ovsg::Node;
using ovsg::SceneGraph;

namespace {

ovsg::ConceptSpace toy_space() {
    ovsg::ConceptSpace cs;
    cs.dim = 2;
    cs.objects = {{"man", ovsg::ConceptKind::object, ovsg::VocabSplit::base, {1, 0}},
                  {"dog", ovsg::ConceptKind::object, ovsg::VocabSplit::base, {0, 1}}};
    cs.relations = {
        {"on", ovsg::ConceptKind::relation, ovsg::VocabSplit::base, {1, 0}},
        {"near", ovsg::ConceptKind::relation, ovsg::VocabSplit::novel, {0, 1}}};
    return cs;
}

SceneGraph well_formed() {
    SceneGraph g;
    g.image_id = "img0";
    g.width = 100;
    g.height = 80;
    g.nodes = {Node{BBox{0, 0, 10, 10}, "man", 1.0, std::nullopt},
               Node{BBox{20, 20, 40, 40}, "dog", 1.0, std::nullopt}};
    g.edges = {Edge{0, 1, "on", 1.0}};
    return g;
}

bool has_rule(const std::vector<ovsg::Violation>& vs, const std::string& rule) {
    for (const auto& v : vs)
        if (v.rule == rule) return true;
    return false;
}

}  // namespace

TEST_CASE("validate_graph accepts a well-formed graph") {
    ovsg::ConceptSpace cs = toy_space();
    CHECK(ovsg::validate_graph(well_formed(), &cs).empty());
    CHECK(ovsg::validate_graph(well_formed()).empty());
}

TEST_CASE("validate_graph flags a self-loop") {
    SceneGraph g = well_formed();
    g.edges.push_back({1, 1, "near", 1.0});
    auto vs = ovsg::validate_graph(g);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].rule == "self-loop");
}

TEST_CASE("validate_graph flags a degenerate box") {
    SceneGraph g = well_formed();
    g.nodes[0].box = BBox{10, 0, 5, 10};  // x1 > x2
    CHECK(has_rule(ovsg::validate_graph(g), "degenerate box"));
}

TEST_CASE("validate_graph flags out-of-bounds boxes and bad indices") {
    SceneGraph g = well_formed();
    g.nodes[1].box = BBox{90, 70, 120, 90};  // exceeds 100x80
    g.edges.push_back({0, 5, "on", 1.0});
    auto vs = ovsg::validate_graph(g);
    CHECK(has_rule(vs, "outside image bounds"));
    CHECK(has_rule(vs, "invalid node index"));
}

TEST_CASE("validate_graph flags duplicate edges and score violations") {
    SceneGraph g = well_formed();
    g.edges.push_back({0, 1, "on", 0.5});  // same (sub, obj, predicate)
    g.nodes[0].score = 1.5;
    auto vs = ovsg::validate_graph(g);
    CHECK(has_rule(vs, "duplicate edge"));
    CHECK(has_rule(vs, "score out of [0,1]"));
}

TEST_CASE("validate_graph resolves names only when a space is given") {
    SceneGraph g = well_formed();
    g.nodes[0].category = "zebra";
    g.edges[0].predicate = "juggling";
    CHECK(ovsg::validate_graph(g).empty());
    ovsg::ConceptSpace cs = toy_space();
    auto vs = ovsg::validate_graph(g, &cs);
    CHECK(has_rule(vs, "unresolved category"));
    CHECK(has_rule(vs, "unresolved predicate"));
}

TEST_CASE("validate_graph is total on malformed-but-parseable graphs") {
    SceneGraph g;
    g.image_id = "broken";
    g.width = 0;
    g.height = -3;
    g.nodes = {Node{BBox{5, 5, 5, 5}, "", -2.0, std::nullopt}};
    g.edges = {Edge{7, 7, "", 9.0}};
    auto vs = ovsg::validate_graph(g);
    CHECK(vs.size() >= 5);
}

TEST_CASE("triplet_score is the product of the components") {
    CHECK(ovsg::triplet_score(1.0, 1.0, 1.0) == 1.0);
    CHECK(ovsg::triplet_score(1.0, 0.0, 0.7) == 0.0);
    CHECK_THAT(ovsg::triplet_score(0.9, 0.8, 0.5),
               Catch::Matchers::WithinAbs(0.36, 1e-12));
}

TEST_CASE("triplet_score is monotone in each argument") {
    ovsg::Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
        double bump = rng.uniform() * (1.0 - a);
        CHECK(ovsg::triplet_score(a + bump, b, c) >= ovsg::triplet_score(a, b, c));
    }
}

TEST_CASE("triplet_score rejects out-of-range inputs") {
    CHECK_THROWS_AS(ovsg::triplet_score(1.2, 0.5, 0.5), ovsg::ContractError);
    CHECK_THROWS_AS(ovsg::triplet_score(0.5, -0.1, 0.5), ovsg::ContractError);
}

TEST_CASE("normalize_name folds case and whitespace") {
    CHECK(ovsg::normalize_name("Standing  On") == "standing on");
    CHECK(ovsg::normalize_name("  MAN\t") == "man");
    CHECK(ovsg::normalize_name("") == "");
}

TEST_CASE("cxcywh ingestion converts to corner form") {
    BBox b = ovsg::box_from_cxcywh_norm(0.5, 0.5, 0.2, 0.4, 100, 50);
    CHECK_THAT(b.x1, Catch::Matchers::WithinAbs(40.0, 1e-12));
    CHECK_THAT(b.y1, Catch::Matchers::WithinAbs(15.0, 1e-12));
    CHECK_THAT(b.x2, Catch::Matchers::WithinAbs(60.0, 1e-12));
    CHECK_THAT(b.y2, Catch::Matchers::WithinAbs(35.0, 1e-12));
}

TEST_CASE("concept space checks names and norms") {
    ovsg::ConceptSpace cs = toy_space();
    CHECK(cs.check().empty());
    cs.objects.push_back(cs.objects[0]);  // duplicate name
    cs.relations[0].embedding = {2, 0};   // not unit norm
    auto bad = cs.check();
    CHECK(bad.size() == 2);
}
