#pragma once
// Canonical data model: boxes, concepts, scene graphs, ranked triplets.
// All types are plain values, immutable by convention after construction,
// and safe to share across threads.

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ovsg/common.hpp"

namespace ovsg {

using Vec = std::vector<double>;

// Absolute-pixel corner form. x1 < x2 and y1 < y2 for a valid box.
struct BBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    bool valid() const {
        return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
               std::isfinite(y2) && x1 < x2 && y1 < y2;
    }
    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double cx() const { return 0.5 * (x1 + x2); }
    double cy() const { return 0.5 * (y1 + y2); }

    bool operator==(const BBox&) const = default;
};

// Normalized center form (DETR convention), accepted on ingest only.
inline BBox box_from_cxcywh_norm(double cx, double cy, double w, double h,
                                 double image_w, double image_h) {
    return BBox{(cx - w / 2) * image_w, (cy - h / 2) * image_h,
                (cx + w / 2) * image_w, (cy + h / 2) * image_h};
}

enum class ConceptKind { object, relation };
enum class VocabSplit { base, novel };

// One named category with its text-space embedding (unit norm).
struct Concept {
    std::string name;
    ConceptKind kind = ConceptKind::object;
    VocabSplit split = VocabSplit::base;
    Vec embedding;
};

inline double dot(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "dot: dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// The active vocabulary: base/novel split is carried per concept, so the
// two subsets partition each kind by construction.
struct ConceptSpace {
    int dim = 0;
    std::vector<Concept> objects;
    std::vector<Concept> relations;

    const std::vector<Concept>& of_kind(ConceptKind kind) const {
        return kind == ConceptKind::object ? objects : relations;
    }

    const Concept* find(ConceptKind kind, const std::string& name) const {
        for (const auto& c : of_kind(kind)) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }

    const Concept* find_object(const std::string& name) const {
        return find(ConceptKind::object, name);
    }
    const Concept* find_relation(const std::string& name) const {
        return find(ConceptKind::relation, name);
    }

    std::vector<std::string> names(ConceptKind kind) const {
        std::vector<std::string> out;
        for (const auto& c : of_kind(kind)) out.push_back(c.name);
        return out;
    }

    // name-uniqueness and unit-norm checks; violations as strings.
    std::vector<std::string> check() const {
        std::vector<std::string> bad;
        for (ConceptKind kind : {ConceptKind::object, ConceptKind::relation}) {
            std::set<std::string> seen;
            for (const auto& c : of_kind(kind)) {
                if (!seen.insert(c.name).second)
                    bad.push_back("duplicate concept name: " + c.name);
                if (static_cast<int>(c.embedding.size()) != dim)
                    bad.push_back("embedding dim mismatch: " + c.name);
                else if (std::abs(norm2(c.embedding) - 1.0) > 1e-6)
                    bad.push_back("embedding not unit norm: " + c.name);
            }
        }
        return bad;
    }
};

// A detected or annotated object. `feature` is the visual representation
// (present on predictions that participate in semantic matching).
struct Node {
    BBox box;
    std::string category;
    double score = 1.0;
    std::optional<Vec> feature;

    bool operator==(const Node&) const = default;
};

// Directed labeled relationship between two nodes of the same graph.
struct Edge {
    int subject = 0;
    int object = 0;
    std::string predicate;
    double score = 1.0;

    bool operator==(const Edge&) const = default;
};

struct SceneGraph {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<Node> nodes;
    std::vector<Edge> edges;

    bool operator==(const SceneGraph&) const = default;
};

// One scored (subject, predicate, object) candidate.
struct Triplet {
    Node subject;
    std::string predicate;
    Node object;
    double confidence = 0.0;
};

// Confidence-descending list, truncated to the evaluation cap by producers.
using RankedTriplets = std::vector<Triplet>;

struct Violation {
    std::string field;
    std::string rule;
    std::string detail;
};

// Total check of SceneGraph invariants. Violations are data, not failures;
// pass cs == nullptr to skip vocabulary resolution.
inline std::vector<Violation> validate_graph(const SceneGraph& g,
                                             const ConceptSpace* cs = nullptr) {
    std::vector<Violation> out;
    auto flag = [&](std::string field, std::string rule, std::string detail) {
        out.push_back({std::move(field), std::move(rule), std::move(detail)});
    };

    if (g.width <= 0 || g.height <= 0)
        flag("image", "positive size", g.image_id);

    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const Node& n = g.nodes[i];
        std::string where = "nodes[" + std::to_string(i) + "]";
        if (!n.box.valid()) {
            flag(where + ".box", "degenerate box",
                 "corners must satisfy x1 < x2 and y1 < y2 with finite values");
        } else if (g.width > 0 && g.height > 0 &&
                   (n.box.x1 < 0 || n.box.y1 < 0 || n.box.x2 > g.width ||
                    n.box.y2 > g.height)) {
            flag(where + ".box", "outside image bounds", g.image_id);
        }
        if (n.score < 0.0 || n.score > 1.0 || !std::isfinite(n.score))
            flag(where + ".score", "score out of [0,1]", std::to_string(n.score));
        if (n.category.empty())
            flag(where + ".category", "empty category", "");
        else if (cs && !cs->find_object(n.category))
            flag(where + ".category", "unresolved category", n.category);
    }

    std::set<std::tuple<int, int, std::string>> seen;
    int node_count = static_cast<int>(g.nodes.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Edge& e = g.edges[i];
        std::string where = "edges[" + std::to_string(i) + "]";
        bool indices_ok = e.subject >= 0 && e.subject < node_count &&
                          e.object >= 0 && e.object < node_count;
        if (!indices_ok)
            flag(where, "invalid node index",
                 std::to_string(e.subject) + "->" + std::to_string(e.object));
        if (e.subject == e.object)
            flag(where, "self-loop", std::to_string(e.subject));
        if (e.score < 0.0 || e.score > 1.0 || !std::isfinite(e.score))
            flag(where + ".score", "score out of [0,1]", std::to_string(e.score));
        if (e.predicate.empty())
            flag(where + ".predicate", "empty predicate", "");
        else if (cs && !cs->find_relation(e.predicate))
            flag(where + ".predicate", "unresolved predicate", e.predicate);
        if (indices_ok && !seen.insert({e.subject, e.object, e.predicate}).second)
            flag(where, "duplicate edge",
                 std::to_string(e.subject) + "-" + e.predicate + "->" +
                     std::to_string(e.object));
    }
    return out;
}

// Ranking confidence of a triplet: product of the three component scores.
inline double triplet_score(double sub_score, double obj_score, double pred_score) {
    for (double s : {sub_score, obj_score, pred_score})
        require(s >= 0.0 && s <= 1.0 && std::isfinite(s),
                "triplet_score: component outside [0,1]");
    return sub_score * obj_score * pred_score;
}

}  // namespace ovsg
