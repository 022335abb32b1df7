#pragma once
// Open-vocabulary benchmark splits: selection of novel name sets and the
// corresponding training-graph filters. ovd drops novel-category nodes (and
// every edge touching them), ovr drops novel-predicate edges but keeps all
// nodes, ovd_r applies both.

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ovsg/core.hpp"

namespace ovsg {

enum class OvSetting { closed, ovd, ovr, ovd_r };

inline const char* to_string(OvSetting s) {
    switch (s) {
        case OvSetting::closed: return "closed";
        case OvSetting::ovd: return "ovd";
        case OvSetting::ovr: return "ovr";
        case OvSetting::ovd_r: return "ovd_r";
    }
    return "closed";
}

inline OvSetting setting_from_string(const std::string& s) {
    if (s == "closed") return OvSetting::closed;
    if (s == "ovd") return OvSetting::ovd;
    if (s == "ovr") return OvSetting::ovr;
    if (s == "ovd_r" || s == "ovd+r") return OvSetting::ovd_r;
    throw ContractError("unknown split setting: " + s);
}

struct SplitSpec {
    OvSetting setting = OvSetting::closed;
    std::set<std::string> novel_objects;
    std::set<std::string> novel_relations;
    std::uint64_t seed = 0;
};

namespace detail {
// Seeded shuffle of the sorted name list, first k become novel.
inline std::set<std::string> pick_novel(std::vector<std::string> names,
                                        std::size_t k, std::uint64_t seed) {
    std::sort(names.begin(), names.end());
    Rng rng(seed);
    seeded_shuffle(names, rng);
    return {names.begin(), names.begin() + std::min(k, names.size())};
}
}  // namespace detail

// 30% of object names (rounded up) and 30% of relation names (rounded to
// nearest, the 15-of-50 proportion) become novel, per the requested setting.
inline SplitSpec make_split(const ConceptSpace& cs, OvSetting setting,
                            std::uint64_t seed) {
    require(cs.objects.size() >= 10, "make_split: need at least 10 object names");
    require(cs.relations.size() >= 2, "make_split: need at least 2 relation names");
    SplitSpec spec;
    spec.setting = setting;
    spec.seed = seed;
    if (setting == OvSetting::ovd || setting == OvSetting::ovd_r) {
        auto k = static_cast<std::size_t>(
            std::ceil(0.3 * static_cast<double>(cs.objects.size())));
        spec.novel_objects = detail::pick_novel(cs.names(ConceptKind::object), k,
                                                mix_seed(seed, 1));
    }
    if (setting == OvSetting::ovr || setting == OvSetting::ovd_r) {
        auto k = static_cast<std::size_t>(
            std::llround(0.3 * static_cast<double>(cs.relations.size())));
        spec.novel_relations = detail::pick_novel(cs.names(ConceptKind::relation), k,
                                                  mix_seed(seed, 2));
    }
    return spec;
}

// Node/edge filter without the zero-edge exclusion; also the detection-
// supervision view of an image.
inline SceneGraph filter_graph(const SceneGraph& g, const SplitSpec& spec) {
    if (spec.setting == OvSetting::closed) return g;
    SceneGraph out;
    out.image_id = g.image_id;
    out.width = g.width;
    out.height = g.height;

    std::vector<int> remap(g.nodes.size(), -1);
    bool drop_nodes = spec.setting == OvSetting::ovd || spec.setting == OvSetting::ovd_r;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (drop_nodes && spec.novel_objects.count(g.nodes[i].category)) continue;
        remap[i] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(g.nodes[i]);
    }
    bool drop_edges = spec.setting == OvSetting::ovr || spec.setting == OvSetting::ovd_r;
    for (const auto& e : g.edges) {
        if (drop_edges && spec.novel_relations.count(e.predicate)) continue;
        int s = remap.at(e.subject);
        int o = remap.at(e.object);
        if (s < 0 || o < 0) continue;  // touched a dropped node
        Edge kept = e;
        kept.subject = s;
        kept.object = o;
        out.edges.push_back(kept);
    }
    return out;
}

// Relation-training view: empty when no edges survive (the image is then
// excluded from relation training).
inline std::optional<SceneGraph> filter_training_graph(const SceneGraph& g,
                                                       const SplitSpec& spec) {
    SceneGraph filtered = filter_graph(g, spec);
    if (filtered.edges.empty()) return std::nullopt;
    return filtered;
}

struct SplitCensus {
    std::size_t images = 0;
    std::size_t nodes = 0;
    std::size_t edges = 0;

    bool operator==(const SplitCensus&) const = default;
};

// Counts over the retained relation-training graphs (images with at least
// one surviving edge).
inline SplitCensus split_census(const std::vector<SceneGraph>& dataset,
                                const SplitSpec& spec) {
    SplitCensus census;
    for (const auto& g : dataset) {
        auto kept = filter_training_graph(g, spec);
        if (!kept) continue;
        census.images += 1;
        census.nodes += kept->nodes.size();
        census.edges += kept->edges.size();
    }
    return census;
}

}  // namespace ovsg
