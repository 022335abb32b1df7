#pragma once
// SGDet / PredCls scoring. A predicted triplet matches a ground-truth
// triplet when all three labels agree and both boxes overlap at IoU >= the
// threshold; credit is greedy one-to-one in rank order. Recall@K averages
// per image over images with at least one ground-truth triplet in the
// evaluated partition; mR@K averages per-predicate recalls uniformly.

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ovsg/matching.hpp"
#include "ovsg/splits.hpp"

namespace ovsg {

enum class Protocol { sgdet, predcls };
enum class Partition { base_plus_novel, novel_object, novel_relation, joint };

inline const char* to_string(Protocol p) {
    return p == Protocol::sgdet ? "sgdet" : "predcls";
}

inline const char* to_string(Partition p) {
    switch (p) {
        case Partition::base_plus_novel: return "base_plus_novel";
        case Partition::novel_object: return "novel_object";
        case Partition::novel_relation: return "novel_relation";
        case Partition::joint: return "joint";
    }
    return "base_plus_novel";
}

inline Partition partition_from_string(const std::string& s) {
    if (s == "base_plus_novel") return Partition::base_plus_novel;
    if (s == "novel_object") return Partition::novel_object;
    if (s == "novel_relation") return Partition::novel_relation;
    if (s == "joint") return Partition::joint;
    throw ContractError("unknown partition: " + s);
}

inline Protocol protocol_from_string(const std::string& s) {
    if (s == "sgdet") return Protocol::sgdet;
    if (s == "predcls") return Protocol::predcls;
    throw ContractError("unknown protocol: " + s);
}

struct EvalConfig {
    std::vector<int> ks{20, 50, 100};
    double iou_threshold = 0.5;
    Protocol protocol = Protocol::sgdet;
    Partition partition = Partition::base_plus_novel;
    int max_objects = 100;
    bool micro_average = false;  // corpus-level sums instead of per-image means
    SimilarityWeights predcls_weights{};
};

inline bool match_triplet(const Triplet& pred, const Triplet& gt,
                          const EvalConfig& cfg) {
    if (pred.predicate != gt.predicate) return false;
    if (pred.subject.category != gt.subject.category) return false;
    if (pred.object.category != gt.object.category) return false;
    return iou(pred.subject.box, gt.subject.box) >= cfg.iou_threshold &&
           iou(pred.object.box, gt.object.box) >= cfg.iou_threshold;
}

inline std::vector<Triplet> graph_triplets(const SceneGraph& g) {
    std::vector<Triplet> out;
    out.reserve(g.edges.size());
    for (const auto& e : g.edges)
        out.push_back({g.nodes.at(e.subject), e.predicate, g.nodes.at(e.object),
                       triplet_score(g.nodes.at(e.subject).score,
                                     g.nodes.at(e.object).score, e.score)});
    return out;
}

// Keeps the top `max_objects` nodes by score (stable: lower index wins a
// tie) and drops edges touching removed nodes.
inline SceneGraph cap_nodes(const SceneGraph& g, int max_objects) {
    if (static_cast<int>(g.nodes.size()) <= max_objects) return g;
    std::vector<std::size_t> order(g.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return g.nodes[a].score > g.nodes[b].score;
    });
    std::vector<int> remap(g.nodes.size(), -1);
    SceneGraph out;
    out.image_id = g.image_id;
    out.width = g.width;
    out.height = g.height;
    std::vector<std::size_t> keep(order.begin(),
                                  order.begin() + static_cast<std::size_t>(max_objects));
    std::sort(keep.begin(), keep.end());  // preserve original node order
    for (std::size_t i : keep) {
        remap[i] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(g.nodes[i]);
    }
    for (const auto& e : g.edges) {
        int s = remap.at(e.subject);
        int o = remap.at(e.object);
        if (s < 0 || o < 0) continue;
        Edge kept = e;
        kept.subject = s;
        kept.object = o;
        out.edges.push_back(kept);
    }
    return out;
}

// Triplet candidates of a predicted graph: the top `max_objects` nodes by
// score are retained, confidences are the product of the three component
// scores, the result is confidence-descending and truncated to `cap`.
inline RankedTriplets ranked_triplets(const SceneGraph& pred, int max_objects,
                                      std::size_t cap) {
    SceneGraph capped = cap_nodes(pred, max_objects);
    RankedTriplets out;
    for (const auto& e : capped.edges) {
        const Node& sub = capped.nodes[e.subject];
        const Node& obj = capped.nodes[e.object];
        out.push_back({sub, e.predicate, obj,
                       triplet_score(sub.score, obj.score, e.score)});
    }
    std::stable_sort(out.begin(), out.end(), [](const Triplet& a, const Triplet& b) {
        return a.confidence > b.confidence;
    });
    if (out.size() > cap) out.resize(cap);
    return out;
}

struct PredicateTally {
    int gt_count = 0;
    std::vector<int> matched_at_k;
};

struct ImageEval {
    int gt_count = 0;
    std::vector<int> matched_at_k;  // parallel to cfg.ks
    std::map<std::string, PredicateTally> per_predicate;
};

// Greedy rank-order crediting: each prediction claims the first still
// unclaimed ground-truth triplet it matches.
inline ImageEval credit_image(const RankedTriplets& preds,
                              const std::vector<Triplet>& gts,
                              const EvalConfig& cfg) {
    for (std::size_t r = 1; r < preds.size(); ++r)
        require(preds[r - 1].confidence >= preds[r].confidence,
                "credit_image: predictions not sorted by confidence");

    ImageEval ev;
    ev.gt_count = static_cast<int>(gts.size());
    ev.matched_at_k.assign(cfg.ks.size(), 0);
    for (const auto& gt : gts) {
        auto& tally = ev.per_predicate[gt.predicate];
        tally.gt_count += 1;
        if (tally.matched_at_k.empty()) tally.matched_at_k.assign(cfg.ks.size(), 0);
    }

    std::vector<int> match_rank(gts.size(), -1);
    std::vector<char> claimed(gts.size(), 0);
    for (std::size_t r = 0; r < preds.size(); ++r) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (claimed[g]) continue;
            if (match_triplet(preds[r], gts[g], cfg)) {
                claimed[g] = 1;
                match_rank[g] = static_cast<int>(r);
                break;
            }
        }
    }
    for (std::size_t g = 0; g < gts.size(); ++g) {
        if (match_rank[g] < 0) continue;
        auto& tally = ev.per_predicate[gts[g].predicate];
        for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
            if (match_rank[g] < cfg.ks[ki]) {
                ev.matched_at_k[ki] += 1;
                tally.matched_at_k[ki] += 1;
            }
        }
    }
    return ev;
}

// Per-K recall fractions for one image (0 when the image has no ground
// truth). Predictions must already be confidence-descending.
inline std::vector<double> recall_at_k(const RankedTriplets& preds,
                                       const SceneGraph& gt, const EvalConfig& cfg) {
    ImageEval ev = credit_image(preds, graph_triplets(gt), cfg);
    std::vector<double> out(cfg.ks.size(), 0.0);
    if (ev.gt_count == 0) return out;
    for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki)
        out[ki] = static_cast<double>(ev.matched_at_k[ki]) / ev.gt_count;
    return out;
}

inline bool triplet_in_partition(const Triplet& t, const SplitSpec& spec,
                                 Partition partition) {
    switch (partition) {
        case Partition::base_plus_novel:
        case Partition::joint:
            return true;
        case Partition::novel_object:
            return spec.novel_objects.count(t.subject.category) > 0 ||
                   spec.novel_objects.count(t.object.category) > 0;
        case Partition::novel_relation:
            return spec.novel_relations.count(t.predicate) > 0;
    }
    return true;
}

// PredCls post-processing: select the prediction that best matches each
// ground-truth node and substitute the ground-truth box and label; edges
// between selected nodes keep their predicate and score. The categorical
// matching term is used only when a concept space is supplied and every
// candidate carries a feature.
inline SceneGraph predcls_transform(const SceneGraph& gt, const SceneGraph& pred,
                                    const EvalConfig& cfg,
                                    const ConceptSpace* cs = nullptr) {
    SimilarityWeights w = cfg.predcls_weights;
    bool all_features = !pred.nodes.empty();
    for (const auto& n : pred.nodes) all_features = all_features && n.feature.has_value();
    if (cs == nullptr || !all_features) w.w_cat = 0.0;

    SceneGraph out;
    out.image_id = gt.image_id;
    out.width = gt.width;
    out.height = gt.height;
    if (pred.nodes.empty()) return out;

    static const ConceptSpace kEmptySpace{};
    std::map<int, int> selection =
        predcls_select(gt, pred.nodes, cs ? *cs : kEmptySpace, w);

    std::vector<int> remap(pred.nodes.size(), -1);
    for (const auto& [gt_idx, pred_idx] : selection) {
        Node substituted = gt.nodes.at(gt_idx);  // ground-truth box and label
        substituted.score = 1.0;
        substituted.feature = pred.nodes.at(pred_idx).feature;
        remap[pred_idx] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(std::move(substituted));
    }
    for (const auto& e : pred.edges) {
        int s = remap.at(e.subject);
        int o = remap.at(e.object);
        if (s < 0 || o < 0 || s == o) continue;
        Edge kept = e;
        kept.subject = s;
        kept.object = o;
        out.edges.push_back(kept);
    }
    return out;
}

struct EvalReport {
    Protocol protocol = Protocol::sgdet;
    Partition partition = Partition::base_plus_novel;
    bool micro_average = false;
    std::vector<int> ks;
    std::map<int, double> recall;       // empty when no image contributed
    std::map<int, double> mean_recall;  // over predicates with >= 1 gt triplet
    std::map<std::string, std::map<int, double>> per_predicate;
    std::map<std::string, int> predicate_gt_counts;
    std::size_t image_count = 0;
    std::vector<std::string> missing_images;
};

// Scores a prediction dataset against ground truth. Images whose partition
// has no ground-truth triplets are skipped; images without a prediction
// entry are listed in missing_images and excluded from the averages.
inline EvalReport evaluate(const std::vector<SceneGraph>& gt_dataset,
                           const std::vector<SceneGraph>& pred_dataset,
                           const SplitSpec& spec, const EvalConfig& cfg,
                           const ConceptSpace* cs = nullptr) {
    require(!cfg.ks.empty(), "evaluate: no K values");
    for (std::size_t i = 1; i < cfg.ks.size(); ++i)
        require(cfg.ks[i - 1] < cfg.ks[i], "evaluate: ks must be ascending");
    require(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0,
            "evaluate: iou threshold outside (0,1]");

    std::unordered_map<std::string, const SceneGraph*> pred_by_id;
    for (const auto& p : pred_dataset) pred_by_id[p.image_id] = &p;

    EvalReport report;
    report.protocol = cfg.protocol;
    report.partition = cfg.partition;
    report.micro_average = cfg.micro_average;
    report.ks = cfg.ks;

    std::vector<std::optional<ImageEval>> evals(gt_dataset.size());
    std::vector<char> missing(gt_dataset.size(), 0);
    std::size_t cap = static_cast<std::size_t>(cfg.ks.back());

    parallel_for(gt_dataset.size(), [&](std::size_t idx) {
        const SceneGraph& gt = gt_dataset[idx];
        std::vector<Triplet> gts;
        for (auto& t : graph_triplets(gt))
            if (triplet_in_partition(t, spec, cfg.partition)) gts.push_back(std::move(t));
        if (gts.empty()) return;

        auto it = pred_by_id.find(gt.image_id);
        if (it == pred_by_id.end()) {
            missing[idx] = 1;
            return;
        }
        RankedTriplets ranked;
        if (cfg.protocol == Protocol::predcls) {
            SceneGraph capped = cap_nodes(*it->second, cfg.max_objects);
            SceneGraph transformed = predcls_transform(gt, capped, cfg, cs);
            ranked = ranked_triplets(transformed, cfg.max_objects, cap);
        } else {
            ranked = ranked_triplets(*it->second, cfg.max_objects, cap);
        }
        evals[idx] = credit_image(ranked, gts, cfg);
    });

    // Associative merge of per-image tallies.
    std::vector<double> macro_recall(cfg.ks.size(), 0.0);
    std::vector<long long> micro_matched(cfg.ks.size(), 0);
    long long micro_gt = 0;
    struct PredAgg {
        std::vector<double> macro;  // sum of per-image recalls
        std::vector<long long> matched;
        long long gt = 0;
        int images = 0;
    };
    std::map<std::string, PredAgg> per_pred;

    for (std::size_t idx = 0; idx < gt_dataset.size(); ++idx) {
        if (missing[idx]) {
            report.missing_images.push_back(gt_dataset[idx].image_id);
            continue;
        }
        if (!evals[idx]) continue;
        const ImageEval& ev = *evals[idx];
        report.image_count += 1;
        micro_gt += ev.gt_count;
        for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
            macro_recall[ki] += static_cast<double>(ev.matched_at_k[ki]) / ev.gt_count;
            micro_matched[ki] += ev.matched_at_k[ki];
        }
        for (const auto& [pred, tally] : ev.per_predicate) {
            auto& agg = per_pred[pred];
            if (agg.macro.empty()) {
                agg.macro.assign(cfg.ks.size(), 0.0);
                agg.matched.assign(cfg.ks.size(), 0);
            }
            agg.gt += tally.gt_count;
            agg.images += 1;
            for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
                agg.macro[ki] +=
                    static_cast<double>(tally.matched_at_k[ki]) / tally.gt_count;
                agg.matched[ki] += tally.matched_at_k[ki];
            }
        }
    }

    if (report.image_count > 0) {
        for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
            report.recall[cfg.ks[ki]] =
                cfg.micro_average
                    ? static_cast<double>(micro_matched[ki]) / micro_gt
                    : macro_recall[ki] / static_cast<double>(report.image_count);
        }
        for (const auto& [pred, agg] : per_pred) {
            report.predicate_gt_counts[pred] = static_cast<int>(agg.gt);
            for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
                double r = cfg.micro_average
                               ? static_cast<double>(agg.matched[ki]) / agg.gt
                               : agg.macro[ki] / agg.images;
                report.per_predicate[pred][cfg.ks[ki]] = r;
            }
        }
        for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
            double sum = 0;
            for (const auto& [pred, table] : report.per_predicate)
                sum += table.at(cfg.ks[ki]);
            report.mean_recall[cfg.ks[ki]] =
                sum / static_cast<double>(report.per_predicate.size());
        }
    }
    return report;
}

}  // namespace ovsg
