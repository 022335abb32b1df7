#pragma once
// Optimal ground-truth-to-prediction node assignment. The similarity blends
// a categorical term (sigmoid of word-embedding / visual-feature dot product)
// with GIoU and a normalized-L1 box penalty; the optimum is found exactly
// with a Kuhn-Munkres solver on the negated similarity matrix.

#include <limits>
#include <map>
#include <vector>

#include "ovsg/geometry.hpp"

namespace ovsg {

struct SimilarityWeights {
    double w_cat = 2.0;
    double w_l1 = 5.0;
    double w_giou = 2.0;
};

// One-to-one pairing; encodes a binary assignment matrix with row and
// column sums at most one. Pairs are sorted by ground-truth index.
struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (gt index, pred index)
    std::vector<int> unmatched_gt;
    std::vector<int> unmatched_pred;
};

namespace detail {

// Jonker-Volgenant style shortest augmenting path, O(n^3), square matrix,
// minimization. Deterministic: rows processed in order, the lowest column
// index wins on equal reduced cost.
inline std::vector<int> solve_assignment_square(const std::vector<double>& cost, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace detail

// w_cat * sigmoid(<w_gt, v_pred>) + w_giou * giou - w_l1 * box_l1.
// The image size normalizes the L1 term.
inline double pair_similarity(const Node& gt, const Node& pred, const ConceptSpace& cs,
                              const SimilarityWeights& w, double image_w,
                              double image_h) {
    require(w.w_cat >= 0 && w.w_l1 >= 0 && w.w_giou >= 0,
            "pair_similarity: negative weight");
    require(w.w_cat > 0 || w.w_l1 > 0 || w.w_giou > 0,
            "pair_similarity: all weights zero");
    double sim = 0.0;
    if (w.w_cat > 0) {
        const Concept* gt_concept = cs.find_object(gt.category);
        require(gt_concept != nullptr,
                "pair_similarity: unresolved ground-truth category " + gt.category);
        require(pred.feature.has_value(),
                "pair_similarity: prediction lacks a feature vector");
        sim += w.w_cat * sigmoid(dot(gt_concept->embedding, *pred.feature));
    }
    if (w.w_giou > 0) sim += w.w_giou * giou(gt.box, pred.box);
    if (w.w_l1 > 0) sim -= w.w_l1 * box_l1(gt.box, pred.box, image_w, image_h);
    return sim;
}

// Maximizes total pairwise similarity over one-to-one assignments; always
// matches min(N, K) pairs even when some similarities are negative.
inline Assignment match_matrix(const std::vector<std::vector<double>>& sim) {
    int n_gt = static_cast<int>(sim.size());
    int n_pred = n_gt > 0 ? static_cast<int>(sim[0].size()) : 0;
    Assignment out;
    if (n_gt == 0 || n_pred == 0) {
        for (int i = 0; i < n_gt; ++i) out.unmatched_gt.push_back(i);
        for (int j = 0; j < n_pred; ++j) out.unmatched_pred.push_back(j);
        return out;
    }
    int n = std::max(n_gt, n_pred);
    // Pad to square with zero-cost dummies; dummies absorb the excess side.
    std::vector<double> cost(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n_gt; ++i)
        for (int j = 0; j < n_pred; ++j) cost[i * n + j] = -sim[i][j];
    std::vector<int> row_to_col = detail::solve_assignment_square(cost, n);

    std::vector<char> pred_used(n_pred, 0);
    for (int i = 0; i < n_gt; ++i) {
        int j = row_to_col[i];
        if (j >= 0 && j < n_pred) {
            out.pairs.emplace_back(i, j);
            pred_used[j] = 1;
        } else {
            out.unmatched_gt.push_back(i);
        }
    }
    for (int j = 0; j < n_pred; ++j)
        if (!pred_used[j]) out.unmatched_pred.push_back(j);
    return out;
}

inline std::vector<std::vector<double>> similarity_matrix(
    const std::vector<Node>& gts, const std::vector<Node>& preds,
    const ConceptSpace& cs, const SimilarityWeights& w, double image_w,
    double image_h) {
    std::vector<std::vector<double>> sim(gts.size(),
                                         std::vector<double>(preds.size(), 0.0));
    for (std::size_t i = 0; i < gts.size(); ++i)
        for (std::size_t j = 0; j < preds.size(); ++j)
            sim[i][j] = pair_similarity(gts[i], preds[j], cs, w, image_w, image_h);
    return sim;
}

inline Assignment match(const std::vector<Node>& gts, const std::vector<Node>& preds,
                        const ConceptSpace& cs, const SimilarityWeights& w,
                        double image_w, double image_h) {
    return match_matrix(similarity_matrix(gts, preds, cs, w, image_w, image_h));
}

// Total similarity of an assignment, summed in ground-truth index order.
inline double assignment_total(const Assignment& a,
                               const std::vector<std::vector<double>>& sim) {
    double total = 0.0;
    for (auto [i, j] : a.pairs) total += sim[i][j];
    return total;
}

// PredCls post-processing: each ground-truth node picks its best-matching
// prediction; unmatched ground truths are simply absent from the map.
inline std::map<int, int> predcls_select(const SceneGraph& gt_graph,
                                         const std::vector<Node>& preds,
                                         const ConceptSpace& cs,
                                         const SimilarityWeights& w) {
    require(!preds.empty(), "predcls_select: no candidates");
    Assignment a = match(gt_graph.nodes, preds, cs, w,
                         static_cast<double>(gt_graph.width),
                         static_cast<double>(gt_graph.height));
    std::map<int, int> selection;
    for (auto [i, j] : a.pairs) selection[i] = j;
    return selection;
}

}  // namespace ovsg
