#pragma once
// Independent oracles used to derive expected values. These deliberately
// avoid the library's implementation paths: rasterized overlap instead of
// closed-form IoU, exhaustive enumeration instead of the assignment solver,
// finite differences instead of backprop, and maximum bipartite matching
// instead of greedy crediting.

#include <cmath>
#include <functional>
#include <vector>

#include "ovsg/alignment.hpp"
#include "ovsg/core.hpp"

namespace oracles {

// Pixel-rasterization overlap on a grid covering both boxes: counts cell
// centers inside a, b, and both.
struct RasterOverlap {
    double inter = 0, uni = 0, hull = 0;
};

inline RasterOverlap rasterize(const ovsg::BBox& a, const ovsg::BBox& b,
                               int grid = 300) {
    double lo_x = std::min(a.x1, b.x1), hi_x = std::max(a.x2, b.x2);
    double lo_y = std::min(a.y1, b.y1), hi_y = std::max(a.y2, b.y2);
    double dx = (hi_x - lo_x) / grid, dy = (hi_y - lo_y) / grid;
    double cell = dx * dy;
    RasterOverlap out;
    for (int i = 0; i < grid; ++i) {
        double x = lo_x + (i + 0.5) * dx;
        for (int j = 0; j < grid; ++j) {
            double y = lo_y + (j + 0.5) * dy;
            bool in_a = x > a.x1 && x < a.x2 && y > a.y1 && y < a.y2;
            bool in_b = x > b.x1 && x < b.x2 && y > b.y1 && y < b.y2;
            if (in_a && in_b) out.inter += cell;
            if (in_a || in_b) out.uni += cell;
            out.hull += cell;
        }
    }
    return out;
}

inline double raster_iou(const ovsg::BBox& a, const ovsg::BBox& b, int grid = 300) {
    RasterOverlap o = rasterize(a, b, grid);
    return o.inter / o.uni;
}

inline double raster_giou(const ovsg::BBox& a, const ovsg::BBox& b, int grid = 300) {
    RasterOverlap o = rasterize(a, b, grid);
    return o.inter / o.uni - (o.hull - o.uni) / o.hull;
}

// Best total similarity over all one-to-one assignments of the smaller side,
// by explicit recursion over every injective mapping.
inline double brute_force_best_total(const std::vector<std::vector<double>>& sim) {
    std::size_t n_gt = sim.size();
    std::size_t n_pred = n_gt ? sim[0].size() : 0;
    if (n_gt == 0 || n_pred == 0) return 0.0;
    // recurse over gt rows; each picks an unused pred or, when gts outnumber
    // preds, may stay unmatched only if the quota of skips is not exhausted
    std::size_t skips_allowed = n_gt > n_pred ? n_gt - n_pred : 0;
    double best = -1e300;
    std::vector<char> used(n_pred, 0);
    std::function<void(std::size_t, std::size_t, double)> rec =
        [&](std::size_t i, std::size_t skips, double acc) {
            if (i == n_gt) {
                if (acc > best) best = acc;
                return;
            }
            for (std::size_t j = 0; j < n_pred; ++j) {
                if (used[j]) continue;
                used[j] = 1;
                rec(i + 1, skips, acc + sim[i][j]);
                used[j] = 0;
            }
            if (skips < skips_allowed) rec(i + 1, skips + 1, acc);
        };
    rec(0, 0, 0.0);
    return best;
}

// Central finite differences through an arbitrary scalar function of the
// relation-head parameters.
inline ovsg::RelationHeadParams finite_difference_grads(
    const ovsg::RelationHeadParams& params,
    const std::function<double(const ovsg::RelationHeadParams&)>& f,
    double h = 1e-4) {
    ovsg::RelationHeadParams grads = params.zeros_like();
    ovsg::RelationHeadParams probe = params;
    std::vector<double*> probe_entries;
    probe.for_each_entry([&](double& x) { probe_entries.push_back(&x); });
    std::vector<double*> grad_entries;
    grads.for_each_entry([&](double& x) { grad_entries.push_back(&x); });
    for (std::size_t k = 0; k < probe_entries.size(); ++k) {
        double saved = *probe_entries[k];
        *probe_entries[k] = saved + h;
        double up = f(probe);
        *probe_entries[k] = saved - h;
        double down = f(probe);
        *probe_entries[k] = saved;
        *grad_entries[k] = (up - down) / (2 * h);
    }
    return grads;
}

// |a - b| relative to max(1, |a|, |b|).
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Maximum one-to-one credit between predictions and ground truths given a
// boolean match matrix (Kuhn's augmenting paths): the optimal assignment the
// greedy crediting is checked against.
inline int max_credit(const std::vector<std::vector<char>>& matches) {
    std::size_t n_pred = matches.size();
    std::size_t n_gt = n_pred ? matches[0].size() : 0;
    std::vector<int> gt_owner(n_gt, -1);
    std::function<bool(std::size_t, std::vector<char>&)> augment =
        [&](std::size_t p, std::vector<char>& visited) {
            for (std::size_t g = 0; g < n_gt; ++g) {
                if (!matches[p][g] || visited[g]) continue;
                visited[g] = 1;
                if (gt_owner[g] < 0 ||
                    augment(static_cast<std::size_t>(gt_owner[g]), visited)) {
                    gt_owner[g] = static_cast<int>(p);
                    return true;
                }
            }
            return false;
        };
    int credit = 0;
    for (std::size_t p = 0; p < n_pred; ++p) {
        std::vector<char> visited(n_gt, 0);
        if (augment(p, visited)) ++credit;
    }
    return credit;
}

// Straight-line duplicate of the relation head forward pass, written with
// index loops only (no shared helpers).
inline std::vector<double> straight_line_head(const std::vector<double>& v_s,
                                              const std::vector<double>& v_o,
                                              const ovsg::RelationHeadParams& p) {
    std::size_t d = p.dim(), dh = p.hidden_dim(), m = p.num_queries();
    std::vector<double> mean(d, 0.0);
    for (std::size_t n = 0; n < m; ++n) {
        std::vector<double> u;
        for (double x : v_s) u.push_back(x);
        for (double x : v_o) u.push_back(x);
        for (double x : p.queries[n]) u.push_back(x);
        std::vector<double> z(dh, 0.0);
        for (std::size_t i = 0; i < dh; ++i) {
            double s = p.b1[i];
            for (std::size_t j = 0; j < 3 * d; ++j) s += p.w1(i, j) * u[j];
            z[i] = s > 0 ? s : 0;
        }
        for (std::size_t i = 0; i < d; ++i) {
            double s = p.b2[i];
            for (std::size_t j = 0; j < dh; ++j) s += p.w2(i, j) * z[j];
            mean[i] += s / static_cast<double>(m);
        }
    }
    return mean;
}

}  // namespace oracles
