#pragma once
// Relation head and visual-concept alignment losses with exact analytic
// gradients over plain double vectors. The head is a two-layer ReLU MLP over
// [v_subject; v_object; query]; with multiple queries the per-query outputs
// are averaged. Alignment scores are dot products against a learned linear
// projection of concept embeddings.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ovsg/core.hpp"

namespace ovsg {

// Dense row-major matrix, just enough for the head math.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    bool operator==(const Mat&) const = default;
};

inline Vec matvec(const Mat& m, const Vec& x) {
    require(m.cols == x.size(), "matvec: dimension mismatch");
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0;
        const double* row = m.a.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline Vec matvec_t(const Mat& m, const Vec& x) {
    require(m.rows == x.size(), "matvec_t: dimension mismatch");
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.a.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += row[j] * x[i];
    }
    return y;
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
    require(x.size() == y.size(), "axpy: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void add_outer(double alpha, const Vec& u, const Vec& v, Mat& m) {
    require(m.rows == u.size() && m.cols == v.size(), "add_outer: shape mismatch");
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) += alpha * u[i] * v[j];
}

// Weights of the relation head plus the concept-to-feature projection.
// Doubles as the gradient container (same shapes).
struct RelationHeadParams {
    Mat w1;                   // hidden x 3*dim
    Vec b1;                   // hidden
    Mat w2;                   // dim x hidden
    Vec b2;                   // dim
    std::vector<Vec> queries; // num_queries x dim
    Mat proj_w;               // dim x text_dim
    Vec proj_b;               // dim

    std::size_t dim() const { return b2.size(); }
    std::size_t hidden_dim() const { return b1.size(); }
    std::size_t text_dim() const { return proj_w.cols; }
    std::size_t num_queries() const { return queries.size(); }

    bool operator==(const RelationHeadParams&) const = default;

    static RelationHeadParams zeros(std::size_t dim, std::size_t hidden,
                                    std::size_t text_dim, std::size_t num_queries) {
        RelationHeadParams p;
        p.w1 = Mat(hidden, 3 * dim);
        p.b1 = Vec(hidden, 0.0);
        p.w2 = Mat(dim, hidden);
        p.b2 = Vec(dim, 0.0);
        p.queries.assign(num_queries, Vec(dim, 0.0));
        p.proj_w = Mat(dim, text_dim);
        p.proj_b = Vec(dim, 0.0);
        return p;
    }

    static RelationHeadParams random(std::size_t dim, std::size_t hidden,
                                     std::size_t text_dim, std::size_t num_queries,
                                     Rng& rng, double scale = 0.5) {
        RelationHeadParams p = zeros(dim, hidden, text_dim, num_queries);
        auto fill = [&](std::vector<double>& v, double s) {
            for (double& x : v) x = s * rng.normal();
        };
        fill(p.w1.a, scale / std::sqrt(3.0 * dim));
        fill(p.b1, 0.01);
        fill(p.w2.a, scale / std::sqrt(static_cast<double>(hidden)));
        fill(p.b2, 0.01);
        for (auto& q : p.queries) fill(q, 1.0);
        fill(p.proj_w.a, scale / std::sqrt(static_cast<double>(text_dim)));
        fill(p.proj_b, 0.01);
        return p;
    }

    RelationHeadParams zeros_like() const {
        return zeros(dim(), hidden_dim(), text_dim(), num_queries());
    }

    void add_scaled(double alpha, const RelationHeadParams& g) {
        axpy(alpha, g.w1.a, w1.a);
        axpy(alpha, g.b1, b1);
        axpy(alpha, g.w2.a, w2.a);
        axpy(alpha, g.b2, b2);
        for (std::size_t n = 0; n < queries.size(); ++n)
            axpy(alpha, g.queries[n], queries[n]);
        axpy(alpha, g.proj_w.a, proj_w.a);
        axpy(alpha, g.proj_b, proj_b);
    }

    // For norm diagnostics, optimizers, and finite-difference walks in tests.
    // Order: w1, b1, w2, b2, queries, proj_w, proj_b.
    template <typename Fn>
    void for_each_entry(Fn&& fn) {
        for (double& x : w1.a) fn(x);
        for (double& x : b1) fn(x);
        for (double& x : w2.a) fn(x);
        for (double& x : b2) fn(x);
        for (auto& q : queries)
            for (double& x : q) fn(x);
        for (double& x : proj_w.a) fn(x);
        for (double& x : proj_b) fn(x);
    }

    template <typename Fn>
    void for_each_entry(Fn&& fn) const {
        for (double x : w1.a) fn(x);
        for (double x : b1) fn(x);
        for (double x : w2.a) fn(x);
        for (double x : b2) fn(x);
        for (const auto& q : queries)
            for (double x : q) fn(x);
        for (double x : proj_w.a) fn(x);
        for (double x : proj_b) fn(x);
    }

    std::size_t head_entry_count() const {
        return w1.a.size() + b1.size() + w2.a.size() + b2.size() +
               num_queries() * dim();
    }
};

namespace detail {
inline void check_pair_dims(const Vec& v_s, const Vec& v_o,
                            const RelationHeadParams& p) {
    require(v_s.size() == p.dim() && v_o.size() == p.dim(),
            "edge_feature: node dimension mismatch");
    require(p.num_queries() >= 1, "edge_feature: no relation queries");
    require(p.w1.rows == p.hidden_dim() && p.w1.cols == 3 * p.dim() &&
                p.w2.rows == p.dim() && p.w2.cols == p.hidden_dim(),
            "edge_feature: inconsistent head shapes");
    for (const auto& q : p.queries)
        require(q.size() == p.dim(), "edge_feature: query dimension mismatch");
}

// Forward pass for one query; caches the activations needed by backprop.
struct HeadTrace {
    Vec input;   // [v_s; v_o; r]
    Vec pre;     // w1 * input + b1
    Vec hidden;  // relu(pre)
    Vec out;     // w2 * hidden + b2
};

inline HeadTrace head_forward(const Vec& v_s, const Vec& v_o, const Vec& query,
                              const RelationHeadParams& p) {
    HeadTrace t;
    t.input.reserve(3 * p.dim());
    t.input.insert(t.input.end(), v_s.begin(), v_s.end());
    t.input.insert(t.input.end(), v_o.begin(), v_o.end());
    t.input.insert(t.input.end(), query.begin(), query.end());
    t.pre = matvec(p.w1, t.input);
    axpy(1.0, p.b1, t.pre);
    t.hidden = t.pre;
    for (double& h : t.hidden) h = h > 0 ? h : 0.0;
    t.out = matvec(p.w2, t.hidden);
    axpy(1.0, p.b2, t.out);
    return t;
}
}  // namespace detail

// Edge feature for a subject-object pair: mean over queries of the per-query
// head outputs. Identical per-query outputs short-circuit the average so that
// M copies of one query reproduce the single-query result bit for bit.
inline Vec edge_feature(const Vec& v_s, const Vec& v_o, const RelationHeadParams& p) {
    detail::check_pair_dims(v_s, v_o, p);
    std::size_t m = p.num_queries();
    detail::HeadTrace first = detail::head_forward(v_s, v_o, p.queries[0], p);
    if (m == 1) return first.out;
    Vec sum = first.out;
    bool all_equal = true;
    for (std::size_t n = 1; n < m; ++n) {
        Vec out = detail::head_forward(v_s, v_o, p.queries[n], p).out;
        all_equal = all_equal && out == first.out;
        axpy(1.0, out, sum);
    }
    if (all_equal) return first.out;
    for (double& x : sum) x /= static_cast<double>(m);
    return sum;
}

namespace detail {
// Accumulates d(loss)/d(head params) for grad_out = d(loss)/d(edge feature).
// Gradients for v_s / v_o are discarded: node features are module inputs.
inline void edge_feature_backward(const Vec& v_s, const Vec& v_o,
                                  const RelationHeadParams& p, const Vec& grad_out,
                                  RelationHeadParams& grads) {
    std::size_t m = p.num_queries();
    std::size_t d = p.dim();
    double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t n = 0; n < m; ++n) {
        HeadTrace t = head_forward(v_s, v_o, p.queries[n], p);
        Vec g_out(grad_out);
        for (double& x : g_out) x *= inv_m;
        add_outer(1.0, g_out, t.hidden, grads.w2);
        axpy(1.0, g_out, grads.b2);
        Vec g_hidden = matvec_t(p.w2, g_out);
        for (std::size_t k = 0; k < g_hidden.size(); ++k)
            if (t.pre[k] <= 0) g_hidden[k] = 0.0;
        add_outer(1.0, g_hidden, t.input, grads.w1);
        axpy(1.0, g_hidden, grads.b1);
        Vec g_input = matvec_t(p.w1, g_hidden);
        for (std::size_t k = 0; k < d; ++k)
            grads.queries[n][k] += g_input[2 * d + k];
    }
}
}  // namespace detail

// sigmoid(<w_concept, v_node>) -- the categorical similarity of Eq-style
// node alignment.
inline double node_similarity(const Vec& w_concept, const Vec& v_node) {
    return sigmoid(dot(w_concept, v_node));
}

// <e, proj_w * t + proj_b>: alignment score of an edge feature against a
// projected concept embedding.
inline double relation_score(const Vec& e, const Vec& t_embed,
                             const RelationHeadParams& p) {
    require(e.size() == p.dim(), "relation_score: edge feature dimension mismatch");
    require(t_embed.size() == p.text_dim(),
            "relation_score: concept embedding dimension mismatch");
    Vec projected = matvec(p.proj_w, t_embed);
    axpy(1.0, p.proj_b, projected);
    return dot(e, projected);
}

// One subject-object pair with its annotated and sampled predicate names.
struct PairSample {
    Vec v_subject;
    Vec v_object;
    std::set<std::string> positives;
    std::set<std::string> negatives;
};

using PairBatch = std::vector<PairSample>;

struct LossGrad {
    double loss = 0.0;
    RelationHeadParams grads;
};

constexpr double kLogitClamp = 30.0;

// Binary cross-entropy over every (pair, predicate) combination in the
// batch, averaged jointly over positives and negatives. Logits are clamped
// to [-30, 30] before the sigmoid; the clamp zeroes the gradient outside.
inline LossGrad bce_loss(const PairBatch& batch, const ConceptSpace& cs,
                         const RelationHeadParams& p) {
    require(!batch.empty(), "bce_loss: empty batch");
    std::size_t count = 0;
    for (const auto& s : batch) {
        for (const auto& name : s.positives)
            require(!s.negatives.count(name),
                    "bce_loss: predicate both positive and negative: " + name);
        count += s.positives.size() + s.negatives.size();
    }
    require(count > 0, "bce_loss: batch has no labeled predicates");

    LossGrad result;
    result.grads = p.zeros_like();
    double inv_count = 1.0 / static_cast<double>(count);

    for (const auto& sample : batch) {
        Vec e = edge_feature(sample.v_subject, sample.v_object, p);
        Vec grad_e(e.size(), 0.0);
        auto accumulate = [&](const std::string& name, double y) {
            const Concept* rel = cs.find_relation(name);
            require(rel != nullptr, "bce_loss: unknown relation " + name);
            const Vec& t = rel->embedding;
            Vec projected = matvec(p.proj_w, t);
            axpy(1.0, p.proj_b, projected);
            double s = dot(e, projected);
            bool clamped = s < -kLogitClamp || s > kLogitClamp;
            double s_hat = std::clamp(s, -kLogitClamp, kLogitClamp);
            double prob = sigmoid(s_hat);
            result.loss += inv_count * (-(y * std::log(prob) +
                                          (1.0 - y) * std::log(1.0 - prob)));
            if (clamped) return;
            double g = inv_count * (prob - y);  // d(loss)/d(s)
            axpy(g, projected, grad_e);
            add_outer(g, e, t, result.grads.proj_w);
            axpy(g, e, result.grads.proj_b);
        };
        for (const auto& name : sample.positives) accumulate(name, 1.0);
        for (const auto& name : sample.negatives) accumulate(name, 0.0);
        detail::edge_feature_backward(sample.v_subject, sample.v_object, p, grad_e,
                                      result.grads);
    }
    return result;
}

// Focal loss over raw logits; reduces to alpha-weighted BCE at gamma = 0.
// Returns the mean loss and its gradient with respect to each logit.
inline std::pair<double, Vec> focal_loss(const Vec& logits,
                                         const std::vector<int>& labels,
                                         double alpha, double gamma) {
    require(logits.size() == labels.size(), "focal_loss: length mismatch");
    require(!logits.empty(), "focal_loss: empty input");
    require(alpha > 0.0 && alpha < 1.0, "focal_loss: alpha outside (0,1)");
    require(gamma >= 0.0, "focal_loss: negative gamma");

    double inv_n = 1.0 / static_cast<double>(logits.size());
    double loss = 0.0;
    Vec grads(logits.size(), 0.0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        require(labels[i] == 0 || labels[i] == 1, "focal_loss: label not in {0,1}");
        double s_hat = std::clamp(logits[i], -kLogitClamp, kLogitClamp);
        bool clamped = s_hat != logits[i];
        double prob = sigmoid(s_hat);
        double p_t = labels[i] == 1 ? prob : 1.0 - prob;
        double a_t = labels[i] == 1 ? alpha : 1.0 - alpha;
        double focal = std::pow(1.0 - p_t, gamma);
        loss += inv_n * (-a_t * focal * std::log(p_t));
        if (clamped) continue;
        // d(loss)/d(p_t), then chain through d(p_t)/d(logit).
        double dl_dpt = -a_t * (focal / p_t);
        if (gamma > 0.0)
            dl_dpt += a_t * gamma * std::pow(1.0 - p_t, gamma - 1.0) * std::log(p_t);
        double dpt_dx = p_t * (1.0 - p_t) * (labels[i] == 1 ? 1.0 : -1.0);
        grads[i] = inv_n * dl_dpt * dpt_dx;
    }
    return {loss, grads};
}

// Builds a training batch from an annotated graph: every annotated
// (subject, object, predicate) is a positive; negatives are sampled for the
// same pair from the non-annotated part of the allowed vocabulary.
inline PairBatch batch_from_graph(
    const SceneGraph& g, const ConceptSpace& cs, int negatives_per_positive,
    Rng& rng, const std::vector<std::string>* allowed_negatives = nullptr) {
    require(negatives_per_positive >= 0, "batch_from_graph: negative ratio");
    std::vector<std::string> vocab =
        allowed_negatives ? *allowed_negatives : cs.names(ConceptKind::relation);

    std::map<std::pair<int, int>, std::set<std::string>> annotated;
    for (const auto& e : g.edges) annotated[{e.subject, e.object}].insert(e.predicate);

    PairBatch batch;
    for (const auto& [pair, positives] : annotated) {
        const Node& sub = g.nodes.at(pair.first);
        const Node& obj = g.nodes.at(pair.second);
        require(sub.feature.has_value() && obj.feature.has_value(),
                "batch_from_graph: node lacks a feature vector");
        PairSample sample;
        sample.v_subject = *sub.feature;
        sample.v_object = *obj.feature;
        sample.positives = positives;
        std::vector<std::string> candidates;
        for (const auto& name : vocab)
            if (!positives.count(name)) candidates.push_back(name);
        std::size_t want = positives.size() * static_cast<std::size_t>(negatives_per_positive);
        auto sampled = sample_without_replacement(candidates, want, rng);
        sample.negatives.insert(sampled.begin(), sampled.end());
        batch.push_back(std::move(sample));
    }
    return batch;
}

}  // namespace ovsg
