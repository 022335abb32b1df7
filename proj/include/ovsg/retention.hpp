#pragma once
// Visual-concept retention: L1 distillation of edge features from a frozen
// teacher, the combined fine-tuning objective, and a self-contained synthetic
// world small enough to reproduce the catastrophic-forgetting phenomenon on
// a desktop. The world plants a hidden labeling rule, pre-trains a teacher on
// noisy full-vocabulary annotations, and fine-tunes on clean base-only
// annotations; novel relations appear only in held-out evaluation scenes.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ovsg/alignment.hpp"

namespace ovsg {

// Mean L1 distance between student and teacher edge features over negative
// pairs. Gradients flow only to the student.
inline LossGrad distill_loss(const std::vector<std::pair<Vec, Vec>>& neg_pairs,
                             const RelationHeadParams& teacher,
                             const RelationHeadParams& student) {
    require(!neg_pairs.empty(), "distill_loss: empty negative set");
    require(teacher.dim() == student.dim() &&
                teacher.hidden_dim() == student.hidden_dim() &&
                teacher.num_queries() == student.num_queries(),
            "distill_loss: teacher/student shape mismatch");
    LossGrad result;
    result.grads = student.zeros_like();
    double inv_n = 1.0 / static_cast<double>(neg_pairs.size());
    for (const auto& [v_s, v_o] : neg_pairs) {
        Vec e_s = edge_feature(v_s, v_o, student);
        Vec e_t = edge_feature(v_s, v_o, teacher);
        Vec grad_e(e_s.size(), 0.0);
        for (std::size_t k = 0; k < e_s.size(); ++k) {
            double diff = e_s[k] - e_t[k];
            result.loss += inv_n * std::abs(diff);
            grad_e[k] = diff > 0 ? inv_n : (diff < 0 ? -inv_n : 0.0);
        }
        detail::edge_feature_backward(v_s, v_o, student, grad_e, result.grads);
    }
    return result;
}

struct DistillConfig {
    double lambda = 0.1;
    RelationHeadParams teacher;  // frozen
    RelationHeadParams student;  // optimized; empty means "start from teacher"
    double step_size = 0.5;
    int steps = 60;
    std::uint64_t seed = 1;
    int negatives_per_positive = 3;
    int background_negatives = 8;  // sampled words pushed down per background pair
    std::size_t recall_top_k = 0;  // 0: as many as there are true triplets
    // the pre-trained text projection fine-tunes with a reduced rate, DETR
    // param-group style
    double proj_rate_scale = 0.05;
    bool decay_step_size = true;  // linear decay to zero across the run
};

// L_bce + lambda * L_distill with gradients for the student.
inline LossGrad total_loss(const PairBatch& batch,
                           const std::vector<std::pair<Vec, Vec>>& neg_pairs,
                           const ConceptSpace& cs, const DistillConfig& cfg) {
    require(cfg.lambda >= 0.0, "total_loss: negative lambda");
    LossGrad total = bce_loss(batch, cs, cfg.student);
    if (cfg.lambda > 0.0) {
        LossGrad distill = distill_loss(neg_pairs, cfg.teacher, cfg.student);
        total.loss += cfg.lambda * distill.loss;
        total.grads.add_scaled(cfg.lambda, distill.grads);
    }
    return total;
}

struct WorldConfig {
    int dim = 12;
    int n_objects = 20;
    int n_relations = 50;
    int n_novel_relations = 15;
    int n_queries = 1;
    int pretrain_scenes = 96;
    int finetune_scenes = 96;
    int eval_scenes = 96;
    int background_per_scene = 2;  // unannotated pairs trained as negatives
    double teacher_noise = 0.05;  // parameter noise on the constructed teacher
    // novel embeddings share a common component, so the novel relations form
    // one coherent region of the concept space rather than 15 scattered ones
    double novel_cluster = 0.0;
    // novel patterns carry less weight in the labeling rule: novel relations
    // are rarer and their evidence weaker, which puts their triplets just
    // above the ranking cut, the regime where forgetting bites
    double novel_pattern_gain = 1.0;
    // short calibration of the noisy emulator on full-vocabulary weak labels,
    // so the teacher's score field sits at its BCE equilibrium; the label
    // noise is the weak-supervision imperfection the fine-tuning later fixes
    int pretrain_steps = 150;
    double pretrain_rate = 0.3;
    double label_noise = 0.25;
    // weak supervision misses unusual predicates far more often, so novel
    // labels are corrupted at a higher rate; the teacher ends up knowing
    // novel relations only marginally, the way pre-training leaves them
    double novel_label_noise = 0.55;
    int negatives_per_positive = 3;
    std::uint64_t seed = 1;
};

struct LabeledPair {
    Vec v_subject;
    Vec v_object;
    std::string predicate;
};

// Annotated pairs plus the background pairs that carry no annotation; the
// background set is what the distillation loss runs over.
struct PairPool {
    std::vector<LabeledPair> annotated;
    std::vector<std::pair<Vec, Vec>> background;
};

struct SyntheticWorld {
    WorldConfig config;
    ConceptSpace space;
    std::set<std::string> novel_relations;
    std::vector<SceneGraph> pretrain_scenes;  // full vocabulary, teacher only
    std::vector<SceneGraph> finetune_scenes;  // clean, base predicates only
    std::vector<SceneGraph> eval_scenes;      // clean, held out
    PairPool pretrain;  // full-vocabulary labels + background
    PairPool finetune;  // base-labeled + background incl. former novel pairs
    PairPool eval;      // clean truths (base and novel) + background
    RelationHeadParams teacher;  // calibrated noisy emulator of the rule
};

namespace detail {

inline Vec random_unit_vec(std::size_t dim, Rng& rng) {
    Vec v(dim);
    double n = 0;
    do {
        for (double& x : v) x = rng.normal();
        n = norm2(v);
    } while (n < 1e-9);
    for (double& x : v) x /= n;
    return v;
}

inline ConceptSpace synthetic_concepts(const WorldConfig& cfg, Rng& rng,
                                       std::set<std::string>& novel_out) {
    ConceptSpace cs;
    cs.dim = cfg.dim;
    for (int i = 0; i < cfg.n_objects; ++i) {
        Concept c;
        c.name = "obj" + std::to_string(i);
        c.kind = ConceptKind::object;
        c.embedding = random_unit_vec(cfg.dim, rng);
        cs.objects.push_back(std::move(c));
    }
    std::vector<int> order(cfg.n_relations);
    for (int i = 0; i < cfg.n_relations; ++i) order[i] = i;
    seeded_shuffle(order, rng);
    std::set<int> novel_ids(order.begin(), order.begin() + cfg.n_novel_relations);
    Vec novel_center = random_unit_vec(cfg.dim, rng);
    for (int i = 0; i < cfg.n_relations; ++i) {
        Concept c;
        c.name = "rel" + std::to_string(i);
        c.kind = ConceptKind::relation;
        c.split = novel_ids.count(i) ? VocabSplit::novel : VocabSplit::base;
        c.embedding = random_unit_vec(cfg.dim, rng);
        if (c.split == VocabSplit::novel) {
            novel_out.insert(c.name);
            for (std::size_t k = 0; k < c.embedding.size(); ++k)
                c.embedding[k] = cfg.novel_cluster * novel_center[k] +
                                 (1.0 - cfg.novel_cluster) * c.embedding[k];
            double n = norm2(c.embedding);
            for (double& x : c.embedding) x /= n;
        }
        cs.relations.push_back(std::move(c));
    }
    return cs;
}

// Hidden labeling rule: the pair feature [v_s; v_o] goes through a fixed
// random linear map; the relation whose hidden pattern best aligns with the
// image names the edge. Patterns are a fixed linear transform of the concept
// embeddings, so the rule is exactly representable by a relation head, and
// exchangeability keeps the label distribution roughly uniform.
struct WorldRule {
    Mat map;                         // dim x 2*dim
    Mat pattern_map;                 // dim x dim
    Vec pattern_bias;                // centers the pattern set
    std::vector<Vec> patterns;       // pattern_map * t_r + pattern_bias
    std::vector<std::string> names;  // parallel to patterns
};

// Exact emulator of the rule: relu(Hu) - relu(-Hu) recovers the linear map
// inside the two-layer head, and the projection equals the pattern transform,
// so scores coincide with the rule. Parameter noise then degrades it into an
// imperfect "pre-trained" teacher.
inline RelationHeadParams emulator_params(const WorldRule& rule, int dim,
                                          int n_queries, double noise, Rng& rng) {
    std::size_t d = static_cast<std::size_t>(dim);
    RelationHeadParams p = RelationHeadParams::zeros(d, 2 * d, d, n_queries);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < 2 * d; ++j) {
            p.w1(i, j) = rule.map(i, j);
            p.w1(d + i, j) = -rule.map(i, j);
        }
    for (std::size_t i = 0; i < d; ++i) {
        p.w2(i, i) = 1.0;
        p.w2(i, d + i) = -1.0;
    }
    p.proj_w = rule.pattern_map;
    p.proj_b = rule.pattern_bias;
    p.for_each_entry([&](double& x) { x += noise * rng.normal(); });
    return p;
}

inline std::string true_predicate(const Vec& v_s, const Vec& v_o,
                                  const WorldRule& rule) {
    Vec pair;
    pair.reserve(v_s.size() + v_o.size());
    pair.insert(pair.end(), v_s.begin(), v_s.end());
    pair.insert(pair.end(), v_o.begin(), v_o.end());
    Vec z = matvec(rule.map, pair);
    double best = -1e300;
    std::size_t arg = 0;
    for (std::size_t r = 0; r < rule.patterns.size(); ++r) {
        double s = dot(z, rule.patterns[r]);
        if (s > best) {
            best = s;
            arg = r;
        }
    }
    return rule.names[arg];
}

struct SceneSample {
    SceneGraph graph;
    std::vector<std::pair<int, int>> background;  // lowest-affinity pairs
};

// Nodes carry random unit features; the ordered pairs with the highest rule
// affinity (max pattern alignment) become annotated edges, the lowest become
// designated background pairs. The gap in between keeps the two populations
// separable, the way annotated relations differ from unrelated object pairs.
inline SceneSample synthetic_scene(const std::string& id, const WorldConfig& cfg,
                                   const WorldRule& oracle, const ConceptSpace& cs,
                                   Rng& rng) {
    SceneSample sample;
    SceneGraph& g = sample.graph;
    g.image_id = id;
    g.width = 640;
    g.height = 480;
    int n_nodes = 4 + static_cast<int>(rng.uniform_index(3));
    for (int i = 0; i < n_nodes; ++i) {
        Node n;
        n.feature = random_unit_vec(cfg.dim, rng);
        double best = -1e300;
        for (const auto& c : cs.objects) {
            double s = dot(c.embedding, *n.feature);
            if (s > best) {
                best = s;
                n.category = c.name;
            }
        }
        double x1 = rng.uniform_in(0, g.width - 40);
        double y1 = rng.uniform_in(0, g.height - 40);
        n.box = BBox{x1, y1, x1 + rng.uniform_in(20, g.width - x1 - 1),
                     y1 + rng.uniform_in(20, g.height - y1 - 1)};
        g.nodes.push_back(std::move(n));
    }

    struct Ranked {
        int s, o;
        double affinity;
        std::string predicate;
    };
    std::vector<Ranked> pairs;
    for (int s = 0; s < n_nodes; ++s) {
        for (int o = 0; o < n_nodes; ++o) {
            if (s == o) continue;
            Vec pair;
            pair.insert(pair.end(), g.nodes[s].feature->begin(),
                        g.nodes[s].feature->end());
            pair.insert(pair.end(), g.nodes[o].feature->begin(),
                        g.nodes[o].feature->end());
            Vec z = matvec(oracle.map, pair);
            double best = -1e300;
            std::size_t arg = 0;
            for (std::size_t r = 0; r < oracle.patterns.size(); ++r) {
                double v = dot(z, oracle.patterns[r]);
                if (v > best) {
                    best = v;
                    arg = r;
                }
            }
            pairs.push_back({s, o, best, oracle.names[arg]});
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Ranked& a, const Ranked& b) {
        return a.affinity > b.affinity;
    });

    int n_edges = 2 + static_cast<int>(rng.uniform_index(3));
    n_edges = std::min<int>(n_edges, static_cast<int>(pairs.size()));
    for (int k = 0; k < n_edges; ++k)
        g.edges.push_back({pairs[k].s, pairs[k].o, pairs[k].predicate, 1.0});
    for (int k = 0; k < cfg.background_per_scene &&
                    k < static_cast<int>(pairs.size()) - n_edges;
         ++k) {
        const Ranked& worst = pairs[pairs.size() - 1 - k];
        sample.background.push_back({worst.s, worst.o});
    }
    return sample;
}

// Annotated pairs come from the graph edges; background pairs are the
// designated low-affinity pairs (plus any forced extras, e.g. pairs whose
// novel edge was filtered away).
inline void pool_from_scenes(
    const std::vector<SceneSample>& scenes, PairPool& pool,
    const std::map<std::string, std::vector<std::pair<int, int>>>* forced_background =
        nullptr) {
    for (const auto& sample : scenes) {
        const SceneGraph& g = sample.graph;
        for (const auto& e : g.edges)
            pool.annotated.push_back({*g.nodes[e.subject].feature,
                                      *g.nodes[e.object].feature, e.predicate});
        std::set<std::pair<int, int>> taken;
        for (const auto& e : g.edges) taken.insert({e.subject, e.object});
        auto add_background = [&](int s, int o) {
            if (taken.count({s, o})) return;
            taken.insert({s, o});
            pool.background.emplace_back(*g.nodes[s].feature, *g.nodes[o].feature);
        };
        if (forced_background) {
            auto it = forced_background->find(g.image_id);
            if (it != forced_background->end())
                for (auto [s, o] : it->second) add_background(s, o);
        }
        for (auto [s, o] : sample.background) add_background(s, o);
    }
}

// One BCE batch over a pool: annotated pairs carry their predicate as the
// positive, background pairs carry only sampled negatives.
inline PairBatch pool_batch(const PairPool& pool,
                            const std::vector<std::string>& vocab,
                            int negatives_per_positive, int background_negatives,
                            Rng& rng) {
    PairBatch batch;
    for (const auto& p : pool.annotated) {
        PairSample s;
        s.v_subject = p.v_subject;
        s.v_object = p.v_object;
        s.positives = {p.predicate};
        std::vector<std::string> candidates;
        for (const auto& name : vocab)
            if (name != p.predicate) candidates.push_back(name);
        auto sampled = sample_without_replacement(
            candidates, static_cast<std::size_t>(negatives_per_positive), rng);
        s.negatives.insert(sampled.begin(), sampled.end());
        batch.push_back(std::move(s));
    }
    for (const auto& [v_s, v_o] : pool.background) {
        PairSample s;
        s.v_subject = v_s;
        s.v_object = v_o;
        auto sampled = sample_without_replacement(
            vocab, static_cast<std::size_t>(background_negatives), rng);
        s.negatives.insert(sampled.begin(), sampled.end());
        batch.push_back(std::move(s));
    }
    return batch;
}

}  // namespace detail

struct WorldRecall {
    double base = 0.0;
    double novel = 0.0;
};

// SGDet-style pooled ranking: every (pair, relation) combination over the
// evaluation truths and background pairs is scored, the top_k highest scores
// are kept (default: as many as there are true triplets), and recall is the
// fraction of base / novel truths inside that cut.
inline WorldRecall world_recall(const SyntheticWorld& world,
                                const RelationHeadParams& params,
                                std::size_t top_k = 0) {
    const PairPool& pool = world.eval;
    if (pool.annotated.empty()) return {};
    if (top_k == 0) top_k = pool.annotated.size();

    std::vector<Vec> projected;
    projected.reserve(world.space.relations.size());
    for (const auto& c : world.space.relations) {
        Vec t = matvec(params.proj_w, c.embedding);
        axpy(1.0, params.proj_b, t);
        projected.push_back(std::move(t));
    }

    struct Candidate {
        double score;
        int pair;  // annotated index, or -1 for background
        int rel;
    };
    std::vector<Candidate> candidates;
    std::vector<int> truth_rel(pool.annotated.size(), -1);
    auto score_pair = [&](const Vec& v_s, const Vec& v_o, int pair_idx) {
        Vec e = edge_feature(v_s, v_o, params);
        for (std::size_t r = 0; r < projected.size(); ++r)
            candidates.push_back(
                {dot(e, projected[r]), pair_idx, static_cast<int>(r)});
    };
    for (std::size_t i = 0; i < pool.annotated.size(); ++i) {
        score_pair(pool.annotated[i].v_subject, pool.annotated[i].v_object,
                   static_cast<int>(i));
        for (std::size_t r = 0; r < world.space.relations.size(); ++r)
            if (world.space.relations[r].name == pool.annotated[i].predicate)
                truth_rel[i] = static_cast<int>(r);
    }
    for (const auto& [v_s, v_o] : pool.background) score_pair(v_s, v_o, -1);

    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.score > b.score;
                     });
    if (candidates.size() > top_k) candidates.resize(top_k);

    std::size_t base_total = 0, novel_total = 0, base_hit = 0, novel_hit = 0;
    for (std::size_t i = 0; i < pool.annotated.size(); ++i) {
        bool is_novel = world.novel_relations.count(pool.annotated[i].predicate) > 0;
        (is_novel ? novel_total : base_total) += 1;
    }
    for (const auto& c : candidates) {
        if (c.pair < 0 || truth_rel[c.pair] != c.rel) continue;
        bool is_novel =
            world.novel_relations.count(pool.annotated[c.pair].predicate) > 0;
        (is_novel ? novel_hit : base_hit) += 1;
    }
    WorldRecall out;
    if (base_total > 0) out.base = static_cast<double>(base_hit) / base_total;
    if (novel_total > 0) out.novel = static_cast<double>(novel_hit) / novel_total;
    return out;
}

inline SyntheticWorld make_world(const WorldConfig& cfg) {
    require(cfg.dim >= 2 && cfg.n_relations >= 2 &&
                cfg.n_novel_relations < cfg.n_relations,
            "make_world: degenerate configuration");
    SyntheticWorld w;
    w.config = cfg;
    Rng rng(mix_seed(cfg.seed, 0xA11CE));
    w.space = detail::synthetic_concepts(cfg, rng, w.novel_relations);

    detail::WorldRule oracle;
    oracle.map = Mat(cfg.dim, 2 * cfg.dim);
    double map_scale = 1.0 / std::sqrt(2.0);
    for (double& x : oracle.map.a) x = map_scale * rng.normal();
    oracle.pattern_map = Mat(cfg.dim, cfg.dim);
    double pat_scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    for (double& x : oracle.pattern_map.a) x = pat_scale * rng.normal();
    // center the pattern set so rule scores are zero-mean per pair; the
    // argmax is invariant and the sigmoid operating point stays sane
    Vec mean_embedding(cfg.dim, 0.0);
    for (const auto& c : w.space.relations)
        axpy(1.0 / w.space.relations.size(), c.embedding, mean_embedding);
    oracle.pattern_bias = matvec(oracle.pattern_map, mean_embedding);
    for (double& x : oracle.pattern_bias) x = -x;
    for (const auto& c : w.space.relations) {
        oracle.names.push_back(c.name);
        Vec p = matvec(oracle.pattern_map, c.embedding);
        axpy(1.0, oracle.pattern_bias, p);
        if (c.split == VocabSplit::novel)
            for (double& x : p) x *= cfg.novel_pattern_gain;
        oracle.patterns.push_back(std::move(p));
    }

    std::vector<detail::SceneSample> pretrain_samples;
    std::vector<detail::SceneSample> finetune_samples;
    std::vector<detail::SceneSample> eval_samples;
    for (int i = 0; i < cfg.pretrain_scenes; ++i)
        pretrain_samples.push_back(detail::synthetic_scene(
            "pre_" + std::to_string(i), cfg, oracle, w.space, rng));
    for (int i = 0; i < cfg.finetune_scenes; ++i)
        finetune_samples.push_back(detail::synthetic_scene(
            "ft_" + std::to_string(i), cfg, oracle, w.space, rng));
    for (int i = 0; i < cfg.eval_scenes; ++i)
        eval_samples.push_back(detail::synthetic_scene(
            "ev_" + std::to_string(i), cfg, oracle, w.space, rng));

    // OvR-style filtering: novel edges disappear from the fine-tuning
    // annotations; their pairs remain visible and become background.
    std::map<std::string, std::vector<std::pair<int, int>>> former_novel;
    for (auto& sample : finetune_samples) {
        SceneGraph& g = sample.graph;
        std::vector<Edge> kept;
        for (const auto& e : g.edges) {
            if (w.novel_relations.count(e.predicate))
                former_novel[g.image_id].push_back({e.subject, e.object});
            else
                kept.push_back(e);
        }
        g.edges = std::move(kept);
    }

    // weak supervision: corrupt a fraction of the pre-training predicates,
    // novel ones more often
    for (auto& sample : pretrain_samples)
        for (auto& e : sample.graph.edges) {
            double p = w.novel_relations.count(e.predicate) ? cfg.novel_label_noise
                                                            : cfg.label_noise;
            if (rng.uniform() < p)
                e.predicate =
                    w.space.relations[rng.uniform_index(w.space.relations.size())]
                        .name;
        }

    detail::pool_from_scenes(pretrain_samples, w.pretrain);
    detail::pool_from_scenes(finetune_samples, w.finetune, &former_novel);
    detail::pool_from_scenes(eval_samples, w.eval);
    for (auto& sample : pretrain_samples)
        w.pretrain_scenes.push_back(std::move(sample.graph));
    for (auto& sample : finetune_samples)
        w.finetune_scenes.push_back(std::move(sample.graph));
    for (auto& sample : eval_samples)
        w.eval_scenes.push_back(std::move(sample.graph));

    // The stand-in for the relation-aware pre-trained model: the rule
    // emulator corrupted by parameter noise, then calibrated with a short
    // full-vocabulary run so its score field sits at the BCE equilibrium.
    w.teacher = detail::emulator_params(oracle, cfg.dim, cfg.n_queries,
                                        cfg.teacher_noise, rng);
    std::vector<std::string> vocab = w.space.names(ConceptKind::relation);
    Rng pretrain_rng(mix_seed(cfg.seed, 0x7EAC4));
    for (int step = 1; step <= cfg.pretrain_steps; ++step) {
        PairBatch batch = detail::pool_batch(w.pretrain, vocab,
                                             cfg.negatives_per_positive,
                                             cfg.negatives_per_positive,
                                             pretrain_rng);
        LossGrad lg = bce_loss(batch, w.space, w.teacher);
        require(std::isfinite(lg.loss), "make_world: teacher calibration diverged");
        double rate = cfg.pretrain_rate *
                      static_cast<double>(cfg.pretrain_steps - step + 1) /
                      cfg.pretrain_steps;
        w.teacher.add_scaled(-rate, lg.grads);
    }
    return w;
}

struct TrajectoryPoint {
    int step = 0;
    double base_recall = 0.0;
    double novel_recall = 0.0;
};

struct FinetuneResult {
    std::vector<TrajectoryPoint> trajectory;
    RelationHeadParams student;
};

// Gradient descent on L_bce + lambda * L_distill over the base-only
// fine-tuning annotations plus background pairs. Negative predicates are
// sampled from the base vocabulary each step; the distillation term runs
// over the background pairs. Held-out pooled recalls are recorded per step.
// Deterministic for a fixed cfg.seed.
inline FinetuneResult finetune(const SyntheticWorld& world, DistillConfig cfg) {
    if (cfg.teacher.dim() == 0) cfg.teacher = world.teacher;
    if (cfg.student.dim() == 0) cfg.student = cfg.teacher;
    require(cfg.student.dim() == cfg.teacher.dim() &&
                cfg.student.hidden_dim() == cfg.teacher.hidden_dim(),
            "finetune: teacher/student shape mismatch");
    require(cfg.step_size > 0, "finetune: non-positive step size");
    require(cfg.steps >= 0, "finetune: negative step count");

    std::vector<std::string> base_vocab;
    for (const auto& c : world.space.relations)
        if (c.split == VocabSplit::base) base_vocab.push_back(c.name);

    const std::vector<std::pair<Vec, Vec>>& neg_pairs = world.finetune.background;

    FinetuneResult result;
    Rng rng(mix_seed(cfg.seed, 0xF17E));
    auto record = [&](int step) {
        WorldRecall r = world_recall(world, cfg.student, cfg.recall_top_k);
        result.trajectory.push_back({step, r.base, r.novel});
    };
    record(0);
    for (int step = 1; step <= cfg.steps; ++step) {
        PairBatch batch =
            detail::pool_batch(world.finetune, base_vocab,
                               cfg.negatives_per_positive,
                               cfg.background_negatives, rng);
        LossGrad lg = total_loss(batch, neg_pairs, world.space, cfg);
        if (!std::isfinite(lg.loss))
            throw ContractError("finetune: loss diverged at step " +
                                std::to_string(step));
        for (double& x : lg.grads.proj_w.a) x *= cfg.proj_rate_scale;
        for (double& x : lg.grads.proj_b) x *= cfg.proj_rate_scale;
        double rate = cfg.step_size;
        if (cfg.decay_step_size)
            rate *= 0.25 + 0.75 * static_cast<double>(cfg.steps - step + 1) /
                               cfg.steps;
        cfg.student.add_scaled(-rate, lg.grads);
        record(step);
    }
    result.student = std::move(cfg.student);
    return result;
}

}  // namespace ovsg
