// ovsg: batch entry points for dataset validation, split generation, caption
// parsing, synthesized-graph ingestion, prompt building, the synthetic
// fine-tuning loop, and evaluation. Every command can record a run manifest
// (config snapshot, input digests, outputs, timing, seed).
//
// Exit codes: 0 success, 1 domain failure (violations, contract errors),
// 2 IO or schema failure.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ovsg/io.hpp"
#include "ovsg/prompt.hpp"

namespace {

using ovsg::json;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

// Config-file merge: a value from --config applies only when the flag was
// not given on the command line (flags win).
class ConfigMerger {
public:
    void load(const std::string& path) {
        if (path.empty()) return;
        config_ = json::parse(ovsg::read_file(path));
    }
    template <typename T>
    void merge(const CLI::Option* opt, const char* key, T& value) const {
        if (!config_.is_object()) return;
        if (opt && opt->count() > 0) return;
        if (config_.contains(key)) value = config_.at(key).get<T>();
    }
    const json& raw() const { return config_; }

private:
    json config_;
};

struct ManifestScope {
    ovsg::RunManifest manifest;
    std::string path;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void begin(const std::string& command, const json& config,
               const std::vector<std::string>& inputs, std::uint64_t seed,
               const std::string& manifest_path) {
        path = manifest_path;
        manifest.command = command;
        manifest.config = config;
        manifest.seed = seed;
        manifest.started = ovsg::iso_timestamp();
        for (const auto& in : inputs)
            if (!in.empty()) manifest.input_digests[in] = ovsg::file_digest(in);
        if (!path.empty()) ovsg::write_manifest(path, manifest);
    }
    void finish(const std::vector<std::string>& outputs, bool ok) {
        manifest.outputs = outputs;
        manifest.status = ok ? "complete" : "failed";
        manifest.finished = ovsg::iso_timestamp();
        manifest.duration_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                      t0)
                .count();
        if (!path.empty()) ovsg::write_manifest(path, manifest);
    }
};

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& dataset, const std::string& concepts,
                 const std::string& report_path) {
    std::optional<ovsg::ConceptSpace> cs;
    if (!concepts.empty()) cs = ovsg::load_concept_space(concepts);

    json violations = json::array();
    std::size_t images = 0;
    std::size_t violation_count = 0;
    ovsg::for_each_image(dataset, [&](const ovsg::SceneGraph& g) {
        ++images;
        for (const auto& v : ovsg::validate_graph(g, cs ? &*cs : nullptr)) {
            ++violation_count;
            if (violations.size() < 1000)
                violations.push_back({{"image_id", g.image_id},
                                      {"field", v.field},
                                      {"rule", v.rule},
                                      {"detail", v.detail}});
        }
    });
    json report;
    report["dataset"] = dataset;
    report["images"] = images;
    report["violation_count"] = violation_count;
    report["violations"] = violations;
    std::string text = ovsg::canonical_dump(report);
    if (!report_path.empty()) ovsg::atomic_write(report_path, text);
    std::cout << text;
    return violation_count == 0 ? kExitOk : kExitDomain;
}

int cmd_split(const std::string& dataset, const std::string& concepts,
              const std::string& setting_name, std::uint64_t seed,
              const std::string& split_file, const std::string& out_dir,
              ManifestScope& scope) {
    ovsg::SplitSpec spec;
    if (!split_file.empty()) {
        spec = ovsg::load_split(split_file);
        if (!setting_name.empty())
            spec.setting = ovsg::setting_from_string(setting_name);
    } else {
        ovsg::require(!concepts.empty(),
                      "split: --concepts required unless --split-file is given");
        ovsg::ConceptSpace cs = ovsg::load_concept_space(concepts);
        spec = ovsg::make_split(cs, ovsg::setting_from_string(setting_name), seed);
    }

    std::string relation_path = join_path(out_dir, "relation_train.json");
    std::string detection_path = join_path(out_dir, "detection_train.json");
    std::string split_path = join_path(out_dir, "split.json");
    std::string census_path = join_path(out_dir, "census.json");

    ovsg::DatasetWriter relation_writer(relation_path);
    ovsg::DatasetWriter detection_writer(detection_path);
    ovsg::SplitCensus census;
    ovsg::for_each_image(dataset, [&](const ovsg::SceneGraph& g) {
        ovsg::SceneGraph filtered = ovsg::filter_graph(g, spec);
        if (!filtered.nodes.empty()) detection_writer.add(filtered);
        if (filtered.edges.empty()) return;  // excluded from relation training
        census.images += 1;
        census.nodes += filtered.nodes.size();
        census.edges += filtered.edges.size();
        relation_writer.add(filtered);
    });
    relation_writer.finish();
    detection_writer.finish();
    ovsg::atomic_write(split_path, ovsg::canonical_dump(ovsg::split_to_json(spec)));
    json census_json = {{"images", census.images},
                        {"nodes", census.nodes},
                        {"edges", census.edges},
                        {"detection_images", detection_writer.count()}};
    ovsg::atomic_write(census_path, ovsg::canonical_dump(census_json));
    std::cout << ovsg::canonical_dump(census_json);
    scope.finish({relation_path, detection_path, split_path, census_path}, true);
    return kExitOk;
}

int cmd_parse_captions(const std::string& captions, const std::string& concepts,
                       const std::string& candidates, const std::string& out,
                       ManifestScope& scope) {
    ovsg::ConceptSpace cs = ovsg::load_concept_space(concepts);
    auto records = ovsg::load_captions_jsonl(captions);

    std::map<std::string, const ovsg::SceneGraph*> candidate_by_id;
    std::vector<ovsg::SceneGraph> candidate_graphs;
    if (!candidates.empty()) {
        candidate_graphs = ovsg::load_dataset(candidates);
        for (const auto& g : candidate_graphs) candidate_by_id[g.image_id] = &g;
    }

    json out_json;
    out_json["captions"] = json::array();
    std::size_t total_triplets = 0;
    for (const auto& rec : records) {
        auto triplets = ovsg::parse_caption(rec.caption, cs);
        total_triplets += triplets.size();
        json cj;
        cj["image_id"] = rec.image_id;
        cj["caption"] = rec.caption;
        cj["triplets"] = json::array();
        for (const auto& t : triplets)
            cj["triplets"].push_back({{"subject", t.subject_phrase},
                                      {"predicate", t.predicate_phrase},
                                      {"object", t.object_phrase},
                                      {"source", ovsg::to_string(t.source)}});
        auto it = candidate_by_id.find(rec.image_id);
        if (it != candidate_by_id.end()) {
            auto grounded = ovsg::ground_triplets(triplets, it->second->nodes, cs);
            cj["grounded_edges"] = json::array();
            for (const auto& e : grounded.edges)
                cj["grounded_edges"].push_back(ovsg::edge_to_json(e));
            cj["dropped"] = grounded.dropped;
        }
        out_json["captions"].push_back(std::move(cj));
    }
    out_json["triplet_count"] = total_triplets;
    std::string text = ovsg::canonical_dump(out_json);
    if (!out.empty())
        ovsg::atomic_write(out, text);
    else
        std::cout << text;
    scope.finish(out.empty() ? std::vector<std::string>{} : std::vector<std::string>{out},
                 true);
    return kExitOk;
}

int cmd_ingest_synth(const std::string& input, const std::string& out,
                     ManifestScope& scope) {
    ovsg::IngestResult result = ovsg::ingest_synthesized(input);
    json j;
    j["records"] = json::array();
    for (const auto& r : result.records) {
        json rj = ovsg::synth_record_to_json(r);
        rj["pipeline"] = r.pipeline;
        rj["model"] = r.model;
        rj["boxes_low_trust"] = r.boxes_low_trust;
        j["records"].push_back(std::move(rj));
    }
    j["errors"] = json::array();
    for (const auto& e : result.errors)
        j["errors"].push_back({{"index", e.index},
                               {"image_id", e.image_id},
                               {"reason", e.reason}});
    j["accepted"] = result.records.size();
    j["rejected"] = result.errors.size();
    std::string text = ovsg::canonical_dump(j);
    if (!out.empty())
        ovsg::atomic_write(out, text);
    else
        std::cout << text;
    scope.finish(out.empty() ? std::vector<std::string>{} : std::vector<std::string>{out},
                 true);
    return result.errors.empty() ? kExitOk : kExitDomain;
}

int cmd_prompt(const std::string& concepts, const std::vector<std::string>& positives,
               int m, std::uint64_t seed, int budget, const std::string& out,
               ManifestScope& scope) {
    ovsg::ConceptSpace cs = ovsg::load_concept_space(concepts);
    ovsg::Prompt prompt = ovsg::build_prompt(positives, cs, m, seed, budget);
    json j;
    j["cap"] = prompt.cap;
    j["positives"] = prompt.positives;
    j["negatives"] = prompt.negatives;
    j["tokens"] = prompt.tokens;
    j["text"] = ovsg::prompt_text(prompt);
    std::string text = ovsg::canonical_dump(j);
    if (!out.empty()) ovsg::atomic_write(out, text);
    std::cout << ovsg::prompt_text(prompt) << "\n";
    scope.finish(out.empty() ? std::vector<std::string>{} : std::vector<std::string>{out},
                 true);
    return kExitOk;
}

int cmd_finetune(ovsg::WorldConfig world_cfg, double lambda, double step_size,
                 int steps, std::uint64_t run_seed, const std::string& out_dir,
                 ManifestScope& scope) {
    ovsg::SyntheticWorld world = ovsg::make_world(world_cfg);
    ovsg::DistillConfig cfg;
    cfg.lambda = lambda;
    cfg.step_size = step_size;
    cfg.steps = steps;
    cfg.seed = run_seed;
    ovsg::FinetuneResult result = ovsg::finetune(world, cfg);

    std::string teacher_path = join_path(out_dir, "teacher.json");
    std::string student_path = join_path(out_dir, "student.json");
    std::string traj_path = join_path(out_dir, "trajectory.json");
    ovsg::save_params(teacher_path, world.teacher);
    ovsg::save_params(student_path, result.student);
    json tj;
    tj["config"] = {{"lambda", lambda},
                    {"step_size", step_size},
                    {"steps", steps},
                    {"seed", run_seed},
                    {"world_seed", world_cfg.seed}};
    tj["points"] = ovsg::trajectory_to_json(result.trajectory);
    ovsg::atomic_write(traj_path, ovsg::canonical_dump(tj));

    const auto& first = result.trajectory.front();
    const auto& last = result.trajectory.back();
    std::cout << "finetune lambda=" << lambda << " steps=" << steps
              << "  base " << first.base_recall << " -> " << last.base_recall
              << "  novel " << first.novel_recall << " -> " << last.novel_recall
              << "\n";
    scope.finish({teacher_path, student_path, traj_path}, true);
    return kExitOk;
}

int cmd_evaluate(const std::string& gt_path, const std::string& pred_path,
                 const std::string& split_path, const std::string& concepts,
                 const std::string& protocol, std::vector<std::string> partitions,
                 std::vector<int> ks, double iou_threshold, int max_objects,
                 bool micro, const std::string& out, const std::string& table_out,
                 ManifestScope& scope) {
    std::vector<ovsg::SceneGraph> gt = ovsg::load_dataset(gt_path);
    std::vector<ovsg::SceneGraph> preds = ovsg::load_dataset(pred_path);
    ovsg::SplitSpec spec;
    if (!split_path.empty()) spec = ovsg::load_split(split_path);
    std::optional<ovsg::ConceptSpace> cs;
    if (!concepts.empty()) cs = ovsg::load_concept_space(concepts);

    if (partitions.empty()) partitions = {"base_plus_novel"};
    std::vector<ovsg::EvalReport> reports;
    for (const auto& partition : partitions) {
        ovsg::EvalConfig cfg;
        cfg.ks = ks;
        cfg.iou_threshold = iou_threshold;
        cfg.protocol = ovsg::protocol_from_string(protocol);
        cfg.partition = ovsg::partition_from_string(partition);
        cfg.max_objects = max_objects;
        cfg.micro_average = micro;
        reports.push_back(
            ovsg::evaluate(gt, preds, spec, cfg, cs ? &*cs : nullptr));
    }

    json j;
    j["reports"] = json::array();
    for (const auto& r : reports) j["reports"].push_back(ovsg::report_to_json(r));
    if (!out.empty()) ovsg::atomic_write(out, ovsg::canonical_dump(j));
    std::string table = ovsg::report_table(reports);
    if (!table_out.empty()) ovsg::atomic_write(table_out, table);
    std::cout << table;

    std::vector<std::string> outputs;
    if (!out.empty()) outputs.push_back(out);
    if (!table_out.empty()) outputs.push_back(table_out);
    scope.finish(outputs, true);
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& report_paths,
               const std::string& out) {
    std::vector<ovsg::EvalReport> reports;
    for (const auto& path : report_paths) {
        json j = json::parse(ovsg::read_file(path));
        if (j.contains("reports"))
            for (const auto& rj : j["reports"])
                reports.push_back(ovsg::report_from_json(rj));
        else
            reports.push_back(ovsg::report_from_json(j));
    }
    std::string table = ovsg::report_table(reports);
    if (!out.empty()) ovsg::atomic_write(out, table);
    std::cout << table;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"open-vocabulary scene-graph toolkit"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads,
                   "worker threads (overrides OVSG_THREADS)");
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags win");
    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "write a run manifest here");

    // validate
    auto* validate = app.add_subcommand("validate", "check dataset invariants");
    std::string v_dataset, v_concepts, v_report;
    validate->add_option("--dataset", v_dataset)->required();
    validate->add_option("--concepts", v_concepts);
    validate->add_option("--report", v_report);

    // split
    auto* split = app.add_subcommand("split", "build an open-vocabulary split");
    std::string s_dataset, s_concepts, s_setting, s_split_file, s_out_dir;
    std::uint64_t s_seed = 0;
    auto* s_setting_opt = split->add_option("--setting", s_setting,
                                            "closed|ovd|ovr|ovd_r");
    auto* s_seed_opt = split->add_option("--seed", s_seed);
    split->add_option("--dataset", s_dataset)->required();
    split->add_option("--concepts", s_concepts);
    split->add_option("--split-file", s_split_file, "use this split verbatim");
    split->add_option("--out-dir", s_out_dir)->required();

    // parse-captions
    auto* parse = app.add_subcommand("parse-captions",
                                     "extract triplets from a caption corpus");
    std::string p_captions, p_concepts, p_candidates, p_out;
    parse->add_option("--captions", p_captions, "JSONL of {image_id, caption}")
        ->required();
    parse->add_option("--concepts", p_concepts)->required();
    parse->add_option("--candidates", p_candidates,
                      "dataset of candidate boxes for grounding");
    parse->add_option("--out", p_out);

    // ingest-synth
    auto* ingest = app.add_subcommand("ingest-synth",
                                      "normalize synthesized scene graphs");
    std::string i_input, i_out;
    ingest->add_option("--input", i_input)->required();
    ingest->add_option("--out", i_out);

    // prompt
    auto* prompt = app.add_subcommand("prompt", "build a text prompt");
    std::string pr_concepts, pr_out;
    std::vector<std::string> pr_positives;
    int pr_m = 80;
    int pr_budget = 256;
    std::uint64_t pr_seed = 0;
    prompt->add_option("--concepts", pr_concepts)->required();
    prompt->add_option("--positives", pr_positives)->delimiter(',');
    auto* pr_m_opt = prompt->add_option("-m,--cap", pr_m, "word cap M");
    auto* pr_seed_opt = prompt->add_option("--seed", pr_seed);
    auto* pr_budget_opt = prompt->add_option("--budget", pr_budget);
    prompt->add_option("--out", pr_out);

    // finetune
    auto* finetune = app.add_subcommand("finetune",
                                        "synthetic-world fine-tuning loop");
    std::string f_out_dir;
    double f_lambda = 0.1, f_step = 0.5;
    int f_steps = 60;
    std::uint64_t f_seed = 1, f_world_seed = 1;
    auto* f_lambda_opt = finetune->add_option("--lambda", f_lambda);
    auto* f_step_opt = finetune->add_option("--step-size", f_step);
    auto* f_steps_opt = finetune->add_option("--steps", f_steps);
    auto* f_seed_opt = finetune->add_option("--seed", f_seed);
    auto* f_world_seed_opt = finetune->add_option("--world-seed", f_world_seed);
    finetune->add_option("--out-dir", f_out_dir)->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "score predictions");
    std::string e_gt, e_preds, e_split, e_concepts, e_protocol = "sgdet";
    std::string e_out, e_table;
    std::vector<std::string> e_partitions;
    std::vector<int> e_ks = {20, 50, 100};
    double e_iou = 0.5;
    int e_max_objects = 100;
    bool e_micro = false;
    evaluate->add_option("--gt", e_gt)->required();
    evaluate->add_option("--preds", e_preds)->required();
    evaluate->add_option("--split", e_split);
    evaluate->add_option("--concepts", e_concepts);
    auto* e_protocol_opt = evaluate->add_option("--protocol", e_protocol);
    evaluate->add_option("--partitions", e_partitions)->delimiter(',');
    auto* e_ks_opt = evaluate->add_option("--ks", e_ks)->delimiter(',');
    auto* e_iou_opt = evaluate->add_option("--iou", e_iou);
    auto* e_max_opt = evaluate->add_option("--max-objects", e_max_objects);
    evaluate->add_flag("--micro", e_micro, "corpus-level averaging");
    evaluate->add_option("--out", e_out);
    evaluate->add_option("--table", e_table);

    // report
    auto* report = app.add_subcommand("report", "render report JSON as a table");
    std::vector<std::string> r_reports;
    std::string r_out;
    report->add_option("--report", r_reports)->required();
    report->add_option("--out", r_out);

    CLI11_PARSE(app, argc, argv);

    try {
        ConfigMerger config;
        config.load(config_path);
        if (threads > 0)
            setenv("OVSG_THREADS", std::to_string(threads).c_str(), 1);

        ManifestScope scope;
        if (validate->parsed()) {
            return cmd_validate(v_dataset, v_concepts, v_report);
        }
        if (split->parsed()) {
            config.merge(s_setting_opt, "setting", s_setting);
            config.merge(s_seed_opt, "seed", s_seed);
            scope.begin("split",
                        {{"dataset", s_dataset},
                         {"setting", s_setting},
                         {"seed", s_seed},
                         {"split_file", s_split_file}},
                        {s_dataset, s_concepts, s_split_file}, s_seed,
                        manifest_path.empty() && !s_out_dir.empty()
                            ? join_path(s_out_dir, "manifest.json")
                            : manifest_path);
            return cmd_split(s_dataset, s_concepts, s_setting, s_seed, s_split_file,
                             s_out_dir, scope);
        }
        if (parse->parsed()) {
            scope.begin("parse-captions", {{"captions", p_captions}},
                        {p_captions, p_concepts, p_candidates}, 0, manifest_path);
            return cmd_parse_captions(p_captions, p_concepts, p_candidates, p_out,
                                      scope);
        }
        if (ingest->parsed()) {
            scope.begin("ingest-synth", {{"input", i_input}}, {i_input}, 0,
                        manifest_path);
            return cmd_ingest_synth(i_input, i_out, scope);
        }
        if (prompt->parsed()) {
            config.merge(pr_m_opt, "cap", pr_m);
            config.merge(pr_seed_opt, "seed", pr_seed);
            config.merge(pr_budget_opt, "budget", pr_budget);
            scope.begin("prompt", {{"cap", pr_m}, {"seed", pr_seed}},
                        {pr_concepts}, pr_seed, manifest_path);
            return cmd_prompt(pr_concepts, pr_positives, pr_m, pr_seed, pr_budget,
                              pr_out, scope);
        }
        if (finetune->parsed()) {
            config.merge(f_lambda_opt, "lambda", f_lambda);
            config.merge(f_step_opt, "step_size", f_step);
            config.merge(f_steps_opt, "steps", f_steps);
            config.merge(f_seed_opt, "seed", f_seed);
            config.merge(f_world_seed_opt, "world_seed", f_world_seed);
            ovsg::WorldConfig world_cfg;
            world_cfg.seed = f_world_seed;
            scope.begin("finetune",
                        {{"lambda", f_lambda},
                         {"step_size", f_step},
                         {"steps", f_steps},
                         {"world_seed", f_world_seed}},
                        {}, f_seed,
                        manifest_path.empty() && !f_out_dir.empty()
                            ? join_path(f_out_dir, "manifest.json")
                            : manifest_path);
            return cmd_finetune(world_cfg, f_lambda, f_step, f_steps, f_seed,
                                f_out_dir, scope);
        }
        if (evaluate->parsed()) {
            config.merge(e_protocol_opt, "protocol", e_protocol);
            config.merge(e_ks_opt, "ks", e_ks);
            config.merge(e_iou_opt, "iou", e_iou);
            config.merge(e_max_opt, "max_objects", e_max_objects);
            scope.begin("evaluate",
                        {{"protocol", e_protocol},
                         {"iou", e_iou},
                         {"max_objects", e_max_objects}},
                        {e_gt, e_preds, e_split, e_concepts}, 0, manifest_path);
            return cmd_evaluate(e_gt, e_preds, e_split, e_concepts, e_protocol,
                                e_partitions, e_ks, e_iou, e_max_objects, e_micro,
                                e_out, e_table, scope);
        }
        if (report->parsed()) {
            return cmd_report(r_reports, r_out);
        }
    } catch (const ovsg::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const ovsg::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
