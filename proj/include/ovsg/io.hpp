#pragma once
// JSON (de)serialization for every file format the CLI speaks, plus atomic
// writes, content digests, and run manifests. Canonical form is nlohmann's
// two-space dump (keys alphabetical) with a trailing newline; serializing a
// parsed canonical file reproduces it byte for byte.
//
// Dataset reading streams image objects through a SAX handler, so memory
// stays bounded by the largest single image, not the corpus.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ovsg/alignment.hpp"
#include "ovsg/caption.hpp"
#include "ovsg/evaluation.hpp"
#include "ovsg/retention.hpp"
#include "ovsg/splits.hpp"

namespace ovsg {

using nlohmann::json;

inline std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// files

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out) throw IoError("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string file_digest(const std::string& path) {
    return fnv1a_digest(read_file(path));
}

// ---------------------------------------------------------------------------
// scene graphs

inline json node_to_json(const Node& n) {
    json j;
    j["box"] = {n.box.x1, n.box.y1, n.box.x2, n.box.y2};
    j["category"] = n.category;
    j["score"] = n.score;
    if (n.feature) j["feature"] = *n.feature;
    return j;
}

inline json edge_to_json(const Edge& e) {
    json j;
    j["sub"] = e.subject;
    j["obj"] = e.object;
    j["predicate"] = e.predicate;
    j["score"] = e.score;
    return j;
}

inline json image_to_json(const SceneGraph& g) {
    json j;
    j["image_id"] = g.image_id;
    j["width"] = g.width;
    j["height"] = g.height;
    j["nodes"] = json::array();
    for (const auto& n : g.nodes) j["nodes"].push_back(node_to_json(n));
    j["edges"] = json::array();
    for (const auto& e : g.edges) j["edges"].push_back(edge_to_json(e));
    return j;
}

enum class BoxFormat { xyxy_abs, cxcywh_norm };

inline BBox box_from_json(const json& arr, BoxFormat fmt, double w, double h) {
    if (!arr.is_array() || arr.size() != 4)
        throw IoError("box must be an array of 4 numbers");
    double a = arr[0].get<double>(), b = arr[1].get<double>(),
           c = arr[2].get<double>(), d = arr[3].get<double>();
    if (fmt == BoxFormat::cxcywh_norm) return box_from_cxcywh_norm(a, b, c, d, w, h);
    return BBox{a, b, c, d};
}

inline SceneGraph image_from_json(const json& j,
                                  BoxFormat fmt = BoxFormat::xyxy_abs) {
    SceneGraph g;
    g.image_id = j.at("image_id").is_string() ? j.at("image_id").get<std::string>()
                                              : j.at("image_id").dump();
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    for (const auto& nj : j.value("nodes", json::array())) {
        Node n;
        n.box = box_from_json(nj.at("box"), fmt, g.width, g.height);
        n.category = normalize_name(nj.at("category").get<std::string>());
        n.score = nj.value("score", 1.0);
        if (nj.contains("feature")) n.feature = nj.at("feature").get<Vec>();
        g.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j.value("edges", json::array())) {
        Edge e;
        e.subject = ej.at("sub").get<int>();
        e.object = ej.at("obj").get<int>();
        e.predicate = normalize_name(ej.at("predicate").get<std::string>());
        e.score = ej.value("score", 1.0);
        g.edges.push_back(std::move(e));
    }
    return g;
}

namespace detail {

// Rebuilds one JSON value from SAX events using a stack of containers;
// container addresses are never retained across events.
class DomBuilder {
public:
    void reset() {
        stack_.clear();
        pending_key_.clear();
        complete_ = false;
    }
    bool complete() const { return complete_; }
    json take() { return std::move(result_); }

    void open(json container) {
        stack_.emplace_back(std::move(container), pending_key_);
        pending_key_.clear();
    }
    void close() {
        auto [container, key] = std::move(stack_.back());
        stack_.pop_back();
        place(std::move(container), key);
    }
    void value(json v) { place(std::move(v), pending_key_); }
    void key(std::string k) { pending_key_ = std::move(k); }
    bool in_value() const { return !stack_.empty(); }

private:
    void place(json v, const std::string& key) {
        if (stack_.empty()) {
            result_ = std::move(v);
            complete_ = true;
            return;
        }
        json& top = stack_.back().first;
        if (top.is_object())
            top[key] = std::move(v);
        else
            top.push_back(std::move(v));
    }

    std::vector<std::pair<json, std::string>> stack_;
    std::string pending_key_;
    json result_;
    bool complete_ = false;
};

// SAX handler that dispatches each element of the top-level "images" array
// without materializing the whole document.
class ImageStreamHandler : public nlohmann::json_sax<json> {
public:
    std::function<void(json&&)> on_image;
    std::function<void(const std::string&, json&&)> on_meta;  // other top keys

    bool null() override { return emit(nullptr); }
    bool boolean(bool v) override { return emit(v); }
    bool number_integer(number_integer_t v) override { return emit(v); }
    bool number_unsigned(number_unsigned_t v) override { return emit(v); }
    bool number_float(number_float_t v, const string_t&) override { return emit(v); }
    bool string(string_t& v) override { return emit(v); }
    bool binary(binary_t& v) override { return emit(v); }

    bool start_object(std::size_t) override {
        if (collecting_) {
            builder_.open(json::object());
        } else if (in_images_) {
            collecting_ = true;
            builder_.reset();
            builder_.open(json::object());
        } else {
            ++outer_depth_;
        }
        return true;
    }
    bool end_object() override {
        if (collecting_) {
            builder_.close();
            if (builder_.complete()) {
                collecting_ = false;
                if (on_image) on_image(builder_.take());
            }
        } else {
            --outer_depth_;
        }
        return true;
    }
    bool start_array(std::size_t) override {
        if (collecting_) {
            builder_.open(json::array());
        } else if (outer_depth_ == 1 && outer_key_ == "images" && !in_images_) {
            in_images_ = true;
        } else if (in_images_) {
            // array element that is itself an array: not an image object
            collecting_ = true;
            builder_.reset();
            builder_.open(json::array());
        } else {
            ++ignored_arrays_;
        }
        return true;
    }
    bool end_array() override {
        if (collecting_) {
            builder_.close();
            if (builder_.complete()) collecting_ = false;  // dropped: not an object
        } else if (in_images_) {
            in_images_ = false;
        } else {
            --ignored_arrays_;
        }
        return true;
    }
    bool key(string_t& k) override {
        if (collecting_)
            builder_.key(k);
        else
            outer_key_ = k;
        return true;
    }
    bool parse_error(std::size_t pos, const std::string&,
                     const nlohmann::detail::exception& ex) override {
        throw IoError("JSON parse error at byte " + std::to_string(pos) + ": " +
                      ex.what());
    }

private:
    bool emit(json v) {
        if (collecting_) {
            builder_.value(std::move(v));
        } else if (!in_images_ && outer_depth_ == 1 && ignored_arrays_ == 0 &&
                   on_meta) {
            on_meta(outer_key_, std::move(v));
        }
        return true;
    }

    DomBuilder builder_;
    bool collecting_ = false;
    bool in_images_ = false;
    int outer_depth_ = 0;
    int ignored_arrays_ = 0;
    std::string outer_key_;
};

}  // namespace detail

// Streams the images of a dataset file one by one. The optional box_format
// top-level key ("xyxy_abs" | "cxcywh_norm") must precede the images array.
inline void for_each_image(const std::string& path,
                           const std::function<void(const SceneGraph&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    BoxFormat fmt = BoxFormat::xyxy_abs;
    detail::ImageStreamHandler handler;
    handler.on_meta = [&](const std::string& key, json&& v) {
        if (key == "box_format") {
            std::string s = v.get<std::string>();
            if (s == "cxcywh_norm")
                fmt = BoxFormat::cxcywh_norm;
            else if (s != "xyxy_abs")
                throw IoError("unknown box_format: " + s);
        }
    };
    handler.on_image = [&](json&& j) { fn(image_from_json(j, fmt)); };
    json::sax_parse(in, &handler);
}

inline std::vector<SceneGraph> load_dataset(const std::string& path) {
    std::vector<SceneGraph> out;
    for_each_image(path, [&](const SceneGraph& g) { out.push_back(g); });
    return out;
}

// Incremental canonical writer: emits the same bytes as canonical_dump of
// the whole {"images": [...]} document without holding every image.
class DatasetWriter {
public:
    explicit DatasetWriter(std::string path) : path_(std::move(path)) {
        buffer_ = "{\n  \"images\": [";
    }
    void add(const SceneGraph& g) {
        buffer_ += first_ ? "\n" : ",\n";
        first_ = false;
        std::string body = image_to_json(g).dump(2);
        std::istringstream lines(body);
        std::string line;
        bool first_line = true;
        while (std::getline(lines, line)) {
            if (!first_line) buffer_ += "\n";
            buffer_ += "    ";
            buffer_ += line;
            first_line = false;
        }
        ++count_;
    }
    std::size_t count() const { return count_; }
    void finish() {
        buffer_ += first_ ? "]\n}\n" : "\n  ]\n}\n";
        atomic_write(path_, buffer_);
    }

private:
    std::string path_;
    std::string buffer_;
    bool first_ = true;
    std::size_t count_ = 0;
};

inline void save_dataset(const std::string& path,
                         const std::vector<SceneGraph>& graphs) {
    DatasetWriter writer(path);
    for (const auto& g : graphs) writer.add(g);
    writer.finish();
}

// ---------------------------------------------------------------------------
// concept spaces

inline json concept_space_to_json(const ConceptSpace& cs) {
    json j;
    j["dim"] = cs.dim;
    for (const char* kind : {"objects", "relations"}) {
        j[kind] = json::array();
        const auto& list =
            kind == std::string("objects") ? cs.objects : cs.relations;
        for (const auto& c : list) {
            json cj;
            cj["name"] = c.name;
            cj["split"] = c.split == VocabSplit::novel ? "novel" : "base";
            cj["embedding"] = c.embedding;
            j[kind].push_back(cj);
        }
    }
    return j;
}

inline ConceptSpace concept_space_from_json(const json& j) {
    ConceptSpace cs;
    cs.dim = j.at("dim").get<int>();
    auto parse_list = [&](const char* key, ConceptKind kind,
                          std::vector<Concept>& out) {
        for (const auto& cj : j.value(key, json::array())) {
            Concept c;
            c.name = normalize_name(cj.at("name").get<std::string>());
            c.kind = kind;
            std::string split = cj.value("split", "base");
            if (split != "base" && split != "novel")
                throw IoError("concept split must be base|novel: " + c.name);
            c.split = split == "novel" ? VocabSplit::novel : VocabSplit::base;
            c.embedding = cj.at("embedding").get<Vec>();
            out.push_back(std::move(c));
        }
    };
    parse_list("objects", ConceptKind::object, cs.objects);
    parse_list("relations", ConceptKind::relation, cs.relations);
    return cs;
}

inline ConceptSpace load_concept_space(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
    ConceptSpace cs = concept_space_from_json(j);
    auto bad = cs.check();
    if (!bad.empty()) throw IoError(path + ": " + bad.front());
    return cs;
}

// ---------------------------------------------------------------------------
// split specs

inline json split_to_json(const SplitSpec& spec) {
    json j;
    j["setting"] = to_string(spec.setting);
    j["seed"] = spec.seed;
    j["novel_objects"] = spec.novel_objects;
    j["novel_relations"] = spec.novel_relations;
    return j;
}

inline SplitSpec split_from_json(const json& j) {
    SplitSpec spec;
    spec.setting = setting_from_string(j.at("setting").get<std::string>());
    spec.seed = j.value("seed", 0ULL);
    for (const auto& s : j.value("novel_objects", json::array()))
        spec.novel_objects.insert(normalize_name(s.get<std::string>()));
    for (const auto& s : j.value("novel_relations", json::array()))
        spec.novel_relations.insert(normalize_name(s.get<std::string>()));
    return spec;
}

inline SplitSpec load_split(const std::string& path) {
    try {
        return split_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// relation head checkpoints

inline json mat_to_json(const Mat& m) {
    json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["data"] = m.a;
    return j;
}

inline Mat mat_from_json(const json& j) {
    Mat m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    m.a = j.at("data").get<std::vector<double>>();
    if (m.a.size() != m.rows * m.cols) throw IoError("matrix shape mismatch");
    return m;
}

inline json params_to_json(const RelationHeadParams& p) {
    json j;
    j["dim"] = p.dim();
    j["hidden"] = p.hidden_dim();
    j["text_dim"] = p.text_dim();
    j["w1"] = mat_to_json(p.w1);
    j["b1"] = p.b1;
    j["w2"] = mat_to_json(p.w2);
    j["b2"] = p.b2;
    j["queries"] = p.queries;
    j["proj_w"] = mat_to_json(p.proj_w);
    j["proj_b"] = p.proj_b;
    return j;
}

inline RelationHeadParams params_from_json(const json& j) {
    RelationHeadParams p;
    p.w1 = mat_from_json(j.at("w1"));
    p.b1 = j.at("b1").get<Vec>();
    p.w2 = mat_from_json(j.at("w2"));
    p.b2 = j.at("b2").get<Vec>();
    for (const auto& q : j.at("queries")) p.queries.push_back(q.get<Vec>());
    p.proj_w = mat_from_json(j.at("proj_w"));
    p.proj_b = j.at("proj_b").get<Vec>();
    detail::check_pair_dims(Vec(p.dim(), 0.0), Vec(p.dim(), 0.0), p);
    return p;
}

inline void save_params(const std::string& path, const RelationHeadParams& p) {
    atomic_write(path, canonical_dump(params_to_json(p)));
}

inline RelationHeadParams load_params(const std::string& path) {
    try {
        return params_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// evaluation reports

inline json report_to_json(const EvalReport& r) {
    json j;
    j["protocol"] = to_string(r.protocol);
    j["partition"] = to_string(r.partition);
    j["averaging"] = r.micro_average ? "micro" : "image";
    j["ks"] = r.ks;
    j["image_count"] = r.image_count;
    j["missing_images"] = r.missing_images;
    j["recall"] = json::object();
    for (const auto& [k, v] : r.recall) j["recall"][std::to_string(k)] = v;
    j["mean_recall"] = json::object();
    for (const auto& [k, v] : r.mean_recall) j["mean_recall"][std::to_string(k)] = v;
    j["per_predicate"] = json::object();
    for (const auto& [pred, table] : r.per_predicate) {
        json t = json::object();
        for (const auto& [k, v] : table) t[std::to_string(k)] = v;
        j["per_predicate"][pred] = t;
    }
    j["predicate_gt_counts"] = r.predicate_gt_counts;
    return j;
}

inline EvalReport report_from_json(const json& j) {
    EvalReport r;
    r.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    r.partition = partition_from_string(j.at("partition").get<std::string>());
    r.micro_average = j.value("averaging", "image") == std::string("micro");
    r.ks = j.at("ks").get<std::vector<int>>();
    r.image_count = j.at("image_count").get<std::size_t>();
    for (const auto& s : j.value("missing_images", json::array()))
        r.missing_images.push_back(s.get<std::string>());
    // .items() must not run on a temporary: bind first
    json recall = j.value("recall", json::object());
    for (const auto& [k, v] : recall.items()) r.recall[std::stoi(k)] = v.get<double>();
    json mean_recall = j.value("mean_recall", json::object());
    for (const auto& [k, v] : mean_recall.items())
        r.mean_recall[std::stoi(k)] = v.get<double>();
    json per_predicate = j.value("per_predicate", json::object());
    for (const auto& [pred, t] : per_predicate.items())
        for (const auto& [k, v] : t.items())
            r.per_predicate[pred][std::stoi(k)] = v.get<double>();
    json gt_counts = j.value("predicate_gt_counts", json::object());
    for (const auto& [pred, v] : gt_counts.items())
        r.predicate_gt_counts[pred] = v.get<int>();
    return r;
}

// Plain-text table, one row per report, R@K then mR@K columns.
inline std::string report_table(const std::vector<EvalReport>& reports) {
    std::ostringstream out;
    if (reports.empty()) return "(no reports)\n";
    const auto& ks = reports.front().ks;
    out << "protocol  partition          images ";
    for (int k : ks) out << "  R@" << k;
    for (int k : ks) out << "  mR@" << k;
    out << "\n";
    for (const auto& r : reports) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-9s %-18s %6zu ", to_string(r.protocol),
                      to_string(r.partition), r.image_count);
        out << line;
        auto cell = [&](const std::map<int, double>& m, int k, int width) {
            char buf[32];
            if (m.count(k))
                std::snprintf(buf, sizeof(buf), "%*.2f", width,
                              100.0 * m.at(k));
            else
                std::snprintf(buf, sizeof(buf), "%*s", width, "-");
            out << buf;
        };
        for (int k : ks) cell(r.recall, k, 6 + (k >= 100 ? 1 : 0));
        for (int k : ks) cell(r.mean_recall, k, 7 + (k >= 100 ? 1 : 0));
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// captions and synthesized graphs

struct CaptionRecord {
    std::string image_id;
    std::string caption;
};

inline std::vector<CaptionRecord> load_captions_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<CaptionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            out.push_back({j.at("image_id").get<std::string>(),
                           j.at("caption").get<std::string>()});
        } catch (const json::exception& e) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

struct IngestError {
    std::size_t index = 0;
    std::string image_id;
    std::string reason;
};

struct IngestResult {
    std::vector<SynthesizedGraphRecord> records;
    std::vector<IngestError> errors;
};

inline json synth_record_to_json(const SynthesizedGraphRecord& r) {
    json j;
    j["image_id"] = r.image_id;
    if (r.width > 0) j["width"] = r.width;
    if (r.height > 0) j["height"] = r.height;
    j["nodes"] = json::array();
    for (const auto& n : r.nodes) {
        json nj;
        nj["category"] = n.category;
        nj["score"] = n.score;
        if (n.box) nj["box"] = {n.box->x1, n.box->y1, n.box->x2, n.box->y2};
        j["nodes"].push_back(nj);
    }
    j["edges"] = json::array();
    for (const auto& e : r.edges) j["edges"].push_back(edge_to_json(e));
    return j;
}

inline json synth_file_to_json(const std::vector<SynthesizedGraphRecord>& records,
                               const std::string& pipeline,
                               const std::string& model) {
    json j;
    j["provenance"] = {{"pipeline", pipeline}, {"model", model}};
    j["images"] = json::array();
    for (const auto& r : records) j["images"].push_back(synth_record_to_json(r));
    return j;
}

// Normalizes an externally synthesized scene-graph file. Records that break
// the schema are reported and skipped; valid records are kept. Unknown
// predicates survive verbatim (open vocabulary).
inline IngestResult ingest_synthesized(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
    std::string pipeline = "llm";
    std::string model;
    if (doc.contains("provenance")) {
        pipeline = doc["provenance"].value("pipeline", "llm");
        model = doc["provenance"].value("model", "");
        triplet_source_from_string(pipeline);  // validates
    }
    IngestResult result;
    std::size_t index = 0;
    for (const auto& ij : doc.value("images", json::array())) {
        std::size_t my_index = index++;
        std::string image_id = ij.value("image_id", "");
        try {
            SynthesizedGraphRecord r;
            r.image_id = ij.at("image_id").get<std::string>();
            r.width = ij.value("width", 0);
            r.height = ij.value("height", 0);
            r.pipeline = pipeline;
            r.model = model;
            bool any_box = false;
            for (const auto& nj : ij.value("nodes", json::array())) {
                SynthNode n;
                n.category = normalize_name(nj.at("category").get<std::string>());
                if (n.category.empty()) throw IoError("empty category");
                n.score = nj.value("score", 1.0);
                if (nj.contains("box")) {
                    n.box = box_from_json(nj.at("box"), BoxFormat::xyxy_abs, r.width,
                                          r.height);
                    any_box = true;
                }
                r.nodes.push_back(std::move(n));
            }
            for (const auto& ej : ij.value("edges", json::array())) {
                Edge e;
                e.subject = ej.at("sub").get<int>();
                e.object = ej.at("obj").get<int>();
                e.predicate = normalize_name(ej.at("predicate").get<std::string>());
                e.score = ej.value("score", 1.0);
                if (e.subject < 0 || e.object < 0 ||
                    e.subject >= static_cast<int>(r.nodes.size()) ||
                    e.object >= static_cast<int>(r.nodes.size()))
                    throw IoError("edge references a missing node");
                if (e.subject == e.object) throw IoError("self-loop edge");
                if (e.predicate.empty()) throw IoError("empty predicate");
                r.edges.push_back(std::move(e));
            }
            r.boxes_low_trust = pipeline == "mllm" && any_box;
            result.records.push_back(std::move(r));
        } catch (const std::exception& e) {
            result.errors.push_back({my_index, image_id, e.what()});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// fine-tuning artifacts

inline json trajectory_to_json(const std::vector<TrajectoryPoint>& traj) {
    json arr = json::array();
    for (const auto& p : traj)
        arr.push_back({{"step", p.step},
                       {"base_recall", p.base_recall},
                       {"novel_recall", p.novel_recall}});
    return arr;
}

// ---------------------------------------------------------------------------
// run manifests

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Written with status "running" before the work and finalized afterwards;
// same inputs + seed reproduce the same outputs.
struct RunManifest {
    std::string command;
    json config = json::object();
    std::map<std::string, std::string> input_digests;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::string status = "running";
    std::string started;
    std::string finished;
    double duration_ms = 0;

    json to_json() const {
        json j;
        j["command"] = command;
        j["config"] = config;
        j["inputs"] = input_digests;
        j["outputs"] = outputs;
        j["seed"] = seed;
        j["status"] = status;
        j["started"] = started;
        j["finished"] = finished;
        j["duration_ms"] = duration_ms;
        return j;
    }
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
    atomic_write(path, canonical_dump(m.to_json()));
}

}  // namespace ovsg
