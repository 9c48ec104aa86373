#pragma once

// JSON (de)serialization for worlds, corpora and trained models, plus
// atomic file writes (temp file + rename).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ibp/prob.hpp"
#include "ibp/trainer.hpp"
#include "ibp/world_gen.hpp"

namespace ibp {

using json = nlohmann::json;

inline json world_to_json(const World& w) {
    return json{{"name", w.name},
                {"x_labels", w.joint.x_labels},
                {"y_labels", w.joint.y_labels},
                {"joint", w.joint.mass},
                {"metadata", w.metadata}};
}

inline World world_from_json(const json& j) {
    World w;
    w.name = j.at("name").get<std::string>();
    w.joint.x_labels = j.at("x_labels").get<std::vector<std::string>>();
    w.joint.y_labels = j.at("y_labels").get<std::vector<std::string>>();
    w.joint.mass = j.at("joint").get<std::vector<double>>();
    if (j.contains("metadata"))
        w.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    w.validate();
    return w;
}

inline json corpus_to_json(const ParallelCorpus& c) {
    json pairs = json::array();
    for (const auto& [x, y] : c.pairs) pairs.push_back(json::array({x, y}));
    return json{{"world_name", c.world_name}, {"seed", c.seed}, {"pairs", pairs}};
}

inline ParallelCorpus corpus_from_json(const json& j) {
    ParallelCorpus c;
    c.world_name = j.at("world_name").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("pairs"))
        c.pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
    if (c.pairs.empty()) throw std::invalid_argument("corpus_from_json: empty pair list");
    return c;
}

inline json logit_table_to_json(const LogitTable& t) {
    return json{{"rows", t.rows}, {"cols", t.cols}, {"logits", t.logits}};
}

inline LogitTable logit_table_from_json(const json& j) {
    LogitTable t;
    t.rows = j.at("rows").get<std::size_t>();
    t.cols = j.at("cols").get<std::size_t>();
    t.logits = j.at("logits").get<std::vector<double>>();
    if (t.logits.size() != t.rows * t.cols)
        throw std::invalid_argument("logit_table_from_json: size mismatch");
    return t;
}

inline json config_to_json(const TrainerConfig& c) {
    return json{{"lambda", c.lambda},
                {"k_frac", c.k_frac},
                {"lr", c.lr},
                {"steps", c.steps},
                {"n_clusters", c.n_clusters},
                {"batch_size", c.batch_size},
                {"seed", c.seed},
                {"mode", c.mode == TrainerConfig::Mode::Exact ? "exact" : "sampled"}};
}

inline TrainerConfig config_from_json(const json& j) {
    TrainerConfig c;
    c.lambda = j.at("lambda").get<double>();
    c.k_frac = j.at("k_frac").get<double>();
    c.lr = j.at("lr").get<double>();
    c.steps = j.at("steps").get<std::size_t>();
    c.n_clusters = j.at("n_clusters").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.mode = j.at("mode").get<std::string>() == "sampled" ? TrainerConfig::Mode::Sampled
                                                          : TrainerConfig::Mode::Exact;
    c.validate();
    return c;
}

inline json model_to_json(const TrainState& st, const TrainerConfig& config,
                          const std::string& world_name) {
    return json{{"encoder_logits", logit_table_to_json(st.encoder)},
                {"mt_decoder_logits", logit_table_to_json(st.mt_decoder)},
                {"adv_decoder_logits", logit_table_to_json(st.adv_decoder)},
                {"config", config_to_json(config)},
                {"world_name", world_name}};
}

inline TrainState model_state_from_json(const json& j) {
    TrainState st;
    st.encoder = logit_table_from_json(j.at("encoder_logits"));
    st.mt_decoder = logit_table_from_json(j.at("mt_decoder_logits"));
    st.adv_decoder = logit_table_from_json(j.at("adv_decoder_logits"));
    return st;
}

/// Write content to path via a sibling temp file and an atomic rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline json read_json(const std::filesystem::path& path) {
    return json::parse(read_file(path));
}

} // namespace ibp
