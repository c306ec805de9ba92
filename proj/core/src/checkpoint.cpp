#include "ecograph/checkpoint.hpp"

#include "ecograph/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace ecograph {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "ecograph-model";
constexpr int kVersion = 1;

json normalizer_to_json(const Normalizer& n) {
    return json{{"mean", n.mean}, {"stddev", n.stddev}};
}

Normalizer normalizer_from_json(const json& j) {
    Normalizer n;
    n.mean = j.at("mean").get<std::vector<double>>();
    n.stddev = j.at("stddev").get<std::vector<double>>();
    return n;
}

json blocks_to_json(const std::vector<ParamBlock>& blocks) {
    json arr = json::array();
    for (const auto& b : blocks)
        arr.push_back(json{{"name", b.name}, {"rows", b.rows}, {"cols", b.cols},
                           {"values", b.values}});
    return arr;
}

std::vector<ParamBlock> blocks_from_json(const json& arr) {
    std::vector<ParamBlock> blocks;
    for (const auto& j : arr) {
        ParamBlock b;
        b.name = j.at("name").get<std::string>();
        b.rows = j.at("rows").get<std::size_t>();
        b.cols = j.at("cols").get<std::size_t>();
        b.values = j.at("values").get<std::vector<double>>();
        if (b.values.size() != b.rows * b.cols)
            throw SchemaMismatch("checkpoint block '" + b.name + "' has wrong element count");
        blocks.push_back(std::move(b));
    }
    return blocks;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint JSON: ") + e.what());
    }
    if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion)
        throw SchemaMismatch("not an ecograph model checkpoint: " + path);
    return j;
}

}  // namespace

void save_checkpoint(const MlpRegressor& model, const std::string& path) {
    const MlpConfig& c = model.config();
    json j{{"format", kFormat},
           {"version", kVersion},
           {"kind", "mlp"},
           {"config",
            {{"n_soil_classes", c.n_soil_classes},
             {"embed_dim", c.embed_dim},
             {"feature_names", c.feature_names},
             {"hidden", c.hidden},
             {"output_names", c.output_names}}},
           {"feature_norm", normalizer_to_json(model.feature_norm())},
           {"target_norm", normalizer_to_json(model.target_norm())},
           {"blocks", blocks_to_json(model.blocks())}};
    write_json(j, path);
}

void save_checkpoint(const SequenceRegressor& model, const std::string& path) {
    const SeqConfig& c = model.config();
    json j{{"format", kFormat},
           {"version", kVersion},
           {"kind", "sequence"},
           {"config",
            {{"mode", c.mode == SeqMode::LaggedMlp ? "lagged_mlp" : "gated_recurrent"},
             {"window", c.window},
             {"hidden_state", c.hidden_state},
             {"trunk_hidden", c.trunk_hidden},
             {"feature_names", c.feature_names},
             {"heads", c.heads}}},
           {"feature_norm", normalizer_to_json(model.feature_norm())},
           {"target_norm", normalizer_to_json(model.target_norm())},
           {"blocks", blocks_to_json(model.blocks())}};
    write_json(j, path);
}

std::string checkpoint_kind(const std::string& path) {
    return read_json(path).at("kind").get<std::string>();
}

MlpRegressor load_mlp_checkpoint(const std::string& path) {
    json j = read_json(path);
    if (j.at("kind") != "mlp") throw SchemaMismatch("checkpoint is not an mlp model: " + path);
    const json& c = j.at("config");
    MlpConfig cfg;
    cfg.n_soil_classes = c.at("n_soil_classes").get<int>();
    cfg.embed_dim = c.at("embed_dim").get<int>();
    cfg.feature_names = c.at("feature_names").get<std::vector<std::string>>();
    cfg.hidden = c.at("hidden").get<std::vector<int>>();
    cfg.output_names = c.at("output_names").get<std::vector<std::string>>();
    return MlpRegressor::from_parts(std::move(cfg), blocks_from_json(j.at("blocks")),
                                    normalizer_from_json(j.at("feature_norm")),
                                    normalizer_from_json(j.at("target_norm")));
}

SequenceRegressor load_seq_checkpoint(const std::string& path) {
    json j = read_json(path);
    if (j.at("kind") != "sequence")
        throw SchemaMismatch("checkpoint is not a sequence model: " + path);
    const json& c = j.at("config");
    SeqConfig cfg;
    std::string mode = c.at("mode").get<std::string>();
    if (mode == "lagged_mlp") cfg.mode = SeqMode::LaggedMlp;
    else if (mode == "gated_recurrent") cfg.mode = SeqMode::GatedRecurrent;
    else throw SchemaMismatch("unknown sequence mode '" + mode + "'");
    cfg.window = c.at("window").get<int>();
    cfg.hidden_state = c.at("hidden_state").get<int>();
    cfg.trunk_hidden = c.at("trunk_hidden").get<std::vector<int>>();
    cfg.feature_names = c.at("feature_names").get<std::vector<std::string>>();
    cfg.heads = c.at("heads").get<std::vector<std::string>>();
    return SequenceRegressor::from_parts(std::move(cfg), blocks_from_json(j.at("blocks")),
                                         normalizer_from_json(j.at("feature_norm")),
                                         normalizer_from_json(j.at("target_norm")));
}

}  // namespace ecograph
