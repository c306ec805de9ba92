#include "ecograph/config.hpp"

#include "ecograph/checkpoint.hpp"
#include "ecograph/d8.hpp"
#include "ecograph/params_io.hpp"
#include "ecograph/report.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace ecograph {

namespace {

using nlohmann::json;

class Findings {
public:
    void add(const std::string& msg) { findings_.push_back(msg); }
    void raise_if_any() const {
        if (findings_.empty()) return;
        std::string all = "config validation failed:";
        for (const auto& f : findings_) all += "\n  - " + f;
        throw ConfigError(all);
    }

private:
    std::vector<std::string> findings_;
};

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || path.front() == '/') return path;
    return base_dir.empty() ? path : base_dir + "/" + path;
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

ParamFile param_file_from_json(const json& obj) {
    ParamFile f;
    for (const auto& [key, value] : obj.items()) {
        std::size_t lb = key.find('[');
        if (lb != std::string::npos && key.back() == ']') {
            f.indexed[key.substr(0, lb)][std::stoi(key.substr(lb + 1, key.size() - lb - 2))] =
                value.get<double>();
        } else {
            f.scalars[key] = value.get<double>();
        }
    }
    return f;
}

ParamFile updater_params(const json& updater, const std::string& key_file,
                         const std::string& key_inline, const std::string& base_dir,
                         Findings& findings) {
    if (updater.contains(key_file)) {
        std::string path = resolve(base_dir, updater.at(key_file).get<std::string>());
        if (!file_exists(path)) {
            findings.add("parameter file not found: " + path);
            return {};
        }
        return load_param_file(path);
    }
    if (updater.contains(key_inline)) return param_file_from_json(updater.at(key_inline));
    findings.add("updater needs '" + key_file + "' or '" + key_inline + "'");
    return {};
}

std::map<int, NitrifParamsDelGrosso<double>> delgrosso_by_class(const ParamFile& f,
                                                                const WatershedGraph& g) {
    std::set<int> classes;
    for (const auto& n : g.nodes) classes.insert(n.soil_class);
    std::map<int, NitrifParamsDelGrosso<double>> out;
    for (int cls : classes) out[cls] = delgrosso_params_from(f, cls);
    return out;
}

std::map<int, NitrifParamsParton<double>> parton_by_class(const ParamFile& f,
                                                          const WatershedGraph& g) {
    std::set<int> classes;
    for (const auto& n : g.nodes) classes.insert(n.soil_class);
    std::map<int, NitrifParamsParton<double>> out;
    for (int cls : classes) out[cls] = parton_params_from(f, cls);
    return out;
}

NitrifCellDynamics dynamics_from_json(const json& updater) {
    NitrifCellDynamics d;
    if (!updater.contains("dynamics")) return d;
    const json& j = updater.at("dynamics");
    d.nh4_input = j.value("nh4_input", d.nh4_input);
    d.w_decay = j.value("w_decay", d.w_decay);
    d.w_gain = j.value("w_gain", d.w_gain);
    d.ph = j.value("ph", d.ph);
    d.humus_dec = j.value("humus_dec", d.humus_dec);
    return d;
}

UpdaterPtr build_updater(const json& updater, const WatershedGraph& graph,
                         const std::string& base_dir, Findings& findings) {
    std::string kind = updater.value("kind", "");
    try {
        if (kind == "hbv") {
            ParamFile f = updater_params(updater, "params_file", "params", base_dir, findings);
            if (f.scalars.empty()) return nullptr;
            return std::make_shared<HbvUpdater>(hbv_params_from(f));
        }
        if (kind == "hbv_nitrogen") {
            ParamFile f = updater_params(updater, "params_file", "params", base_dir, findings);
            ParamFile nf = updater_params(updater, "nitrogen_params_file", "nitrogen_params",
                                          base_dir, findings);
            if (f.scalars.empty() || nf.scalars.empty()) return nullptr;
            return std::make_shared<HbvNitrogenUpdater>(hbv_params_from(f),
                                                        nitrogen_params_from(nf));
        }
        if (kind == "delgrosso") {
            ParamFile f = updater_params(updater, "params_file", "params", base_dir, findings);
            if (f.scalars.empty() && f.indexed.empty()) return nullptr;
            return std::make_shared<NitrifCellUpdater>(
                std::make_shared<DelGrossoFlux>(delgrosso_by_class(f, graph)),
                dynamics_from_json(updater));
        }
        if (kind == "parton") {
            ParamFile f = updater_params(updater, "params_file", "params", base_dir, findings);
            if (f.scalars.empty() && f.indexed.empty()) return nullptr;
            return std::make_shared<NitrifCellUpdater>(
                std::make_shared<PartonFlux>(parton_by_class(f, graph)),
                dynamics_from_json(updater));
        }
        if (kind == "nitrif_ml") {
            std::string ckpt = resolve(base_dir, updater.value("checkpoint", ""));
            if (!file_exists(ckpt)) {
                findings.add("checkpoint not found: " + ckpt);
                return nullptr;
            }
            return std::make_shared<NitrifCellUpdater>(
                std::make_shared<MlNitrifFlux>(load_mlp_checkpoint(ckpt)),
                dynamics_from_json(updater));
        }
        if (kind == "nitrif_hybrid") {
            std::string ckpt = resolve(base_dir, updater.value("checkpoint", ""));
            if (!file_exists(ckpt)) {
                findings.add("checkpoint not found: " + ckpt);
                return nullptr;
            }
            ParamFile f = updater_params(updater, "process_params_file", "process_params",
                                         base_dir, findings);
            if (f.scalars.empty() && f.indexed.empty()) return nullptr;
            return std::make_shared<NitrifCellUpdater>(
                std::make_shared<HybridNitrifFlux>(
                    std::make_shared<DelGrossoFlux>(delgrosso_by_class(f, graph)),
                    load_mlp_checkpoint(ckpt)),
                dynamics_from_json(updater));
        }
        if (kind == "passthrough") return std::make_shared<PassThroughUpdater>();
        if (kind == "linear")
            return std::make_shared<LinearUpdater>(updater.value("gain", 1.0),
                                                   updater.value("offset", 0.0));
    } catch (const Error& e) {
        findings.add(std::string("updater '") + kind + "': " + e.what());
        return nullptr;
    }
    findings.add("unknown updater kind '" + kind + "'");
    return nullptr;
}

WatershedGraph graph_from_json(const json& j, const std::string& base_dir, Findings& findings) {
    WatershedGraph g;
    if (j.contains("grid_d8")) {
        std::string path = resolve(base_dir, j.at("grid_d8").get<std::string>());
        if (!file_exists(path)) {
            findings.add("d8 grid not found: " + path);
            return g;
        }
        AsciiGrid d8 = read_ascii_grid(path);
        AsciiGrid elevation, soil, landuse;
        CellAttributeGrids attrs;
        if (j.contains("attrs")) {
            const json& a = j.at("attrs");
            auto load_attr = [&](const char* key, AsciiGrid& slot) -> const AsciiGrid* {
                if (!a.contains(key)) return nullptr;
                std::string p = resolve(base_dir, a.at(key).get<std::string>());
                if (!file_exists(p)) {
                    findings.add(std::string(key) + " grid not found: " + p);
                    return nullptr;
                }
                slot = read_ascii_grid(p);
                return &slot;
            };
            attrs.elevation = load_attr("elevation", elevation);
            attrs.soil_class = load_attr("soil_class", soil);
            attrs.landuse_class = load_attr("landuse_class", landuse);
        }
        return build_from_flow_direction_grid(d8, attrs);
    }
    if (!j.contains("nodes")) {
        findings.add("graph needs 'grid_d8' or 'nodes'");
        return g;
    }
    for (const auto& n : j.at("nodes")) {
        NodeAttributes a;
        a.area = n.value("area", 0.0);
        a.elevation = n.value("elevation", 0.0);
        a.soil_class = n.value("soil_class", 0);
        a.landuse_class = n.value("landuse_class", 0);
        g.nodes.push_back(a);
    }
    if (j.contains("edges")) {
        for (const auto& e : j.at("edges"))
            g.edges.push_back(Edge{e.at("from").get<NodeId>(), e.at("to").get<NodeId>(),
                                   e.value("weight", 1.0)});
    }
    return g;
}

NodeSelector selector_from_json(const json& j, Findings& findings) {
    if (j.is_string()) {
        if (j.get<std::string>() == "all") return NodeSelector::all();
        findings.add("unknown selector '" + j.get<std::string>() + "'");
        return NodeSelector::all();
    }
    if (j.contains("soil_class")) return NodeSelector::by_soil_class(j.at("soil_class").get<int>());
    if (j.contains("nodes"))
        return NodeSelector::explicit_nodes(j.at("nodes").get<std::vector<NodeId>>());
    findings.add("selector must be \"all\", {soil_class}, or {nodes}");
    return NodeSelector::all();
}

Window window_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("window must be [begin, end]");
    return Window{j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

SeqConfig student_from_json(const json& trainer) {
    SeqConfig s;
    s.feature_names = forcing_feature_names();
    if (!trainer.contains("student")) return s;
    const json& j = trainer.at("student");
    std::string mode = j.value("mode", "lagged_mlp");
    if (mode == "lagged_mlp") s.mode = SeqMode::LaggedMlp;
    else if (mode == "gated_recurrent") s.mode = SeqMode::GatedRecurrent;
    else throw ConfigError("unknown student mode '" + mode + "'");
    s.window = j.value("window", s.window);
    s.hidden_state = j.value("hidden_state", s.hidden_state);
    s.trunk_hidden = j.value("trunk_hidden", s.trunk_hidden);
    if (j.contains("heads")) s.heads = j.at("heads").get<std::vector<std::string>>();
    return s;
}

TrainerConfig trainer_from_json(const json& j, const std::string& base_dir,
                                Findings& findings) {
    TrainerConfig t;
    static const std::set<std::string> kModes = {"data_to_process", "data_to_ml",
                                                 "process_to_ml", "process_to_process"};
    static const std::set<std::string> kStrategies = {"residual", "transfer", "hybrid"};
    if (j.contains("mode")) {
        t.kind = j.at("mode").get<std::string>();
        if (!kModes.count(t.kind)) findings.add("unknown trainer mode '" + t.kind + "'");
    } else if (j.contains("strategy")) {
        t.kind = j.at("strategy").get<std::string>();
        t.is_strategy = true;
        if (!kStrategies.count(t.kind))
            findings.add("unknown trainer strategy '" + t.kind + "'");
    } else {
        findings.add("trainer needs 'mode' or 'strategy'");
        return t;
    }

    if (j.contains("observations_csv"))
        t.observations_csv = resolve(base_dir, j.at("observations_csv").get<std::string>());
    if (j.contains("teacher")) {
        const json& teach = j.at("teacher");
        if (teach.contains("hbv_params_file"))
            t.teacher_hbv_params = resolve(base_dir, teach.at("hbv_params_file").get<std::string>());
        if (teach.contains("delgrosso_params_file"))
            t.teacher_delgrosso_params =
                resolve(base_dir, teach.at("delgrosso_params_file").get<std::string>());
    }
    if (j.contains("simplified")) {
        const json& simp = j.at("simplified");
        if (simp.contains("hbv_params_file"))
            t.teacher_hbv_params = resolve(base_dir, simp.at("hbv_params_file").get<std::string>());
    }
    if (j.contains("student") && j.at("student").contains("parton_params_file"))
        t.student_parton_params =
            resolve(base_dir, j.at("student").at("parton_params_file").get<std::string>());

    if (j.contains("calibrate")) t.calibrate = j.at("calibrate").get<std::vector<std::string>>();
    if (j.contains("loss")) {
        std::string loss = j.at("loss").get<std::string>();
        if (loss == "mse") t.loss = LossKind::Mse;
        else if (loss == "nse") t.loss = LossKind::Nse;
        else findings.add("unknown loss '" + loss + "'");
    }
    if (j.contains("optimizer")) {
        t.lr = j.at("optimizer").value("lr", 0.0);
        t.iterations = j.at("optimizer").value("iterations", t.iterations);
    }
    if (j.contains("train")) {
        t.epochs = j.at("train").value("epochs", t.epochs);
        t.batch = j.at("train").value("batch", t.batch);
        t.ml_lr = j.at("train").value("lr", t.ml_lr);
    }
    if (j.contains("ensemble")) {
        t.ensemble_train = j.at("ensemble").value("train", t.ensemble_train);
        t.ensemble_holdout = j.at("ensemble").value("holdout", t.ensemble_holdout);
    }
    try {
        t.student = student_from_json(j);
    } catch (const Error& e) {
        findings.add(e.what());
    }
    if (j.contains("split")) {
        t.has_split = true;
        t.train = window_from_json(j.at("split").at("train"));
        t.holdout = window_from_json(j.at("split").at("holdout"));
    }
    if (j.contains("finetune")) {
        t.has_finetune = true;
        t.finetune = window_from_json(j.at("finetune"));
    }
    return t;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }

    Findings findings;
    RunConfig cfg;
    cfg.digest = file_digest(path);
    cfg.base_dir = std::filesystem::path(path).parent_path().string();

    if (!doc.contains("seed")) findings.add("missing required 'seed'");
    else cfg.seed = doc.at("seed").get<std::uint64_t>();

    if (!doc.contains("graph")) findings.add("missing required 'graph'");
    else cfg.graph = graph_from_json(doc.at("graph"), cfg.base_dir, findings);

    if (doc.contains("forcing")) {
        const json& f = doc.at("forcing");
        std::string csv = resolve(cfg.base_dir, f.value("csv", ""));
        std::string binding = f.value("binding", "shared");
        if (csv.empty()) {
            findings.add("forcing needs 'csv'");
        } else if (!file_exists(csv)) {
            findings.add("forcing file not found: " + csv);
        } else {
            try {
                cfg.forcing = load_forcing_csv(csv, binding == "per_node"
                                                        ? ForcingBinding::PerNodeColumn
                                                        : ForcingBinding::Shared);
            } catch (const Error& e) {
                findings.add(std::string("forcing: ") + e.what());
            }
        }
    } else {
        findings.add("missing required 'forcing'");
    }

    if (doc.contains("bindings")) {
        for (const auto& b : doc.at("bindings")) {
            UpdaterBinding binding;
            binding.selector = selector_from_json(b.value("select", json("all")), findings);
            if (!b.contains("updater")) {
                findings.add("binding without 'updater'");
                continue;
            }
            binding.updater = build_updater(b.at("updater"), cfg.graph, cfg.base_dir, findings);
            if (b.contains("messages")) {
                for (const auto& m : b.at("messages")) {
                    MessageSpec spec;
                    spec.message = m.value("message", "inflow");
                    spec.source_flux = m.value("source", "");
                    try {
                        spec.op = parse_aggregate_op(m.value("op", "weighted_sum"));
                    } catch (const Error& e) {
                        findings.add(e.what());
                    }
                    binding.messages.push_back(std::move(spec));
                }
            }
            if (binding.updater) cfg.bindings.push_back(std::move(binding));
        }
        if (cfg.bindings.empty()) findings.add("no usable updater bindings");
    } else {
        findings.add("missing required 'bindings'");
    }

    if (doc.contains("schedule")) {
        const json& s = doc.at("schedule");
        try {
            cfg.schedule = parse_schedule(s.value("kind", "synchronous"), s.value("tol", 1e-6),
                                          s.value("max_iter", 20));
        } catch (const Error& e) {
            findings.add(e.what());
        }
    }

    if (doc.contains("states") && doc.at("states").contains("initial")) {
        for (const auto& [name, value] : doc.at("states").at("initial").items()) {
            if (value.is_array())
                cfg.initial_values[name] = value.get<std::vector<double>>();
            else
                cfg.initial_values[name] = {value.get<double>()};
        }
    }

    if (doc.contains("outputs")) {
        const json& o = doc.at("outputs");
        cfg.outputs.dir = o.value("dir", cfg.outputs.dir);
        std::string format = o.value("format", "tidy");
        if (format == "tidy") cfg.outputs.format = OutputFormat::TidyCsv;
        else if (format == "grid") cfg.outputs.format = OutputFormat::GridCsvPerStep;
        else findings.add("unknown output format '" + format + "'");
        if (o.contains("variables"))
            cfg.outputs.variables = o.at("variables").get<std::vector<std::string>>();
    }
    cfg.outputs.dir = resolve(cfg.base_dir, cfg.outputs.dir);

    if (doc.contains("trainer")) {
        cfg.has_trainer = true;
        try {
            cfg.trainer = trainer_from_json(doc.at("trainer"), cfg.base_dir, findings);
        } catch (const Error& e) {
            findings.add(e.what());
        }
    }

    findings.raise_if_any();
    return cfg;
}

NodeStates apply_initial_values(const Engine& engine, const RunConfig& config) {
    NodeStates states = engine.initial_states();
    for (const auto& [name, values] : config.initial_values) {
        std::size_t var = states.schema().require(name);
        if (values.size() == 1) {
            for (NodeId node = 0; node < states.node_count(); ++node)
                states.set(node, var, values[0]);
        } else if (static_cast<int>(values.size()) == states.node_count()) {
            for (NodeId node = 0; node < states.node_count(); ++node)
                states.set(node, var, values[static_cast<std::size_t>(node)]);
        } else {
            throw ConfigError("initial values for '" + name + "' must be scalar or per-node");
        }
    }
    return states;
}

}  // namespace ecograph
