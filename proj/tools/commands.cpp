#include "commands.hpp"

#include <ecograph/checkpoint.hpp>
#include <ecograph/config.hpp>
#include <ecograph/numerics.hpp>
#include <ecograph/params_io.hpp>
#include <ecograph/report.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace ecograph::cli {

namespace {

using nlohmann::json;

RunConfig load(const CommonArgs& args) {
    RunConfig cfg = load_run_config(args.config_path);
    if (args.has_seed) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.outputs.dir = args.out_dir;
    return cfg;
}

Window default_train_window(std::size_t n) { return Window{0, n * 5 / 7}; }
Window default_holdout_window(std::size_t n) { return Window{n * 5 / 7, n}; }

/// Observations must share the forcing's date axis.
std::vector<double> aligned_observations(const RunConfig& cfg, const std::string& path) {
    auto obs = read_observation_csv(path);
    if (obs.size() != cfg.forcing.length())
        throw AxisMismatch("observations cover " + std::to_string(obs.size()) +
                           " days, forcing " + std::to_string(cfg.forcing.length()));
    for (std::size_t t = 0; t < obs.size(); ++t)
        if (obs[t].first != cfg.forcing.dates()[t])
            throw AxisMismatch("observation dates do not match the forcing axis");
    std::vector<double> values;
    values.reserve(obs.size());
    for (const auto& [date, value] : obs) values.push_back(value);
    return values;
}

void write_loss_trace(const std::vector<double>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write loss trace: " + path);
    out << "iter,loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << i << ',' << format_g17(trace[i]) << "\n";
}

void maybe_plot(const CommonArgs& args, const std::string& out_dir, const std::string& name,
                const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    if (!args.plot) return;
    write_svg_lineplot(out_dir + "/" + name + ".svg", name, series);
}

void print_skill(const std::string& label, const SkillMetrics& m) {
    std::cout << label << ": nse=" << m.nse << " kge=" << m.kge
              << " composite=" << m.composite << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const CommonArgs& args) {
    RunConfig cfg = load(args);
    Engine engine(cfg.graph, cfg.bindings, cfg.schedule);
    NodeStates initial = apply_initial_values(engine, cfg);
    Trajectory traj = engine.run(initial, cfg.forcing);

    std::filesystem::create_directories(cfg.outputs.dir);
    if (cfg.outputs.format == OutputFormat::TidyCsv) {
        write_outputs(traj, cfg.graph, cfg.outputs.dir + "/trajectory.csv",
                      OutputFormat::TidyCsv, cfg.outputs.variables);
    } else {
        write_outputs(traj, cfg.graph, cfg.outputs.dir, OutputFormat::GridCsvPerStep,
                      cfg.outputs.variables);
    }
    write_run_meta(cfg.outputs.dir, cfg.digest, cfg.seed);

    std::vector<std::string> names = cfg.outputs.variables;
    if (names.empty()) {
        for (const auto& v : engine.state_schema()->variables()) names.push_back(v.name);
        for (const auto& v : engine.flux_schema()->variables()) names.push_back(v.name);
    }
    for (const auto& name : names) {
        KahanSum sum;
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (NodeId node = 0; node < traj.node_count(); ++node) {
            for (double v : traj.series(name, node)) {
                sum.add(v);
                lo = first ? v : std::min(lo, v);
                hi = first ? v : std::max(hi, v);
                first = false;
            }
        }
        double n = static_cast<double>(traj.steps()) * traj.node_count();
        std::cout << name << ": mean=" << sum.value() / n << " min=" << lo << " max=" << hi
                  << "\n";
        if (traj.node_count() == 1)
            maybe_plot(args, cfg.outputs.dir, name, {{name, traj.series(name, 0)}});
    }
    return 0;
}

// ---------------------------------------------------------------------------
// coarsen
// ---------------------------------------------------------------------------

namespace {

CoarseningMap read_map_file(const std::string& path, int n_fine) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open map file: " + path);
    CoarseningMap map;
    int coarse = 0;
    while (in >> coarse) map.fine_to_coarse.push_back(coarse);
    if (static_cast<int>(map.fine_to_coarse.size()) != n_fine)
        throw IncompleteMap("map file lists " + std::to_string(map.fine_to_coarse.size()) +
                            " nodes, graph has " + std::to_string(n_fine));
    return map;
}

json graph_to_json(const WatershedGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes)
        nodes.push_back(json{{"area", n.area},
                             {"elevation", n.elevation},
                             {"soil_class", n.soil_class},
                             {"landuse_class", n.landuse_class}});
    json edges = json::array();
    for (const auto& e : g.edges)
        edges.push_back(json{{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    return json{{"nodes", nodes}, {"edges", edges}};
}

}  // namespace

int cmd_coarsen(const CommonArgs& args, const std::string& map_path) {
    RunConfig cfg = load(args);
    CoarseningMap map = read_map_file(map_path, cfg.graph.node_count());
    WatershedGraph coarse = coarsen(cfg.graph, map);
    ForcingSeries coarse_forcing = resample_forcing(cfg.forcing, cfg.graph, map);

    std::filesystem::create_directories(cfg.outputs.dir);
    {
        std::ofstream out(cfg.outputs.dir + "/coarse_graph.json");
        out << graph_to_json(coarse).dump(2) << "\n";
    }
    write_forcing_csv(coarse_forcing, cfg.outputs.dir + "/coarse_forcing.csv");

    // re-emit the run config against the coarse artifacts; file references
    // keep resolving by becoming absolute
    {
        std::ifstream in(args.config_path);
        json doc;
        in >> doc;
        std::function<void(json&)> absolutize = [&](json& node) {
            if (node.is_object()) {
                for (auto& [key, value] : node.items()) {
                    bool is_path_key = key.size() > 5 &&
                                           key.compare(key.size() - 5, 5, "_file") == 0;
                    is_path_key = is_path_key || key == "checkpoint" ||
                                  key == "observations_csv";
                    if (is_path_key && value.is_string()) {
                        std::string p = value.get<std::string>();
                        if (!p.empty() && p.front() != '/')
                            value = std::filesystem::absolute(
                                        std::filesystem::path(cfg.base_dir) / p)
                                        .string();
                    } else {
                        absolutize(value);
                    }
                }
            } else if (node.is_array()) {
                for (auto& item : node) absolutize(item);
            }
        };
        absolutize(doc);
        doc["graph"] = graph_to_json(coarse);
        doc["forcing"] = json{{"csv", "coarse_forcing.csv"},
                              {"binding", coarse_forcing.binding() == ForcingBinding::Shared
                                              ? "shared"
                                              : "per_node"}};
        std::ofstream out(cfg.outputs.dir + "/coarse_config.json");
        out << doc.dump(2) << "\n";
    }
    write_run_meta(cfg.outputs.dir, cfg.digest, cfg.seed);

    // conservation summary
    KahanSum fine_area, coarse_area;
    for (const auto& n : cfg.graph.nodes) fine_area.add(n.area);
    for (const auto& n : coarse.nodes) coarse_area.add(n.area);
    double darea = std::abs(coarse_area.value() - fine_area.value()) /
                   std::max(1.0, std::abs(fine_area.value()));

    double dvolume = 0.0;
    if (cfg.forcing.binding() == ForcingBinding::PerNodeColumn) {
        KahanSum fine_vol, coarse_vol;
        for (std::size_t t = 0; t < cfg.forcing.length(); ++t) {
            for (NodeId f = 0; f < cfg.graph.node_count(); ++f)
                fine_vol.add(cfg.forcing.at(f, t).precip *
                             cfg.graph.nodes[static_cast<std::size_t>(f)].area);
            for (NodeId c = 0; c < coarse.node_count(); ++c)
                coarse_vol.add(coarse_forcing.at(c, t).precip *
                               coarse.nodes[static_cast<std::size_t>(c)].area);
        }
        dvolume = std::abs(coarse_vol.value() - fine_vol.value()) /
                  std::max(1.0, std::abs(fine_vol.value()));
    }

    std::cout << "coarse nodes: " << coarse.node_count() << " (from "
              << cfg.graph.node_count() << ")\n"
              << "kind: "
              << (coarse.kind() == GraphKind::Lumped
                      ? "lumped"
                      : coarse.kind() == GraphKind::SemiDistributed ? "semi_distributed"
                                                                    : "distributed_grid")
              << "\n"
              << "total area delta (relative): " << darea << "\n"
              << "precip volume delta (relative): " << dvolume << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// distill
// ---------------------------------------------------------------------------

namespace {

int distill_data_to_process(const RunConfig& cfg, const CommonArgs& args) {
    const TrainerConfig& t = cfg.trainer;
    if (t.observations_csv.empty())
        throw ConfigError("data_to_process needs trainer.observations_csv");

    HbvCalibrationJob job;
    job.forcing = cfg.forcing;
    job.observations = aligned_observations(cfg, t.observations_csv);
    std::size_t n = cfg.forcing.length();
    job.train = t.has_split ? t.train : default_train_window(n);
    job.holdout = t.has_split ? t.holdout : default_holdout_window(n);
    job.calibrate = t.calibrate;
    job.loss = t.loss;
    job.optimizer = OptimizerSpec::adam(t.lr > 0.0 ? t.lr : 0.01);
    job.iterations = t.iterations;
    job.seed = cfg.seed;

    // the HBV binding provides the starting parameters
    const HbvUpdater* hbv = nullptr;
    for (const auto& b : cfg.bindings)
        if ((hbv = dynamic_cast<const HbvUpdater*>(b.updater.get())) != nullptr) break;
    if (hbv == nullptr)
        throw ConfigError("data_to_process needs an 'hbv' binding for the starting point");
    job.initial = hbv->params();

    HbvCalibrationResult result = calibrate_process(job);

    std::filesystem::create_directories(cfg.outputs.dir);
    save_param_file(to_param_file(result.fitted), cfg.outputs.dir + "/params_fitted.txt");
    write_loss_trace(result.loss_trace, cfg.outputs.dir + "/loss_trace.csv");
    MetricsReport report;
    report.mode = "data_to_process";
    report.seed = cfg.seed;
    report.config_digest = cfg.digest;
    report.metrics["q_train"] = result.train_skill;
    report.metrics["q_holdout"] = result.holdout_skill;
    write_metrics_report(report, cfg.outputs.dir + "/report.json");
    write_run_meta(cfg.outputs.dir, cfg.digest, cfg.seed);
    maybe_plot(args, cfg.outputs.dir, "loss_trace", {{"loss", result.loss_trace}});

    print_skill("train", result.train_skill);
    print_skill("holdout", result.holdout_skill);
    return 0;
}

int distill_to_ml(const RunConfig& cfg, const CommonArgs& args) {
    const TrainerConfig& t = cfg.trainer;
    SurrogateJob job;
    job.forcing = cfg.forcing;
    std::size_t n = cfg.forcing.length();
    job.train = t.has_split ? t.train : default_train_window(n);
    job.holdout = t.has_split ? t.holdout : default_holdout_window(n);
    job.student = t.student;
    job.train_options.optimizer = OptimizerSpec::adam(t.ml_lr);
    job.train_options.epochs = t.epochs;
    job.train_options.batch_size = t.batch;
    job.train_options.seed = cfg.seed;
    job.head = t.student.heads.empty() ? "streamflow" : t.student.heads[0];
    job.student.heads = {job.head};

    if (t.kind == "data_to_ml") {
        if (t.observations_csv.empty())
            throw ConfigError("data_to_ml needs trainer.observations_csv");
        job.mode = DistillMode::DataToMl;
        job.teacher_series = aligned_observations(cfg, t.observations_csv);
    } else {
        if (t.teacher_hbv_params.empty())
            throw ConfigError("process_to_ml needs trainer.teacher.hbv_params_file");
        job.mode = DistillMode::ProcessToMl;
        job.teacher_series =
            simulate_hbv_series(hbv_params_from(load_param_file(t.teacher_hbv_params)),
                                cfg.forcing);
    }

    SurrogateResult result = distill_surrogate(job);

    std::filesystem::create_directories(cfg.outputs.dir);
    save_checkpoint(result.model, cfg.outputs.dir + "/model.json");
    write_loss_trace(result.trace.loss_trace, cfg.outputs.dir + "/loss_trace.csv");
    MetricsReport report;
    report.mode = to_string(job.mode);
    report.seed = cfg.seed;
    report.config_digest = cfg.digest;
    report.metrics[job.head + "_train"] = result.train_skill;
    report.metrics[job.head + "_holdout"] = result.holdout_skill;
    write_metrics_report(report, cfg.outputs.dir + "/report.json");
    write_run_meta(cfg.outputs.dir, cfg.digest, cfg.seed);
    maybe_plot(args, cfg.outputs.dir, "surrogate",
               {{"teacher", job.teacher_series}, {"student", result.predictions}});

    print_skill("train", result.train_skill);
    print_skill("holdout", result.holdout_skill);
    return 0;
}

int distill_process_to_process(const RunConfig& cfg, const CommonArgs& args) {
    const TrainerConfig& t = cfg.trainer;
    if (t.teacher_delgrosso_params.empty() || t.student_parton_params.empty())
        throw ConfigError(
            "process_to_process needs teacher.delgrosso_params_file and "
            "student.parton_params_file");

    NitrifParamsDelGrosso<double> teacher =
        delgrosso_params_from(load_param_file(t.teacher_delgrosso_params), 0);
    ProcessTransferJob job;
    job.initial = parton_params_from(load_param_file(t.student_parton_params), 0);
    job.train = random_env_ensemble(t.ensemble_train, cfg.seed);
    job.holdout = random_env_ensemble(t.ensemble_holdout, cfg.seed + 1);
    job.teacher = [teacher](const EnvSample& s) {
        return nitrif_delgrosso(s.env, s.nh4, teacher);
    };
    job.optimizer = OptimizerSpec::adam(t.lr > 0.0 ? t.lr : 0.01);
    job.iterations = t.iterations;
    job.seed = cfg.seed;

    ProcessTransferResult result = transfer_process(job);

    std::filesystem::create_directories(cfg.outputs.dir);
    {
        ParamFile f;
        f.scalars = {{"k1", result.fitted.k1},
                     {"k2", result.fitted.k2},
                     {"z", result.fitted.z},
                     {"bulk_density", result.fitted.bulk_density},
                     {"porosity", result.fitted.porosity},
                     {"w_opt", result.fitted.w_opt},
                     {"t_opt", result.fitted.t_opt},
                     {"ph_half", result.fitted.ph_half}};
        save_param_file(f, cfg.outputs.dir + "/params_fitted.txt");
    }
    write_loss_trace(result.loss_trace, cfg.outputs.dir + "/loss_trace.csv");
    MetricsReport report;
    report.mode = "process_to_process";
    report.seed = cfg.seed;
    report.config_digest = cfg.digest;
    report.metrics["nitrification_train"] = result.train_agreement;
    report.metrics["nitrification_holdout"] = result.holdout_agreement;
    write_metrics_report(report, cfg.outputs.dir + "/report.json");
    write_run_meta(cfg.outputs.dir, cfg.digest, cfg.seed);
    maybe_plot(args, cfg.outputs.dir, "loss_trace", {{"loss", result.loss_trace}});

    print_skill("train agreement", result.train_agreement);
    print_skill("holdout agreement", result.holdout_agreement);
    return 0;
}

int distill_strategy(const RunConfig& cfg, const CommonArgs& args) {
    const TrainerConfig& t = cfg.trainer;
    if (t.teacher_hbv_params.empty())
        throw ConfigError("strategies need simplified.hbv_params_file");
    if (t.observations_csv.empty()) throw ConfigError("strategies need observations_csv");

    std::vector<double> simplified =
        simulate_hbv_series(hbv_params_from(load_param_file(t.teacher_hbv_params)), cfg.forcing);
    std::vector<double> original = aligned_observations(cfg, t.observations_csv);
    std::vector<std::vector<double>> features = forcing_features(cfg.forcing.records());

    std::size_t n = cfg.forcing.length();
    Window train = t.has_split ? t.train : default_train_window(n);
    Window holdout = t.has_split ? t.holdout : default_holdout_window(n);

    TrainOptions mlopt;
    mlopt.optimizer = OptimizerSpec::adam(t.ml_lr);
    mlopt.epochs = t.epochs;
    mlopt.batch_size = t.batch;
    mlopt.seed = cfg.seed;

    std::filesystem::create_directories(cfg.outputs.dir);
    MetricsReport report;
    report.seed = cfg.seed;
    report.config_digest = cfg.digest;
    report.mode = t.kind;

    SkillMetrics baseline = skill(Window{holdout.begin, holdout.end}.slice(original),
                                  Window{holdout.begin, holdout.end}.slice(simplified));
    report.metrics["simplified_holdout"] = baseline;

    if (t.kind == "residual") {
        ResidualPlan plan{features, simplified, original, train, holdout, {64, 64}, mlopt};
        ResidualResult r = residual_learn(plan);
        save_checkpoint(r.corrector, cfg.outputs.dir + "/corrector.json");
        report.metrics["corrected_train"] = r.train_skill;
        report.metrics["corrected_holdout"] = r.holdout_skill;
        if (r.no_improvement) report.pipeline = "residual (NoImprovement)";
        write_metrics_report(report, cfg.outputs.dir + "/report.json");
        print_skill("holdout", r.holdout_skill);
    } else if (t.kind == "transfer") {
        if (!t.has_finetune) throw ConfigError("transfer needs a 'finetune' window");
        TransferPlan plan;
        plan.student = t.student;
        plan.pretrain.features = train.slice(features);
        plan.pretrain.targets[t.student.heads[0]] = train.slice(simplified);
        plan.finetune.features = t.finetune.slice(features);
        plan.finetune.targets[t.student.heads[0]] = t.finetune.slice(original);
        plan.pretrain_options = mlopt;
        plan.finetune_options = mlopt;
        TransferResult r = transfer_learn(plan);
        save_checkpoint(r.model, cfg.outputs.dir + "/model.json");
        std::vector<double> pred = r.model.predict(features)[t.student.heads[0]];
        report.metrics["adapted_holdout"] = skill(holdout.slice(original), holdout.slice(pred));
        write_metrics_report(report, cfg.outputs.dir + "/report.json");
        print_skill("holdout", report.metrics["adapted_holdout"]);
    } else {  // hybrid
        if (!t.has_finetune) throw ConfigError("hybrid needs a 'finetune' window");
        HybridPlan plan;
        plan.residual = ResidualPlan{features, simplified, original, train,
                                     holdout, {64, 64}, mlopt};
        plan.student = t.student;
        plan.pretrain_options = mlopt;
        plan.finetune_options = mlopt;
        plan.finetune_window = t.finetune;
        HybridResult r = hybrid_distill(plan);
        save_checkpoint(r.residual_stage.corrector, cfg.outputs.dir + "/corrector.json");
        save_checkpoint(r.transfer_stage.model, cfg.outputs.dir + "/model.json");
        report.pipeline = "residual_then_transfer";
        report.metrics["residual_holdout"] = r.residual_stage.holdout_skill;
        report.metrics["hybrid_holdout"] =
            skill(holdout.slice(original), holdout.slice(r.predictions));
        write_metrics_report(report, cfg.outputs.dir + "/report.json");
        print_skill("holdout", report.metrics["hybrid_holdout"]);
    }
    write_run_meta(cfg.outputs.dir, cfg.digest, cfg.seed);
    return 0;
}

}  // namespace

int cmd_distill(const CommonArgs& args, const std::string& forced_mode) {
    RunConfig cfg = load(args);
    if (!cfg.has_trainer) throw ConfigError("config has no 'trainer' section");
    if (!forced_mode.empty() && cfg.trainer.kind != forced_mode)
        throw ConfigError("this command requires trainer mode '" + forced_mode + "', got '" +
                          cfg.trainer.kind + "'");

    if (cfg.trainer.is_strategy) return distill_strategy(cfg, args);
    if (cfg.trainer.kind == "data_to_process") return distill_data_to_process(cfg, args);
    if (cfg.trainer.kind == "process_to_process") return distill_process_to_process(cfg, args);
    return distill_to_ml(cfg, args);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int cmd_evaluate(const CommonArgs& args, const std::string& ref_path,
                 const std::string& sim_path, const std::string& variable) {
    RunConfig cfg = load(args);

    auto load_series = [&](const std::string& path)
        -> std::map<NodeId, std::vector<double>> {
        std::map<NodeId, std::vector<double>> by_node;
        std::ifstream probe(path);
        if (!probe) throw ConfigError("cannot open series file: " + path);
        std::string header;
        std::getline(probe, header);
        if (header.rfind("date,value", 0) == 0) {
            for (const auto& [date, value] : read_observation_csv(path))
                by_node[0].push_back(value);
            return by_node;
        }
        for (const auto& row : read_tidy_csv(path))
            if (row.variable == variable) by_node[row.node_id].push_back(row.value);
        if (by_node.empty())
            throw AxisMismatch("variable '" + variable + "' not present in " + path);
        return by_node;
    };

    auto ref = load_series(ref_path);
    auto sim = load_series(sim_path);
    if (ref.size() != sim.size()) throw AxisMismatch("node sets differ between runs");

    MetricsReport report;
    report.mode = "evaluate";
    report.seed = cfg.seed;
    report.config_digest = cfg.digest;
    std::vector<double> composites;
    SkillMetrics acc;
    for (const auto& [node, ref_series] : ref) {
        auto it = sim.find(node);
        if (it == sim.end()) throw AxisMismatch("node " + std::to_string(node) + " missing");
        if (it->second.size() != ref_series.size())
            throw AxisMismatch("series lengths differ at node " + std::to_string(node));
        SkillMetrics m = skill(ref_series, it->second);
        report.metrics[variable + "_node" + std::to_string(node)] = m;
        composites.push_back(m.composite);
        acc.nse += m.nse;
        acc.kge += m.kge;
        acc.composite += m.composite;
        acc.r += m.r;
        acc.alpha += m.alpha;
        acc.beta += m.beta;
    }
    double n = static_cast<double>(composites.size());
    SkillMetrics mean{acc.nse / n, acc.kge / n, acc.composite / n,
                      acc.r / n,   acc.alpha / n, acc.beta / n};
    report.metrics[variable + "_mean"] = mean;

    std::filesystem::create_directories(cfg.outputs.dir);
    write_metrics_report(report, cfg.outputs.dir + "/report.json");
    write_run_meta(cfg.outputs.dir, cfg.digest, cfg.seed);

    // per-node composite grid, renderable as a map, when the graph is a grid
    if (cfg.graph.grid_meta.has_value() &&
        static_cast<int>(composites.size()) == cfg.graph.node_count()) {
        const GridMeta& gm = *cfg.graph.grid_meta;
        std::ofstream out(cfg.outputs.dir + "/composite_grid.csv");
        for (int r = 0; r < gm.nrows; ++r) {
            for (int c = 0; c < gm.ncols; ++c) {
                if (c) out << ' ';
                NodeId node = gm.cell_to_node[static_cast<std::size_t>(r) * gm.ncols + c];
                out << (node < 0 ? "nan" : format_g17(composites[static_cast<std::size_t>(
                                               node)]));
            }
            out << "\n";
        }
    }

    print_skill(variable + " (node mean)", mean);
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

namespace {

struct BlockCheck {
    std::string block;
    double max_rel_err = 0.0;
    bool excluded_kink = false;
    std::string note;
};

/// d(sum of 30-day streamflow)/d(each HBV parameter) vs central differences.
BlockCheck check_hbv_block(const HbvParams<double>& params, const ForcingSeries& forcing) {
    BlockCheck out{"hbv", 0.0, false, ""};
    const std::size_t steps = std::min<std::size_t>(30, forcing.length());
    for (std::size_t t = 0; t < steps; ++t) {
        if (std::abs(forcing.at(0, t).temp - params.tt) < 1e-9) {
            out.excluded_kink = true;
            out.note = "forcing temperature ties the TT threshold at step " +
                       std::to_string(t) + "; point excluded";
            return out;
        }
    }
    std::vector<double> x = {params.tt, params.cfmax, params.fc,  params.beta, params.lp,
                             params.k0, params.k1,    params.k2, params.uzl,  params.perc};
    int maxbas = params.maxbas;
    auto f = [&forcing, steps, maxbas](Tape& tape, std::span<const Var> v) {
        HbvParams<Var> p{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], maxbas};
        HbvState<Var> s = make_hbv_state(p.fc * 0.0, p.fc * 0.5, p.fc * 0.0,
                                         p.fc * 0.0 + 10.0, maxbas);
        Var total = tape.constant(0.0);
        for (std::size_t t = 0; t < steps; ++t)
            total = total + hbv_step(s, p, forcing.at(0, t)).q_out;
        return total;
    };
    out.max_rel_err = gradient_check(f, x);
    return out;
}

BlockCheck check_nitrogen_block(const NitrogenParams<double>& params) {
    std::vector<double> x = {params.k_min, params.k_nit, params.k_up, params.k_den,
                             params.q10,   params.t_ref, params.k_exp, params.k_r};
    auto f = [&params](Tape& tape, std::span<const Var> v) {
        NitrogenParams<Var> p{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7],
                              tape.constant(params.input_nh4),
                              tape.constant(params.input_orgn)};
        NitrogenState<Var> s{tape.constant(0.6), tape.constant(0.9), tape.constant(4.0),
                             tape.constant(0.3)};
        Var total = tape.constant(0.0);
        for (int t = 0; t < 30; ++t) {
            auto fl = nitrogen_step(s, p, 12.0 + 0.3 * t, tape.constant(2.0 + 0.1 * t));
            total = total + fl.export_load;
        }
        return total;
    };
    return {"nitrogen", gradient_check(f, x), false, ""};
}

BlockCheck check_delgrosso_block(const NitrifParamsDelGrosso<double>& params) {
    std::vector<double> x = {params.k_soil, params.f_h, params.w_opt, params.t_opt,
                             params.ph_half};
    auto f = [](Tape& tape, std::span<const Var> v) {
        (void)tape;
        NitrifParamsDelGrosso<Var> p{v[0], v[1], v[2], v[3], v[4]};
        SoilEnv env{0.37, 6.2, 14.0, 0.015};
        return nitrif_delgrosso(env, 0.8, p);
    };
    return {"delgrosso", gradient_check(f, x), false, ""};
}

BlockCheck check_parton_block(const NitrifParamsParton<double>& params) {
    std::vector<double> x = {params.k1, params.k2, params.w_opt, params.t_opt, params.ph_half};
    double z = params.z, bd = params.bulk_density, porosity = params.porosity;
    auto f = [z, bd, porosity](Tape& tape, std::span<const Var> v) {
        (void)tape;
        NitrifParamsParton<Var> p{v[0], v[1], z, bd, porosity, v[2], v[3], v[4]};
        SoilEnv env{0.37, 6.2, 14.0, 0.015};
        return nitrif_parton(env, 3.1, p);
    };
    return {"parton", gradient_check(f, x), false, ""};
}

/// MSE over a fixed probe batch w.r.t. every network weight.
BlockCheck check_mlp_block(const std::string& label, const MlpRegressor& model) {
    Rng rng(7);
    const std::size_t n_feat = model.config().feature_names.size();
    std::vector<std::vector<double>> probes;
    std::vector<double> targets;
    for (int i = 0; i < 4; ++i) {
        std::vector<double> row;
        for (std::size_t fdim = 0; fdim < n_feat; ++fdim) row.push_back(rng.uniform(0.1, 1.0));
        probes.push_back(row);
        targets.push_back(rng.uniform(0.0, 1.0));
    }
    std::vector<double> x = pack(model.blocks());
    auto f = [&model, &probes, &targets](Tape& tape, std::span<const Var> v) {
        BoundParams<Var> bound;
        std::size_t pos = 0;
        for (const auto& b : model.blocks()) {
            Tensor<Var> t(b.rows, b.cols);
            for (std::size_t i = 0; i < b.values.size(); ++i) t.data[i] = v[pos++];
            bound.push_back(std::move(t));
        }
        Var loss = tape.constant(0.0);
        for (std::size_t i = 0; i < probes.size(); ++i) {
            std::vector<Var> feats;
            for (double fv : probes[i]) feats.push_back(tape.constant(fv));
            Var y = model.forward_normalized(bound, 0, feats)[0];
            Var e = y - targets[i];
            loss = loss + e * e;
        }
        return loss * (1.0 / static_cast<double>(probes.size()));
    };
    return {label, gradient_check(f, x), false, ""};
}

}  // namespace

int cmd_gradcheck(const CommonArgs& args) {
    RunConfig cfg = load(args);
    std::vector<BlockCheck> checks;
    for (const auto& binding : cfg.bindings) {
        const NodeUpdater* u = binding.updater.get();
        if (const auto* hbv = dynamic_cast<const HbvUpdater*>(u)) {
            checks.push_back(check_hbv_block(hbv->params(), cfg.forcing));
        } else if (const auto* hn = dynamic_cast<const HbvNitrogenUpdater*>(u)) {
            checks.push_back(check_hbv_block(hn->hbv_params(), cfg.forcing));
            checks.push_back(check_nitrogen_block(hn->nitrogen_params()));
        } else if (const auto* cell = dynamic_cast<const NitrifCellUpdater*>(u)) {
            const NitrifFluxModel* fm = cell->flux_model().get();
            if (const auto* dg = dynamic_cast<const DelGrossoFlux*>(fm)) {
                checks.push_back(check_delgrosso_block(dg->params().begin()->second));
            } else if (const auto* pt = dynamic_cast<const PartonFlux*>(fm)) {
                checks.push_back(check_parton_block(pt->params().begin()->second));
            } else if (const auto* ml = dynamic_cast<const MlNitrifFlux*>(fm)) {
                checks.push_back(check_mlp_block("mlp", ml->model()));
            } else if (const auto* hy = dynamic_cast<const HybridNitrifFlux*>(fm)) {
                checks.push_back(check_mlp_block("hybrid_residual", hy->residual_model()));
            }
        }
    }
    if (checks.empty()) throw ConfigError("no differentiable bindings to check");

    bool all_ok = true;
    bool kink = false;
    std::cout << "block               max_rel_err  status\n";
    for (const auto& c : checks) {
        if (c.excluded_kink) {
            kink = true;
            std::cout << c.block << "  -  EXCLUDED KINK: " << c.note << "\n";
            continue;
        }
        bool ok = c.max_rel_err < 1e-4;
        all_ok = all_ok && ok;
        std::printf("%-18s  %11.3e  %s\n", c.block.c_str(), c.max_rel_err,
                    ok ? "ok" : "FAIL");
    }
    if (kink) return 1;
    return all_ok ? 0 : 2;
}

}  // namespace ecograph::cli
