#include "ecograph/report.hpp"

#include "ecograph/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace ecograph {

namespace {

using nlohmann::json;

json skill_to_json(const SkillMetrics& m) {
    return json{{"nse", m.nse},     {"kge", m.kge},     {"composite", m.composite},
                {"r", m.r},         {"alpha", m.alpha}, {"beta", m.beta}};
}

SkillMetrics skill_from_json(const json& j) {
    SkillMetrics m;
    m.nse = j.at("nse").get<double>();
    m.kge = j.at("kge").get<double>();
    m.composite = j.at("composite").get<double>();
    m.r = j.at("r").get<double>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    return m;
}

}  // namespace

void write_metrics_report(const MetricsReport& report, const std::string& path) {
    json metrics = json::object();
    for (const auto& [variable, m] : report.metrics) metrics[variable] = skill_to_json(m);
    json j{{"mode", report.mode},
           {"seed", report.seed},
           {"config_digest", report.config_digest},
           {"kge_variant", report.kge_variant_name},
           {"metrics", metrics}};
    if (!report.pipeline.empty()) j["pipeline"] = report.pipeline;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write metrics report: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing metrics report: " + path);
}

MetricsReport read_metrics_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metrics report: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed metrics report: ") + e.what());
    }
    MetricsReport r;
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.kge_variant_name = j.at("kge_variant").get<std::string>();
    r.pipeline = j.value("pipeline", "");
    for (const auto& [variable, m] : j.at("metrics").items())
        r.metrics[variable] = skill_from_json(m);
    return r;
}

std::string content_digest(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for digest: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return content_digest(ss.str());
}

void write_run_meta(const std::string& out_dir, const std::string& config_digest,
                    std::uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    json j{{"config_digest", config_digest}, {"seed", seed}, {"kge_variant", kge_variant()}};
    std::string path = out_dir + "/run_meta.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write run metadata: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace ecograph
