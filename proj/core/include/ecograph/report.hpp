#pragma once

#include "ecograph/metrics.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ecograph {

/// Skill summary of one job, serialized as JSON. composite is stored but
/// always recomputable from nse and kge.
struct MetricsReport {
    std::string mode;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::string kge_variant_name = kge_variant();
    std::string pipeline;  // set by multi-stage jobs, e.g. "residual_then_transfer"
    std::map<std::string, SkillMetrics> metrics;  // variable -> scores
};

void write_metrics_report(const MetricsReport& report, const std::string& path);
MetricsReport read_metrics_report(const std::string& path);

/// FNV-1a 64-bit content hash, hex-encoded; the reproducibility fingerprint
/// recorded in run metadata.
std::string content_digest(const std::string& bytes);
std::string file_digest(const std::string& path);

/// Sidecar `run_meta.json` carrying digest + seed for any command's outputs.
void write_run_meta(const std::string& out_dir, const std::string& config_digest,
                    std::uint64_t seed);

}  // namespace ecograph
