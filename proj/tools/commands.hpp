#pragma once

#include <cstdint>
#include <string>

namespace ecograph::cli {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;       // empty = config's outputs.dir
    std::uint64_t seed = 0;    // used when has_seed
    bool has_seed = false;
    bool plot = false;
};

int cmd_simulate(const CommonArgs& args);
int cmd_coarsen(const CommonArgs& args, const std::string& map_path);
int cmd_distill(const CommonArgs& args, const std::string& forced_mode = "");
int cmd_evaluate(const CommonArgs& args, const std::string& ref_path,
                 const std::string& sim_path, const std::string& variable);
int cmd_gradcheck(const CommonArgs& args);

}  // namespace ecograph::cli
