#pragma once

#include "ecograph/nn.hpp"

#include <string>

namespace ecograph {

/// Versioned JSON container holding the model kind, configuration, shapes,
/// normalization statistics and all weights; round-trips exactly.
void save_checkpoint(const MlpRegressor& model, const std::string& path);
void save_checkpoint(const SequenceRegressor& model, const std::string& path);

/// "mlp" or "sequence".
std::string checkpoint_kind(const std::string& path);

MlpRegressor load_mlp_checkpoint(const std::string& path);
SequenceRegressor load_seq_checkpoint(const std::string& path);

}  // namespace ecograph
