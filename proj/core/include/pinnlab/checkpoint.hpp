#pragma once

#include <filesystem>

#include "pinnlab/nets.hpp"

namespace pinnlab {

inline constexpr int kCheckpointVersion = 1;

// Versioned structured-text checkpoint. Values are written with 17
// significant digits so the round trip is value-exact.
void save_checkpoint(const NetworkWeights& w, const std::filesystem::path& path);
NetworkWeights load_checkpoint(const std::filesystem::path& path);

}  // namespace pinnlab
