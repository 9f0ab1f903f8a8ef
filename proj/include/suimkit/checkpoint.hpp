#pragma once

#include <cstdint>
#include <string>

#include "suimkit/network.hpp"

namespace suim::nn {

inline constexpr uint32_t kCheckpointVersion = 1;

// Binary snapshot: magic "SUIMCKPT", version, the embedded network spec
// as JSON, then one named record per parameter tensor and per running
// batch-norm statistic. Doubles are stored raw (IEEE 754 little endian);
// loading rebuilds the graph from the embedded spec, so a restored
// network reproduces the saved one bit for bit.
void save_checkpoint(const std::string& path, const Network& net);

// Throws IoError on missing/corrupt/truncated files, unsupported
// versions, unknown record names, or record shape mismatches.
Network load_checkpoint(const std::string& path);

}  // namespace suim::nn
