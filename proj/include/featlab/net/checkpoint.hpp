#pragma once

#include <filesystem>

#include "featlab/net/network.hpp"

namespace featlab::net {

// Plain-text slice manifest followed by the raw little-endian doubles:
//
//   PINN-FEATLAB-CHECKPOINT 1
//   slice <name> <offset> <len>
//   ...
//   data <total>
//   <total * 8 bytes>
void save_checkpoint(const ParamStore& store, const std::filesystem::path& path);
ParamStore load_checkpoint(const std::filesystem::path& path);

}  // namespace featlab::net
