// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "nn/adam.hpp"
#include "nn/params.hpp"
#include "nn/unet.hpp"

namespace fforge::nn {

inline constexpr const char* kCheckpointMagic = "FFORGE-CKPT-1";

struct Checkpoint {
  UNetConfig config;
  AdamOptions adam;
  ParamStore<float> params;
  std::map<std::string, std::string> meta;
};

// JSON manifest at `path`; tensor payloads as little-endian f32 in the sibling ".bin".
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fforge::nn
