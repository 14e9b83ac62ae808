// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include "json.hpp"
#include "raster.hpp"

namespace fforge::nn {

namespace {

void write_f32le(std::ofstream& out, const std::vector<float>& values) {
  std::vector<unsigned char> raw(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto u = std::bit_cast<std::uint32_t>(values[i]);
    raw[4 * i] = static_cast<unsigned char>(u);
    raw[4 * i + 1] = static_cast<unsigned char>(u >> 8);
    raw[4 * i + 2] = static_cast<unsigned char>(u >> 16);
    raw[4 * i + 3] = static_cast<unsigned char>(u >> 24);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json j;
  j["magic"] = kCheckpointMagic;
  j["config"] = {{"in_channels", ckpt.config.in_channels},
                 {"depth", ckpt.config.depth},
                 {"base_channels", ckpt.config.base_channels}};
  j["adam"] = {{"lr", ckpt.adam.lr}, {"beta1", ckpt.adam.beta1}, {"beta2", ckpt.adam.beta2}, {"eps", ckpt.adam.eps}};
  j["meta"] = ckpt.meta;
  j["payload"] = payload_path(path).filename().string();
  auto tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& p : ckpt.params.all()) {
    tensors.push_back({{"name", p.name},
                       {"shape", p.shape},
                       {"trainable", p.trainable},
                       {"offset", offset},
                       {"count", p.value.size()}});
    offset += p.value.size();
  }
  j["tensors"] = tensors;

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw IoError("cannot write checkpoint " + path.string());
  f << j.dump(2) << '\n';
  std::ofstream bin(payload_path(path), std::ios::binary);
  if (!bin) throw IoError("cannot write checkpoint payload " + payload_path(path).string());
  for (const auto& p : ckpt.params.all()) write_f32le(bin, p.value);
  if (!f || !bin) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open checkpoint " + path.string());
  Checkpoint ckpt;
  nlohmann::json j;
  try {
    f >> j;
    if (j.at("magic").get<std::string>() != kCheckpointMagic) {
      throw ValidationError("checkpoint " + path.string() + " has an unknown magic string");
    }
    const auto& c = j.at("config");
    ckpt.config.in_channels = c.at("in_channels").get<std::size_t>();
    ckpt.config.depth = c.at("depth").get<std::size_t>();
    ckpt.config.base_channels = c.at("base_channels").get<std::size_t>();
    const auto& a = j.at("adam");
    ckpt.adam = {a.at("lr").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                 a.at("eps").get<double>()};
    if (j.contains("meta")) ckpt.meta = j["meta"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path.string() + ": " + e.what());
  }

  std::ifstream bin(payload_path(path), std::ios::binary);
  if (!bin) throw IoError("cannot open checkpoint payload " + payload_path(path).string());
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  try {
    for (const auto& t : j.at("tensors")) {
      const auto offset = t.at("offset").get<std::size_t>();
      const auto count = t.at("count").get<std::size_t>();
      if ((offset + count) * 4 > raw.size()) {
        throw ValidationError("checkpoint payload too short for tensor " + t.at("name").get<std::string>());
      }
      auto& p = ckpt.params.add(t.at("name").get<std::string>(), t.at("shape").get<std::vector<std::size_t>>(),
                                t.at("trainable").get<bool>(), 0.0f);
      if (p.value.size() != count) throw ValidationError("checkpoint tensor " + p.name + " count/shape mismatch");
      for (std::size_t i = 0; i < count; ++i) {
        const unsigned char* b = &raw[4 * (offset + i)];
        const std::uint32_t u = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                                (std::uint32_t(b[3]) << 24);
        p.value[i] = std::bit_cast<float>(u);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("checkpoint " + path.string() + ": " + e.what());
  }
  // Validates names and shapes against the declared architecture.
  UNet<float> probe(ckpt.config);
  probe.set_params(ckpt.params);
  return ckpt;
}

}  // namespace fforge::nn
