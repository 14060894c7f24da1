/*
 * Copyright 2026 The Persona Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fstream>
#include <map>

#include "binary_io.hpp"
#include "persona/config.hpp"
#include "persona/model.hpp"

namespace persona {

namespace {

constexpr char kMagic[4] = {'T', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const JointModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  binary::put_u32(os, kVersion);
  const auto cfg = model_config_text(model.config());
  binary::put_u32(os, static_cast<std::uint32_t>(cfg.size()));
  binary::put_bytes(os, cfg);
  const auto params = model.parameters();
  binary::put_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    binary::put_u32(os, static_cast<std::uint32_t>(p.name.size()));
    binary::put_bytes(os, p.name);
    binary::put_u32(os, static_cast<std::uint32_t>(p.tensor.rank()));
    for (auto e : p.tensor.shape()) binary::put_u32(os, static_cast<std::uint32_t>(e));
    for (double v : p.tensor.data()) binary::put_f64(os, v);
  }
  if (!os) throw IoError("failed writing " + path.string());
}

JointModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  binary::Reader r(is, path.string());
  if (r.bytes(4) != std::string(kMagic, 4)) throw IoError(path.string() + " is not a TFCK checkpoint");
  if (auto v = r.u32(); v != kVersion) {
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(v));
  }
  const auto cfg_len = r.u32();
  JointModel model(model_config_from_text(r.bytes(cfg_len)));

  std::map<std::string, Tensor> expected;
  for (auto& p : model.parameters()) expected.emplace(p.name, p.tensor);
  const auto count = r.u32();
  if (count != expected.size()) {
    throw IoError(path.string() + ": holds " + std::to_string(count) + " tensors, configuration needs " +
                  std::to_string(expected.size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = r.bytes(r.u32());
    auto it = expected.find(name);
    if (it == expected.end()) throw IoError(path.string() + ": unexpected tensor '" + name + "'");
    Shape shape(r.u32());
    for (auto& e : shape) e = r.u32();
    if (shape != it->second.shape()) {
      throw IoError(path.string() + ": tensor '" + name + "' has shape " + shape_string(shape) +
                    ", expected " + shape_string(it->second.shape()));
    }
    auto dst = it->second.mutable_data();
    for (auto& v : dst) v = r.f64();
    expected.erase(it);
  }
  if (!r.at_end()) throw IoError(path.string() + ": trailing bytes");
  return model;
}

}  // namespace persona
