// Copyright 2026 The FSMR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fsmr/config.hpp"
#include "fsmr/params.hpp"

namespace fsmr {

inline constexpr char kCheckpointMagic[4] = {'F', 'S', 'M', 'R'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, little-endian throughout:
///   "FSMR" | u32 version | u32 config length | config JSON (UTF-8)
///   then per parameter until end of file:
///   u32 name length | name | u32 ndim | u32 dim... | f64 values...
std::string encode_checkpoint(const ParamStore& params, const RunConfig& cfg);
void save_checkpoint(const ParamStore& params, const RunConfig& cfg,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  ParamStore params;
  RunConfig config;
};

/// Throws FormatError (bad magic), UnsupportedVersionError (version > 1) or
/// CorruptionError (truncation, with the byte offset).
LoadedCheckpoint decode_checkpoint(const std::string& bytes);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fsmr
