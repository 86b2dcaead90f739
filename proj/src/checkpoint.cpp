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

#include "fsmr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fsmr/errors.hpp"

namespace fsmr {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t offset() const { return pos_; }

  const char* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CorruptionError("checkpoint truncated at byte offset " + std::to_string(pos_) +
                            " while reading " + what);
    }
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::uint32_t u32(const char* what) {
    const auto* p = reinterpret_cast<const unsigned char*>(take(4, what));
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  }

  double f64(const char* what) {
    const auto* p = reinterpret_cast<const unsigned char*>(take(8, what));
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ParamStore& params, const RunConfig& cfg) {
  std::string out(kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  const std::string config = cfg.to_json().dump();
  put_u32(out, static_cast<std::uint32_t>(config.size()));
  out += config;
  for (const auto& e : params.entries()) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put_u32(out, static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t dim : e.value.shape()) put_u32(out, static_cast<std::uint32_t>(dim));
    for (double v : e.value.data()) put_f64(out, v);
  }
  return out;
}

void save_checkpoint(const ParamStore& params, const RunConfig& cfg,
                     const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(params, cfg);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  const char* magic = in.take(4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw FormatError("not a checkpoint: bad magic bytes");
  }
  const std::uint32_t version = in.u32("version");
  if (version > kCheckpointVersion) {
    throw UnsupportedVersionError("checkpoint version " + std::to_string(version) +
                                  " is newer than supported version " +
                                  std::to_string(kCheckpointVersion));
  }
  if (version == 0) throw FormatError("checkpoint version 0 is invalid");
  const std::uint32_t config_len = in.u32("config length");
  const std::size_t config_at = in.offset();
  const char* config_bytes = in.take(config_len, "config");
  nlohmann::json config_json;
  try {
    config_json = nlohmann::json::parse(config_bytes, config_bytes + config_len);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptionError("checkpoint config at byte offset " + std::to_string(config_at) +
                          " is not valid JSON");
  }

  LoadedCheckpoint out;
  out.config = RunConfig::from_json(config_json);
  while (!in.at_end()) {
    const std::uint32_t name_len = in.u32("parameter name length");
    const char* name = in.take(name_len, "parameter name");
    const std::uint32_t ndim = in.u32("parameter rank");
    Shape shape;
    std::size_t count = 1;
    for (std::uint32_t k = 0; k < ndim; ++k) {
      shape.push_back(in.u32("parameter dimension"));
      count *= shape.back();
    }
    if (count > (bytes.size() - in.offset()) / 8) {
      throw CorruptionError("checkpoint truncated at byte offset " + std::to_string(in.offset()) +
                            " inside parameter '" + std::string(name, name_len) + "'");
    }
    std::vector<double> data(count);
    for (double& v : data) v = in.f64("parameter values");
    try {
      out.params.add(std::string(name, name_len), Tensor(std::move(shape), std::move(data)));
    } catch (const ConfigError&) {
      throw CorruptionError("checkpoint repeats parameter '" + std::string(name, name_len) + "'");
    }
  }
  return out;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace fsmr
