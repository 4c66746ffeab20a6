// Copyright 2026 The dfaguide Authors.
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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dfaguide/error.hpp"
#include "dfaguide/hmm.hpp"
#include "json.hpp"

namespace dfaguide {
namespace {

constexpr char kMagic[8] = {'D', 'F', 'G', 'H', 'M', 'M', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary model format assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw InputError("truncated HMM binary file");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

nlohmann::json block_to_json(std::span<const double> values) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : values) {
    if (v == kNegInf) arr.push_back(nullptr);
    else arr.push_back(v);
  }
  return arr;
}

std::vector<double> block_from_json(const nlohmann::json& arr, std::size_t expected, const char* name) {
  if (!arr.is_array() || arr.size() != expected) {
    throw InputError(std::string("HMM JSON block '") + name + "' has wrong size");
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : arr) out.push_back(v.is_null() ? kNegInf : v.get<double>());
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hmm_to_binary(const Hmm& hmm) {
  const std::size_t h = hmm.num_hidden();
  const std::size_t v = hmm.vocab_size();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, h);
  put<std::uint64_t>(out, v);
  for (double x : hmm.log_initial()) put<double>(out, x);
  for (std::size_t z = 0; z < h; ++z)
    for (double x : hmm.log_transition_row(z)) put<double>(out, x);
  for (std::size_t z = 0; z < h; ++z)
    for (double x : hmm.log_emission_row(z)) put<double>(out, x);
  return out;
}

Hmm hmm_from_binary(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw InputError("not a dfaguide HMM binary file");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kFormatVersion) throw InputError("unsupported HMM format version " + std::to_string(version));
  const auto h = take<std::uint64_t>(bytes, pos);
  const auto v = take<std::uint64_t>(bytes, pos);
  if (h == 0 || v == 0 || h > (1u << 20) || v > (1u << 24)) throw InputError("implausible HMM dimensions");
  const std::size_t expected = (h + h * h + h * v) * sizeof(double);
  if (bytes.size() - pos != expected) throw InputError("HMM binary payload has wrong size");
  auto read_block = [&](std::size_t count) {
    std::vector<double> out(count);
    std::memcpy(out.data(), bytes.data() + pos, count * sizeof(double));
    pos += count * sizeof(double);
    return out;
  };
  auto li = read_block(h);
  auto lt = read_block(h * h);
  auto le = read_block(h * v);
  return Hmm(h, v, std::move(li), std::move(lt), std::move(le));
}

std::string hmm_to_json(const Hmm& hmm) {
  const std::size_t h = hmm.num_hidden();
  nlohmann::json j;
  j["version"] = kFormatVersion;
  j["h"] = h;
  j["vocab_size"] = hmm.vocab_size();
  j["log_initial"] = block_to_json(hmm.log_initial());
  std::vector<double> lt, le;
  for (std::size_t z = 0; z < h; ++z) {
    auto r = hmm.log_transition_row(z);
    lt.insert(lt.end(), r.begin(), r.end());
    auto e = hmm.log_emission_row(z);
    le.insert(le.end(), e.begin(), e.end());
  }
  j["log_transition"] = block_to_json(lt);
  j["log_emission"] = block_to_json(le);
  return j.dump();
}

Hmm hmm_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed HMM JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<std::uint32_t>() != kFormatVersion) throw InputError("unsupported HMM JSON version");
    const auto h = j.at("h").get<std::size_t>();
    const auto v = j.at("vocab_size").get<std::size_t>();
    return Hmm(h, v, block_from_json(j.at("log_initial"), h, "log_initial"),
               block_from_json(j.at("log_transition"), h * h, "log_transition"),
               block_from_json(j.at("log_emission"), h * v, "log_emission"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed HMM JSON: ") + e.what());
  }
}

void save_hmm(const Hmm& hmm, const std::string& path) {
  const std::string payload = ends_with(path, ".json") ? hmm_to_json(hmm) : hmm_to_binary(hmm);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("failed writing " + path);
}

Hmm load_hmm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (ends_with(path, ".json")) return hmm_from_json(bytes);
  return hmm_from_binary(bytes);
}

}  // namespace dfaguide
