// Copyright 2026 The templner Authors.
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

#include "templner/manifest.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"

#include "templner/error.hpp"

namespace templner {
namespace {

std::string to_hex(const unsigned char* data, unsigned int size) {
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < size; ++i) out << std::setw(2) << static_cast<int>(data[i]);
  return out.str();
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("crypto", "sha256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_, data, size) != 1) throw Error("crypto", "sha256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int size = 0;
    if (EVP_DigestFinal_ex(ctx_, digest.data(), &size) != 1) throw Error("crypto", "sha256 final failed");
    return to_hex(digest.data(), size);
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Sha256 h;
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) h.update(buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

void RunManifest::add_input(const std::string& role, const std::filesystem::path& path) {
  inputs.push_back({role, path.string(), sha256_file(path)});
}

std::string RunManifest::config_hash() const {
  nlohmann::json j(config);  // std::map keeps keys sorted
  return sha256_hex(j.dump());
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "templner";
  j["version"] = kVersion;
  j["command"] = command;
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& i : inputs) in.push_back({{"role", i.role}, {"path", i.path}, {"sha256", i.sha256}});
  j["inputs"] = in;
  j["seeds"] = nlohmann::ordered_json(seeds);
  j["config"] = nlohmann::ordered_json(config);
  j["config_hash"] = config_hash();
  return j.dump(2) + "\n";
}

void RunManifest::write_beside(const std::filesystem::path& output) const {
  const std::filesystem::path target = output.string() + ".manifest.json";
  std::ofstream out(target, std::ios::binary);
  if (!out) throw IoError("cannot write '" + target.string() + "'");
  out << to_json();
}

}  // namespace templner
