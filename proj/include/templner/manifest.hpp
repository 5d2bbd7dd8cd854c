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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace templner {

inline constexpr const char* kVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance record written next to every CLI output. Contains no
/// timestamps, so identical runs produce identical manifests.
struct RunManifest {
  struct Input {
    std::string role;
    std::string path;
    std::string sha256;
  };

  std::string command;
  std::vector<Input> inputs;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> config;

  void add_input(const std::string& role, const std::filesystem::path& path);
  // Hash of the canonical (sorted key) serialization of `config`.
  std::string config_hash() const;
  std::string to_json() const;
  void write_beside(const std::filesystem::path& output) const;
};

}  // namespace templner
