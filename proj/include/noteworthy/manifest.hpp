/*
 * Copyright 2026 The Noteworthy Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/error.hpp"
#include "noteworthy/util.hpp"

namespace noteworthy {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr int kFormatVersion = 1;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string file_digest(const std::filesystem::path& path) { return Fnv1a().update(read_file(path)).hex(); }

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> inputs;  // path -> digest
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  nlohmann::json config = nlohmann::json::object();
};

inline nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"config_hash", m.config_hash},
          {"config", m.config},
          {"inputs", m.inputs},
          {"seed", m.seed},
          {"outputs", m.outputs},
          {"versions", {{"noteworthy", kVersion}, {"format", kFormatVersion}}}};
}

inline std::string config_hash(const nlohmann::json& config) { return Fnv1a().update(config.dump()).hex(); }

// Collects outputs under temporary names; commit() renames them into place,
// destruction without commit() removes them.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : files_) std::filesystem::remove(tmp, ec);
  }

  // Opens `path` for writing via its temporary twin.
  std::ofstream& open(const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    if (std::filesystem::is_directory(path)) throw Error("cannot write " + path.string() + ": is a directory");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    files_.emplace_back(tmp, path);
    streams_.emplace_back(std::make_unique<std::ofstream>(tmp, std::ios::binary));
    if (!*streams_.back()) throw Error("cannot write " + path.string());
    return *streams_.back();
  }

  void write(const std::filesystem::path& path, const std::string& content) { open(path) << content; }

  std::vector<std::string> paths() const {
    std::vector<std::string> out;
    for (const auto& [tmp, p] : files_) out.push_back(p.string());
    return out;
  }

  void commit() {
    for (auto& s : streams_) {
      s->flush();
      if (!*s) throw Error("write failed");
      s->close();
    }
    std::size_t done = 0;
    try {
      for (; done < files_.size(); ++done) std::filesystem::rename(files_[done].first, files_[done].second);
    } catch (const std::filesystem::filesystem_error& e) {
      std::error_code ec;
      for (std::size_t i = 0; i < done; ++i) std::filesystem::remove(files_[i].second, ec);
      files_.erase(files_.begin(), files_.begin() + static_cast<std::ptrdiff_t>(done));
      throw Error(std::string("cannot move output into place: ") + e.what());
    }
    committed_ = true;
  }

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> files_;
  std::vector<std::unique_ptr<std::ofstream>> streams_;
  bool committed_ = false;
};

}  // namespace noteworthy
