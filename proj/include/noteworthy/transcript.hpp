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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/error.hpp"

namespace noteworthy {

enum class Speaker { kPhysician, kPatient, kOther };

inline std::string_view to_string(Speaker s) {
  switch (s) {
    case Speaker::kPhysician: return "physician";
    case Speaker::kPatient: return "patient";
    case Speaker::kOther: return "other";
  }
  return "other";
}

struct Utterance {
  std::size_t index = 0;
  Speaker speaker = Speaker::kOther;
  std::int64_t start_ms = 0;
  std::string text;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Transcript {
  std::string id;
  std::vector<Utterance> utterances;

  std::size_t size() const { return utterances.size(); }
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

// Counters for tolerated irregularities seen while parsing.
struct ParseStats {
  std::size_t records = 0;
  std::size_t unknown_fields = 0;
  std::size_t remapped_speakers = 0;
};

namespace detail {

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + key + "\"", line);
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (!v.is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string", line);
  return v.get<std::string>();
}

inline void count_unknown(const nlohmann::json& obj,
                          std::initializer_list<std::string_view> known, ParseStats* stats) {
  if (!stats) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) ++stats->unknown_fields;
  }
}

inline nlohmann::json parse_json_line(std::string_view raw, std::size_t line) {
  try {
    return nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
}

}  // namespace detail

inline Speaker parse_speaker(std::string_view s, ParseStats* stats = nullptr) {
  if (s == "physician") return Speaker::kPhysician;
  if (s == "patient") return Speaker::kPatient;
  if (s != "other" && stats) ++stats->remapped_speakers;
  return Speaker::kOther;
}

// Checks the utterance invariants: contiguous indices, non-empty text,
// non-negative and non-decreasing timestamps, at least one utterance.
inline void validate(const Transcript& t) {
  if (t.id.empty()) throw ValidationError("transcript id is empty");
  if (t.utterances.empty()) throw ValidationError("transcript " + t.id + " has no utterances");
  for (std::size_t i = 0; i < t.utterances.size(); ++i) {
    const auto& u = t.utterances[i];
    const std::string where = "transcript " + t.id + ", utterance " + std::to_string(i);
    if (u.index != i) throw ValidationError(where + ": index " + std::to_string(u.index) + " out of order");
    if (detail::is_blank(u.text)) throw ValidationError(where + ": empty text");
    if (u.start_ms < 0) throw ValidationError(where + ": negative start_ms");
    if (i > 0 && u.start_ms < t.utterances[i - 1].start_ms)
      throw ValidationError(where + ": start_ms decreases");
  }
}

// Parses one JSONL record. `line` is only used in error messages.
inline Transcript parse_transcript(std::string_view raw, std::size_t line = 0,
                                   ParseStats* stats = nullptr) {
  const auto obj = detail::parse_json_line(raw, line);
  if (!obj.is_object()) throw ParseError("record must be a JSON object", line);
  detail::count_unknown(obj, {"id", "utterances"}, stats);

  Transcript t;
  t.id = detail::require_string(obj, "id", line);
  const auto& utts = detail::require(obj, "utterances", line);
  if (!utts.is_array()) throw ParseError("field \"utterances\" must be an array", line);
  t.utterances.reserve(utts.size());
  for (const auto& u : utts) {
    if (!u.is_object()) throw ParseError("utterance must be a JSON object", line);
    detail::count_unknown(u, {"speaker", "start_ms", "text"}, stats);
    Utterance out;
    out.index = t.utterances.size();
    out.speaker = parse_speaker(detail::require_string(u, "speaker", line), stats);
    const auto& start = detail::require(u, "start_ms", line);
    if (!start.is_number_integer()) throw ParseError("field \"start_ms\" must be an integer", line);
    out.start_ms = start.get<std::int64_t>();
    out.text = detail::require_string(u, "text", line);
    t.utterances.push_back(std::move(out));
  }
  validate(t);
  if (stats) ++stats->records;
  return t;
}

inline nlohmann::json to_json(const Transcript& t) {
  nlohmann::json utts = nlohmann::json::array();
  for (const auto& u : t.utterances) {
    utts.push_back({{"speaker", to_string(u.speaker)}, {"start_ms", u.start_ms}, {"text", u.text}});
  }
  return {{"id", t.id}, {"utterances", std::move(utts)}};
}

inline std::string serialize_transcript(const Transcript& t) { return to_json(t).dump(); }

// Reads a whole JSONL stream. Blank lines are skipped; ids must be unique.
inline std::vector<Transcript> read_transcripts(std::istream& in, ParseStats* stats = nullptr) {
  std::vector<Transcript> out;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (detail::is_blank(raw)) continue;
    auto t = parse_transcript(raw, line, stats);
    if (!seen.insert(t.id).second) throw ParseError("duplicate transcript id " + t.id, line);
    out.push_back(std::move(t));
  }
  return out;
}

inline void write_transcripts(std::ostream& out, std::span<const Transcript> corpus) {
  for (const auto& t : corpus) out << serialize_transcript(t) << '\n';
}

inline std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

inline std::size_t word_count(const Transcript& t) {
  std::size_t n = 0;
  for (const auto& u : t.utterances) n += word_count(u.text);
  return n;
}

// Fixed-width histogram over non-negative integers.
struct Histogram {
  std::size_t bin_width = 1;
  std::vector<std::size_t> counts;

  void add(std::size_t value) {
    const std::size_t bin = value / bin_width;
    if (bin >= counts.size()) counts.resize(bin + 1, 0);
    ++counts[bin];
  }
  std::size_t mass() const {
    std::size_t m = 0;
    for (auto c : counts) m += c;
    return m;
  }
};

inline nlohmann::json to_json(const Histogram& h) {
  return {{"bin_width", h.bin_width}, {"counts", h.counts}};
}

inline Histogram word_count_histogram(std::span<const Transcript> corpus, std::size_t bin_width = 100) {
  Histogram h{bin_width, {}};
  for (const auto& t : corpus) h.add(word_count(t));
  return h;
}

}  // namespace noteworthy
