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
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/error.hpp"
#include "noteworthy/transcript.hpp"

namespace noteworthy {

enum class Subsection {
  kChiefComplaint,
  kHistoryOfPresentIllness,
  kPastMedicalHistory,
  kPastSurgicalHistory,
  kFamilyHistory,
  kSocialHistory,
  kMedications,
  kReviewOfSystems,
  kPhysicalExam,
  kLabResults,
  kAssessment,
  kPlan,
};

inline constexpr std::array<std::pair<Subsection, std::string_view>, 12> kSubsectionNames{{
    {Subsection::kChiefComplaint, "chief_complaint"},
    {Subsection::kHistoryOfPresentIllness, "history_of_present_illness"},
    {Subsection::kPastMedicalHistory, "past_medical_history"},
    {Subsection::kPastSurgicalHistory, "past_surgical_history"},
    {Subsection::kFamilyHistory, "family_history"},
    {Subsection::kSocialHistory, "social_history"},
    {Subsection::kMedications, "medications"},
    {Subsection::kReviewOfSystems, "review_of_systems"},
    {Subsection::kPhysicalExam, "physical_exam"},
    {Subsection::kLabResults, "lab_results"},
    {Subsection::kAssessment, "assessment"},
    {Subsection::kPlan, "plan"},
}};

inline std::string_view to_string(Subsection s) {
  for (const auto& [value, name] : kSubsectionNames)
    if (value == s) return name;
  return "plan";
}

inline std::optional<Subsection> parse_subsection(std::string_view name) {
  for (const auto& [value, n] : kSubsectionNames)
    if (n == name) return value;
  return std::nullopt;
}

enum class RosResult { kConfirms, kDenies, kOther };

inline std::string_view to_string(RosResult r) {
  switch (r) {
    case RosResult::kConfirms: return "confirms";
    case RosResult::kDenies: return "denies";
    case RosResult::kOther: return "other";
  }
  return "other";
}

inline RosResult parse_ros_result(std::string_view s) {
  if (s == "confirms") return RosResult::kConfirms;
  if (s == "denies") return RosResult::kDenies;
  return RosResult::kOther;
}

struct Tag {
  std::string key;
  std::string value;
  friend bool operator==(const Tag&, const Tag&) = default;
};

struct RosObservation {
  std::string system;
  std::string symptom;
  RosResult result = RosResult::kOther;
  friend bool operator==(const RosObservation&, const RosObservation&) = default;
};

struct NoteEntry {
  Subsection subsection = Subsection::kPlan;
  std::string text;
  std::vector<Tag> tags;
  std::vector<std::size_t> evidence;
  std::vector<RosObservation> ros;

  bool has_tag(std::string_view key, std::string_view value) const {
    return std::any_of(tags.begin(), tags.end(),
                       [&](const Tag& t) { return t.key == key && t.value == value; });
  }
  friend bool operator==(const NoteEntry&, const NoteEntry&) = default;
};

struct SoapNote {
  std::string transcript_id;
  std::vector<NoteEntry> entries;
  friend bool operator==(const SoapNote&, const SoapNote&) = default;
};

// Tag conventions of the annotation format.
inline constexpr std::string_view kProblemTagKey = "problem";
inline constexpr std::string_view kContextTagKey = "context";
inline constexpr std::string_view kHpiTagValue = "HPI";

// ---------------------------------------------------------------------------
// Annotation JSONL

inline SoapNote parse_note(std::string_view raw, std::size_t line = 0, ParseStats* stats = nullptr) {
  const auto obj = detail::parse_json_line(raw, line);
  if (!obj.is_object()) throw ParseError("record must be a JSON object", line);
  detail::count_unknown(obj, {"transcript_id", "entries"}, stats);
  SoapNote note;
  note.transcript_id = detail::require_string(obj, "transcript_id", line);
  const auto& entries = detail::require(obj, "entries", line);
  if (!entries.is_array()) throw ParseError("field \"entries\" must be an array", line);
  for (const auto& e : entries) {
    if (!e.is_object()) throw ParseError("entry must be a JSON object", line);
    detail::count_unknown(e, {"subsection", "text", "tags", "evidence", "ros"}, stats);
    NoteEntry entry;
    const auto name = detail::require_string(e, "subsection", line);
    auto sub = parse_subsection(name);
    if (!sub) throw ParseError("unknown subsection \"" + name + "\"", line);
    entry.subsection = *sub;
    entry.text = detail::require_string(e, "text", line);
    const auto& tags = detail::require(e, "tags", line);
    if (!tags.is_array()) throw ParseError("field \"tags\" must be an array", line);
    for (const auto& t : tags) {
      if (!t.is_object()) throw ParseError("tag must be a JSON object", line);
      entry.tags.push_back({detail::require_string(t, "key", line), detail::require_string(t, "value", line)});
    }
    const auto& evidence = detail::require(e, "evidence", line);
    if (!evidence.is_array()) throw ParseError("field \"evidence\" must be an array", line);
    for (const auto& ix : evidence) {
      if (!ix.is_number_unsigned() && !(ix.is_number_integer() && ix.get<std::int64_t>() >= 0))
        throw ParseError("evidence index must be a non-negative integer", line);
      entry.evidence.push_back(ix.get<std::size_t>());
    }
    if (auto it = e.find("ros"); it != e.end()) {
      if (!it->is_array()) throw ParseError("field \"ros\" must be an array", line);
      for (const auto& o : *it) {
        if (!o.is_object()) throw ParseError("ros observation must be a JSON object", line);
        RosObservation obs{detail::require_string(o, "system", line),
                           detail::require_string(o, "symptom", line),
                           parse_ros_result(detail::require_string(o, "result", line))};
        if (obs.system.empty() || obs.symptom.empty())
          throw ValidationError("line " + std::to_string(line) + ": empty ros system or symptom");
        entry.ros.push_back(std::move(obs));
      }
    }
    note.entries.push_back(std::move(entry));
  }
  if (stats) ++stats->records;
  return note;
}

inline nlohmann::json to_json(const SoapNote& note) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : note.entries) {
    nlohmann::json tags = nlohmann::json::array();
    for (const auto& t : e.tags) tags.push_back({{"key", t.key}, {"value", t.value}});
    nlohmann::json entry = {{"subsection", to_string(e.subsection)},
                            {"text", e.text},
                            {"tags", std::move(tags)},
                            {"evidence", e.evidence}};
    if (!e.ros.empty()) {
      nlohmann::json ros = nlohmann::json::array();
      for (const auto& o : e.ros)
        ros.push_back({{"system", o.system}, {"symptom", o.symptom}, {"result", to_string(o.result)}});
      entry["ros"] = std::move(ros);
    }
    entries.push_back(std::move(entry));
  }
  return {{"transcript_id", note.transcript_id}, {"entries", std::move(entries)}};
}

inline std::vector<SoapNote> read_notes(std::istream& in, ParseStats* stats = nullptr) {
  std::vector<SoapNote> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (detail::is_blank(raw)) continue;
    out.push_back(parse_note(raw, line, stats));
  }
  return out;
}

inline void write_notes(std::ostream& out, std::span<const SoapNote> notes) {
  for (const auto& n : notes) out << to_json(n).dump() << '\n';
}

inline void validate_note(const SoapNote& note, const Transcript& t) {
  if (note.transcript_id != t.id)
    throw ValidationError("note for " + note.transcript_id + " paired with transcript " + t.id);
  for (const auto& e : note.entries)
    for (auto ix : e.evidence)
      if (ix >= t.size())
        throw ValidationError("note " + note.transcript_id + ": evidence index " + std::to_string(ix) +
                              " outside transcript of " + std::to_string(t.size()) + " utterances");
}

struct Example {
  Transcript transcript;
  SoapNote note;
};

// Pairs transcripts with their notes. Transcripts without a note get an
// empty one; a note naming an unknown transcript is an error.
inline std::vector<Example> join_corpus(std::vector<Transcript> transcripts, std::vector<SoapNote> notes) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < transcripts.size(); ++i) by_id.emplace(transcripts[i].id, i);
  std::vector<std::optional<SoapNote>> paired(transcripts.size());
  for (auto& n : notes) {
    auto it = by_id.find(n.transcript_id);
    if (it == by_id.end()) throw ValidationError("note references unknown transcript " + n.transcript_id);
    if (paired[it->second]) throw ValidationError("duplicate note for transcript " + n.transcript_id);
    paired[it->second] = std::move(n);
  }
  std::vector<Example> out;
  out.reserve(transcripts.size());
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    SoapNote note = paired[i] ? std::move(*paired[i]) : SoapNote{transcripts[i].id, {}};
    validate_note(note, transcripts[i]);
    out.push_back({std::move(transcripts[i]), std::move(note)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Label spaces and matrices

enum class Task { kDiagnosis, kRos };

inline std::string_view to_string(Task t) { return t == Task::kDiagnosis ? "diagnosis" : "ros"; }

inline Task parse_task(std::string_view s) {
  if (s == "diagnosis") return Task::kDiagnosis;
  if (s == "ros") return Task::kRos;
  throw ConfigError("unknown task \"" + std::string(s) + "\" (expected diagnosis or ros)");
}

struct LabelSpace {
  Task task = Task::kDiagnosis;
  std::vector<std::string> labels;
  std::vector<double> train_prevalence;

  std::size_t size() const { return labels.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return i;
    return std::nullopt;
  }
  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

inline void validate(const LabelSpace& space) {
  if (space.train_prevalence.size() != space.labels.size())
    throw ValidationError("label space prevalence count does not match label count");
  std::set<std::string> seen;
  for (const auto& l : space.labels)
    if (!seen.insert(l).second) throw ValidationError("duplicate label \"" + l + "\"");
  for (double p : space.train_prevalence)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("prevalence outside [0,1]");
}

// Dense N x L binary matrix, row-major.
struct LabelMatrix {
  std::vector<std::string> example_ids;
  LabelSpace space;
  std::vector<std::uint8_t> values;

  std::size_t rows() const { return example_ids.size(); }
  std::size_t cols() const { return space.size(); }
  std::uint8_t at(std::size_t i, std::size_t l) const { return values[i * cols() + l]; }
  std::uint8_t& at(std::size_t i, std::size_t l) { return values[i * cols() + l]; }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return std::span<const std::uint8_t>(values).subspan(i * cols(), cols());
  }
  std::vector<std::string> positive_labels(std::size_t i) const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < cols(); ++l)
      if (at(i, l)) out.push_back(space.labels[l]);
    return out;
  }
  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;
};

inline std::vector<double> column_prevalence(const LabelMatrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  if (m.rows() == 0) return out;
  for (std::size_t l = 0; l < m.cols(); ++l) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) count += m.at(i, l);
    out[l] = static_cast<double>(count) / static_cast<double>(m.rows());
  }
  return out;
}

// Keeps only the rows whose id is in `ids`, in `ids` order.
inline LabelMatrix select_rows(const LabelMatrix& m, std::span<const std::string> ids) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < m.rows(); ++i) by_id.emplace(m.example_ids[i], i);
  LabelMatrix out{{}, m.space, {}};
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("no label row for example " + id);
    out.example_ids.push_back(id);
    auto r = m.row(it->second);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

inline nlohmann::json to_json(const LabelSpace& s) {
  return {{"task", to_string(s.task)}, {"labels", s.labels}, {"train_prevalence", s.train_prevalence}};
}

inline LabelSpace label_space_from_json(const nlohmann::json& j) {
  try {
    LabelSpace s{parse_task(j.at("task").get<std::string>()), j.at("labels").get<std::vector<std::string>>(),
                 j.at("train_prevalence").get<std::vector<double>>()};
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid label space: ") + e.what(), 0);
  }
}

// Label matrix JSONL: a header line {"label_space": {...}, ...extra} followed
// by one {"id": ..., "labels": [...]} row per example.
inline void write_label_matrix(std::ostream& out, const LabelMatrix& m,
                               const nlohmann::json& extra_header = nlohmann::json::object()) {
  nlohmann::json header = extra_header;
  header["label_space"] = to_json(m.space);
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i)
    out << nlohmann::json{{"id", m.example_ids[i]}, {"labels", m.positive_labels(i)}}.dump() << '\n';
}

inline LabelMatrix read_label_matrix(std::istream& in, nlohmann::json* header_out = nullptr) {
  std::string raw;
  std::size_t line = 0;
  LabelMatrix m;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    if (detail::is_blank(raw)) continue;
    const auto obj = detail::parse_json_line(raw, line);
    if (!have_header) {
      if (!obj.is_object() || !obj.contains("label_space"))
        throw ParseError("label file must start with a label_space header", line);
      m.space = label_space_from_json(obj["label_space"]);
      if (header_out) *header_out = obj;
      have_header = true;
      continue;
    }
    if (!obj.is_object()) throw ParseError("row must be a JSON object", line);
    m.example_ids.push_back(detail::require_string(obj, "id", line));
    std::vector<std::uint8_t> row(m.cols(), 0);
    const auto& labels = detail::require(obj, "labels", line);
    if (!labels.is_array()) throw ParseError("field \"labels\" must be an array", line);
    for (const auto& l : labels) {
      if (!l.is_string()) throw ParseError("label must be a string", line);
      auto ix = m.space.index_of(l.get<std::string>());
      if (!ix) throw ParseError("label \"" + l.get<std::string>() + "\" not in label space", line);
      row[*ix] = 1;
    }
    m.values.insert(m.values.end(), row.begin(), row.end());
  }
  if (!have_header) throw ParseError("empty label file", 0);
  return m;
}

// ---------------------------------------------------------------------------
// Diagnosis labels

// Lowercases, drops parenthesized elaborations, collapses whitespace.
inline std::string normalize_problem_tag(std::string_view tag) {
  std::string out;
  out.reserve(tag.size());
  int depth = 0;
  bool pending_space = false;
  for (unsigned char c : tag) {
    if (c == '(') {
      ++depth;
      pending_space = !out.empty();
      continue;
    }
    if (c == ')') {
      if (depth > 0) --depth;
      pending_space = !out.empty();
      continue;
    }
    if (depth > 0) continue;
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

using TagCounts = std::map<std::string, std::size_t>;

namespace detail {

// Orders tags by descending count, then lexicographically.
inline std::vector<std::string> by_frequency(const TagCounts& counts) {
  std::vector<std::string> out;
  out.reserve(counts.size());
  for (const auto& [tag, n] : counts) out.push_back(tag);
  std::stable_sort(out.begin(), out.end(),
                   [&](const std::string& a, const std::string& b) { return counts.at(a) > counts.at(b); });
  return out;
}

inline std::vector<std::string> merge_canonicals(const TagCounts& counts, std::size_t top_k) {
  if (top_k == 0) throw ConfigError("merge top_k must be at least 1");
  auto ranked = by_frequency(counts);
  ranked.resize(std::min(top_k, ranked.size()));
  return ranked;
}

// `ranked` is in priority order: first hit wins.
inline std::string merge_target(const std::string& tag, const std::vector<std::string>& ranked) {
  for (const auto& canonical : ranked)
    if (canonical != tag && tag.find(canonical) != std::string::npos) return canonical;
  return tag;
}

}  // namespace detail

// Maps every tag to the most frequent of the top_k canonical tags that it
// contains as a substring (itself when none does).
inline std::map<std::string, std::string> merge_by_substring(const TagCounts& counts, std::size_t top_k) {
  const auto ranked = detail::merge_canonicals(counts, top_k);
  std::map<std::string, std::string> out;
  for (const auto& [tag, n] : counts) out.emplace(tag, detail::merge_target(tag, ranked));
  return out;
}

inline constexpr std::size_t kDefaultMergeTopK = 20;

class DiagnosisLabeler {
 public:
  DiagnosisLabeler() = default;
  DiagnosisLabeler(std::map<std::string, std::string> merge, std::vector<std::string> canonicals, LabelSpace space)
      : merge_(std::move(merge)), canonicals_(std::move(canonicals)), space_(std::move(space)) {}

  // Raw normalized problem tags that define the diagnosis set of one entry:
  // chief-complaint tags, HPI-marked past-medical-history tags, assessment
  // tags. Other entries contribute nothing.
  static std::vector<std::string> raw_entry_tags(const NoteEntry& e) {
    const bool qualifies =
        e.subsection == Subsection::kChiefComplaint || e.subsection == Subsection::kAssessment ||
        (e.subsection == Subsection::kPastMedicalHistory && e.has_tag(kContextTagKey, kHpiTagValue));
    std::vector<std::string> out;
    if (!qualifies) return out;
    for (const auto& t : e.tags) {
      if (t.key != kProblemTagKey) continue;
      auto n = normalize_problem_tag(t.value);
      if (!n.empty()) out.push_back(std::move(n));
    }
    return out;
  }

  static std::set<std::string> raw_note_tags(const SoapNote& n) {
    std::set<std::string> out;
    for (const auto& e : n.entries)
      for (auto& t : raw_entry_tags(e)) out.insert(std::move(t));
    return out;
  }

  // Builds the merge table and label space from training examples.
  static DiagnosisLabeler fit(std::span<const Example> train, std::size_t label_count,
                              std::size_t merge_top_k = kDefaultMergeTopK) {
    if (train.empty()) throw FitError("diagnosis label derivation needs a non-empty corpus");
    TagCounts raw;
    std::vector<std::set<std::string>> per_example;
    per_example.reserve(train.size());
    for (const auto& ex : train) {
      per_example.push_back(raw_note_tags(ex.note));
      for (const auto& t : per_example.back()) ++raw[t];
    }
    auto canonicals = detail::merge_canonicals(raw, merge_top_k);
    std::map<std::string, std::string> merge;
    for (const auto& [tag, n] : raw) merge.emplace(tag, detail::merge_target(tag, canonicals));
    TagCounts merged;
    for (const auto& tags : per_example) {
      std::set<std::string> m;
      for (const auto& t : tags) m.insert(merge.at(t));
      for (const auto& t : m) ++merged[t];
    }
    auto ranked = detail::by_frequency(merged);
    ranked.resize(std::min(label_count, ranked.size()));
    LabelSpace space{Task::kDiagnosis, ranked, {}};
    for (const auto& l : ranked)
      space.train_prevalence.push_back(static_cast<double>(merged.at(l)) / static_cast<double>(train.size()));
    return DiagnosisLabeler(std::move(merge), std::move(canonicals), std::move(space));
  }

  const LabelSpace& space() const { return space_; }
  const std::map<std::string, std::string>& merge_table() const { return merge_; }

  // Tags unseen at fit time are merged against the frozen canonical list.
  std::string merged(const std::string& normalized) const {
    auto it = merge_.find(normalized);
    return it == merge_.end() ? detail::merge_target(normalized, canonicals_) : it->second;
  }

  std::vector<std::string> entry_labels(const NoteEntry& e) const {
    std::vector<std::string> out;
    for (const auto& t : raw_entry_tags(e)) out.push_back(merged(t));
    return out;
  }

  LabelMatrix label(std::span<const Example> corpus) const {
    LabelMatrix m{{}, space_, std::vector<std::uint8_t>(corpus.size() * space_.size(), 0)};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      m.example_ids.push_back(corpus[i].transcript.id);
      for (const auto& e : corpus[i].note.entries)
        for (const auto& l : entry_labels(e))
          if (auto ix = space_.index_of(l)) m.at(i, *ix) = 1;
    }
    return m;
  }

  nlohmann::json to_json() const {
    return {{"merge_table", merge_}, {"canonicals", canonicals_}, {"label_space", noteworthy::to_json(space_)}};
  }

 private:
  std::map<std::string, std::string> merge_;
  std::vector<std::string> canonicals_;
  LabelSpace space_;
};

// ---------------------------------------------------------------------------
// Review-of-systems labels

inline std::string normalize_system(std::string_view s) {
  std::string out;
  bool pending = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline constexpr double kDefaultRosMinRate = 0.05;

class RosLabeler {
 public:
  RosLabeler() = default;
  explicit RosLabeler(LabelSpace space) : space_(std::move(space)) {}

  // Systems with a confirmed symptom in a review-of-systems entry.
  static std::vector<std::string> confirmed_systems(const NoteEntry& e) {
    std::vector<std::string> out;
    if (e.subsection != Subsection::kReviewOfSystems) return out;
    for (const auto& o : e.ros)
      if (o.result == RosResult::kConfirms) out.push_back(normalize_system(o.system));
    return out;
  }

  static RosLabeler fit(std::span<const Example> train, double min_rate = kDefaultRosMinRate) {
    if (!(min_rate > 0.0 && min_rate < 1.0)) throw ConfigError("ros min_rate must lie in (0, 1)");
    if (train.empty()) throw FitError("ros label derivation needs a non-empty corpus");
    TagCounts counts;
    for (const auto& ex : train) {
      std::set<std::string> systems;
      for (const auto& e : ex.note.entries)
        for (auto& s : confirmed_systems(e)) systems.insert(std::move(s));
      for (const auto& s : systems) ++counts[s];
    }
    LabelSpace space{Task::kRos, {}, {}};
    const auto n = static_cast<double>(train.size());
    for (const auto& s : detail::by_frequency(counts)) {
      const double rate = static_cast<double>(counts.at(s)) / n;
      if (rate > min_rate) {
        space.labels.push_back(s);
        space.train_prevalence.push_back(rate);
      }
    }
    return RosLabeler(std::move(space));
  }

  const LabelSpace& space() const { return space_; }

  std::vector<std::string> entry_labels(const NoteEntry& e) const { return confirmed_systems(e); }

  LabelMatrix label(std::span<const Example> corpus) const {
    LabelMatrix m{{}, space_, std::vector<std::uint8_t>(corpus.size() * space_.size(), 0)};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      m.example_ids.push_back(corpus[i].transcript.id);
      for (const auto& e : corpus[i].note.entries)
        for (const auto& s : confirmed_systems(e))
          if (auto ix = space_.index_of(s)) m.at(i, *ix) = 1;
    }
    return m;
  }

  nlohmann::json to_json() const { return {{"label_space", noteworthy::to_json(space_)}}; }

 private:
  LabelSpace space_;
};

// Label space fitted on `train`, matrix over `corpus`.
inline std::pair<LabelSpace, LabelMatrix> derive_diagnosis_labels(std::span<const Example> corpus,
                                                                  std::size_t label_count,
                                                                  std::span<const Example> train) {
  auto labeler = DiagnosisLabeler::fit(train, label_count);
  return {labeler.space(), labeler.label(corpus)};
}

inline std::pair<LabelSpace, LabelMatrix> derive_diagnosis_labels(std::span<const Example> corpus,
                                                                  std::size_t label_count) {
  return derive_diagnosis_labels(corpus, label_count, corpus);
}

inline std::pair<LabelSpace, LabelMatrix> derive_ros_labels(std::span<const Example> corpus, double min_rate,
                                                            std::span<const Example> train) {
  auto labeler = RosLabeler::fit(train, min_rate);
  return {labeler.space(), labeler.label(corpus)};
}

inline std::pair<LabelSpace, LabelMatrix> derive_ros_labels(std::span<const Example> corpus, double min_rate) {
  return derive_ros_labels(corpus, min_rate, corpus);
}

// ---------------------------------------------------------------------------
// Noteworthy targets

// Utterances cited as evidence by any entry.
inline std::vector<std::uint8_t> noteworthy_targets(const Transcript& t, const SoapNote& n) {
  std::vector<std::uint8_t> out(t.size(), 0);
  for (const auto& e : n.entries)
    for (auto ix : e.evidence)
      if (ix < out.size()) out[ix] = 1;
  return out;
}

// Utterances cited by an entry whose derived labels intersect `labels`.
// `labeler` is a DiagnosisLabeler or RosLabeler (anything with entry_labels).
template <typename Labeler>
std::vector<std::uint8_t> noteworthy_targets(const Transcript& t, const SoapNote& n,
                                             const std::set<std::string>& labels, const Labeler& labeler) {
  std::vector<std::uint8_t> out(t.size(), 0);
  for (const auto& e : n.entries) {
    const auto derived = labeler.entry_labels(e);
    const bool relevant =
        std::any_of(derived.begin(), derived.end(), [&](const std::string& l) { return labels.count(l) > 0; });
    if (!relevant) continue;
    for (auto ix : e.evidence)
      if (ix < out.size()) out[ix] = 1;
  }
  return out;
}

inline std::vector<std::size_t> indices_of(std::span<const std::uint8_t> mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(i);
  return out;
}

}  // namespace noteworthy
