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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/annotation.hpp"
#include "noteworthy/error.hpp"
#include "noteworthy/transcript.hpp"

namespace noteworthy {

// Lowercase; ASCII punctuation and whitespace become single spaces; leading
// and trailing spaces dropped. Non-ASCII bytes pass through unchanged.
inline std::string normalize_for_match(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (unsigned char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (!keep) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
  }
  return out;
}

struct Concept {
  std::string cui;
  std::string canonical;
  std::vector<std::string> synonyms;
};

struct ConceptMatch {
  std::string cui;
  std::size_t start = 0;  // byte offsets into the normalized text, [start, end)
  std::size_t end = 0;
  friend bool operator==(const ConceptMatch&, const ConceptMatch&) = default;
};

// Synonym dictionary compiled into an Aho-Corasick automaton over word ids,
// so matches are word-aligned and a scan is linear in the text length plus
// the number of candidate hits.
class ConceptLexicon {
 public:
  ConceptLexicon() { nodes_.emplace_back(); }

  const std::vector<Concept>& concepts() const { return concepts_; }
  std::size_t pattern_count() const { return patterns_.size(); }

  const Concept* find(std::string_view cui) const {
    auto it = by_cui_.find(std::string(cui));
    return it == by_cui_.end() ? nullptr : &concepts_[it->second];
  }

  // All word-aligned synonym hits in `normalized`, overlaps resolved by
  // longest match first, then leftmost. Returned in text order.
  std::vector<ConceptMatch> scan(std::string_view normalized) const {
    struct Word {
      std::size_t begin, end;
    };
    std::vector<Word> words;
    for (std::size_t i = 0; i < normalized.size();) {
      while (i < normalized.size() && normalized[i] == ' ') ++i;
      if (i >= normalized.size()) break;
      std::size_t j = i;
      while (j < normalized.size() && normalized[j] != ' ') ++j;
      words.push_back({i, j});
      i = j;
    }

    struct Candidate {
      std::size_t first_word, length;
      std::uint32_t pattern;
    };
    std::vector<Candidate> candidates;
    std::uint32_t state = 0;
    for (std::size_t w = 0; w < words.size(); ++w) {
      auto id_it = word_ids_.find(std::string(normalized.substr(words[w].begin, words[w].end - words[w].begin)));
      if (id_it == word_ids_.end()) {
        state = 0;
        continue;
      }
      const auto id = id_it->second;
      while (state != 0 && !nodes_[state].next.count(id)) state = nodes_[state].fail;
      auto nx = nodes_[state].next.find(id);
      state = nx == nodes_[state].next.end() ? 0 : nx->second;
      for (auto out = nodes_[state].pattern >= 0 ? state : nodes_[state].dict_link; out != 0;
           out = nodes_[out].dict_link) {
        const auto p = static_cast<std::uint32_t>(nodes_[out].pattern);
        const auto len = patterns_[p].words;
        candidates.push_back({w + 1 - len, len, p});
      }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.length != b.length) return a.length > b.length;
      return a.first_word < b.first_word;
    });
    std::vector<bool> taken(words.size(), false);
    std::vector<Candidate> accepted;
    for (const auto& c : candidates) {
      bool free = true;
      for (std::size_t k = c.first_word; k < c.first_word + c.length && free; ++k) free = !taken[k];
      if (!free) continue;
      for (std::size_t k = c.first_word; k < c.first_word + c.length; ++k) taken[k] = true;
      accepted.push_back(c);
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const Candidate& a, const Candidate& b) { return a.first_word < b.first_word; });

    std::vector<ConceptMatch> out;
    out.reserve(accepted.size());
    for (const auto& c : accepted) {
      out.push_back({concepts_[patterns_[c.pattern].concept_index].cui, words[c.first_word].begin,
                     words[c.first_word + c.length - 1].end});
    }
    return out;
  }

  friend ConceptLexicon build_lexicon(std::vector<Concept> concepts);

 private:
  struct Node {
    std::unordered_map<std::uint32_t, std::uint32_t> next;
    std::uint32_t fail = 0;
    std::uint32_t dict_link = 0;  // nearest proper suffix node ending a pattern
    std::int32_t pattern = -1;
  };
  struct Pattern {
    std::size_t concept_index;
    std::size_t words;
  };

  void insert(const std::string& normalized, std::size_t concept_index) {
    std::uint32_t state = 0;
    std::size_t n_words = 0;
    for (std::size_t i = 0; i < normalized.size();) {
      std::size_t j = normalized.find(' ', i);
      if (j == std::string::npos) j = normalized.size();
      const auto word = normalized.substr(i, j - i);
      auto [wit, fresh] = word_ids_.emplace(word, static_cast<std::uint32_t>(word_ids_.size()));
      auto nx = nodes_[state].next.find(wit->second);
      if (nx == nodes_[state].next.end()) {
        nodes_.emplace_back();
        const auto created = static_cast<std::uint32_t>(nodes_.size() - 1);
        nodes_[state].next.emplace(wit->second, created);
        state = created;
      } else {
        state = nx->second;
      }
      ++n_words;
      i = j + 1;
    }
    nodes_[state].pattern = static_cast<std::int32_t>(patterns_.size());
    patterns_.push_back({concept_index, n_words});
  }

  void link() {
    std::vector<std::uint32_t> queue;
    for (const auto& [id, child] : nodes_[0].next) queue.push_back(child);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto node = queue[head];
      for (const auto& [id, child] : nodes_[node].next) {
        auto f = nodes_[node].fail;
        while (f != 0 && !nodes_[f].next.count(id)) f = nodes_[f].fail;
        auto nx = nodes_[f].next.find(id);
        const std::uint32_t fail = (nx != nodes_[f].next.end() && nx->second != child) ? nx->second : 0;
        nodes_[child].fail = fail;
        nodes_[child].dict_link = nodes_[fail].pattern >= 0 ? fail : nodes_[fail].dict_link;
        queue.push_back(child);
      }
    }
  }

  std::vector<Concept> concepts_;
  std::unordered_map<std::string, std::size_t> by_cui_;
  std::unordered_map<std::string, std::uint32_t> word_ids_;
  std::vector<Node> nodes_;
  std::vector<Pattern> patterns_;
};

// Normalizes every synonym (the canonical form counts as one) and compiles
// the index. A normalized synonym claimed by two concepts is an error.
inline ConceptLexicon build_lexicon(std::vector<Concept> concepts) {
  if (concepts.empty()) throw LexiconError("lexicon needs at least one concept");
  ConceptLexicon lex;
  std::map<std::string, std::string> owner;
  for (auto& c : concepts) {
    if (c.cui.empty()) throw LexiconError("concept with empty cui");
    if (lex.by_cui_.count(c.cui)) throw LexiconError("duplicate cui " + c.cui);
    std::vector<std::string> normalized;
    auto consider = [&](const std::string& raw) {
      auto n = normalize_for_match(raw);
      if (n.empty()) throw LexiconError("concept " + c.cui + ": synonym \"" + raw + "\" is empty after normalization");
      if (std::find(normalized.begin(), normalized.end(), n) == normalized.end()) normalized.push_back(std::move(n));
    };
    if (!c.canonical.empty()) consider(c.canonical);
    for (const auto& s : c.synonyms) consider(s);
    if (normalized.empty()) throw LexiconError("concept " + c.cui + " has no synonyms");
    const std::size_t index = lex.concepts_.size();
    for (const auto& n : normalized) {
      auto [it, fresh] = owner.emplace(n, c.cui);
      if (!fresh)
        throw LexiconError("synonym \"" + n + "\" claimed by both " + it->second + " and " + c.cui);
      lex.insert(n, index);
    }
    c.synonyms = normalized;
    if (c.canonical.empty()) c.canonical = normalized.front();
    lex.by_cui_.emplace(c.cui, index);
    lex.concepts_.push_back(std::move(c));
  }
  lex.link();
  return lex;
}

inline std::vector<ConceptMatch> tag_text(const ConceptLexicon& lex, std::string_view text) {
  return lex.scan(normalize_for_match(text));
}

inline std::vector<ConceptMatch> tag_utterance(const ConceptLexicon& lex, const Utterance& u) {
  return tag_text(lex, u.text);
}

inline nlohmann::json lexicon_to_json(const ConceptLexicon& lex) {
  nlohmann::json concepts = nlohmann::json::array();
  for (const auto& c : lex.concepts())
    concepts.push_back({{"cui", c.cui}, {"canonical", c.canonical}, {"synonyms", c.synonyms}});
  return {{"concepts", std::move(concepts)}};
}

inline std::vector<Concept> concepts_from_json(const nlohmann::json& j) {
  try {
    std::vector<Concept> out;
    for (const auto& c : j.at("concepts")) {
      out.push_back({c.at("cui").get<std::string>(), c.value("canonical", std::string()),
                     c.at("synonyms").get<std::vector<std::string>>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid lexicon: ") + e.what(), 0);
  }
}

// ---------------------------------------------------------------------------
// Task maps

struct SymptomRef {
  std::string system;
  std::string symptom;
  friend bool operator==(const SymptomRef&, const SymptomRef&) = default;
};

struct TaskLexicon {
  Task task = Task::kDiagnosis;
  std::map<std::string, std::string> diagnosis_map;  // cui -> label
  std::map<std::string, SymptomRef> symptom_map;     // cui -> (system, symptom)

  // Label (diagnosis) or system (ros) a concept votes for.
  std::optional<std::string> label_for(const std::string& cui) const {
    if (task == Task::kDiagnosis) {
      auto it = diagnosis_map.find(cui);
      if (it != diagnosis_map.end()) return it->second;
    } else {
      auto it = symptom_map.find(cui);
      if (it != symptom_map.end()) return it->second.system;
    }
    return std::nullopt;
  }

  bool relevant(const std::string& cui) const { return label_for(cui).has_value(); }

  // Entries mapping to `label` only.
  TaskLexicon restricted_to_label(const std::string& label) const {
    TaskLexicon out{task, {}, {}};
    for (const auto& [cui, l] : diagnosis_map)
      if (l == label) out.diagnosis_map.emplace(cui, l);
    for (const auto& [cui, ref] : symptom_map)
      if (ref.system == label) out.symptom_map.emplace(cui, ref);
    return out;
  }

  // Entries whose label/system is in `space`.
  TaskLexicon restricted_to(const LabelSpace& space) const {
    TaskLexicon out{task, {}, {}};
    for (const auto& [cui, l] : diagnosis_map)
      if (space.index_of(l)) out.diagnosis_map.emplace(cui, l);
    for (const auto& [cui, ref] : symptom_map)
      if (space.index_of(ref.system)) out.symptom_map.emplace(cui, ref);
    return out;
  }

  void validate_against(const LabelSpace& space) const {
    if (space.task != task) throw ConfigError("task map and label space belong to different tasks");
    for (const auto& [cui, l] : diagnosis_map)
      if (!space.index_of(l)) throw ValidationError("task map label \"" + l + "\" not in label space");
    for (const auto& [cui, ref] : symptom_map)
      if (!space.index_of(ref.system)) throw ValidationError("task map system \"" + ref.system + "\" not in label space");
  }
};

inline nlohmann::json to_json(const TaskLexicon& tl) {
  nlohmann::json map = nlohmann::json::array();
  if (tl.task == Task::kDiagnosis) {
    for (const auto& [cui, l] : tl.diagnosis_map) map.push_back({{"cui", cui}, {"label", l}});
  } else {
    for (const auto& [cui, r] : tl.symptom_map)
      map.push_back({{"cui", cui}, {"system", r.system}, {"symptom", r.symptom}});
  }
  return {{"task", to_string(tl.task)}, {"map", std::move(map)}};
}

inline TaskLexicon task_lexicon_from_json(const nlohmann::json& j) {
  try {
    TaskLexicon tl;
    tl.task = parse_task(j.at("task").get<std::string>());
    for (const auto& e : j.at("map")) {
      const auto cui = e.at("cui").get<std::string>();
      if (tl.task == Task::kDiagnosis)
        tl.diagnosis_map[cui] = e.at("label").get<std::string>();
      else
        tl.symptom_map[cui] = {e.at("system").get<std::string>(), e.at("symptom").get<std::string>()};
    }
    return tl;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid task map: ") + e.what(), 0);
  }
}

// Every concept referenced by the task map must exist in the lexicon.
inline void check_task_lexicon(const ConceptLexicon& lex, const TaskLexicon& tl) {
  for (const auto& [cui, l] : tl.diagnosis_map)
    if (!lex.find(cui)) throw ValidationError("task map references unknown cui " + cui);
  for (const auto& [cui, r] : tl.symptom_map)
    if (!lex.find(cui)) throw ValidationError("task map references unknown cui " + cui);
}

// ---------------------------------------------------------------------------
// Entity-matching baseline

// Utterances with at least one task-relevant concept hit, ascending.
inline std::vector<std::size_t> umls_noteworthy(const ConceptLexicon& lex, const TaskLexicon& tl,
                                                const Transcript& t) {
  std::vector<std::size_t> out;
  for (const auto& u : t.utterances) {
    const auto hits = tag_utterance(lex, u);
    if (std::any_of(hits.begin(), hits.end(), [&](const ConceptMatch& m) { return tl.relevant(m.cui); }))
      out.push_back(u.index);
  }
  return out;
}

// Positive for a label iff some utterance mentions a concept mapped to it.
inline std::vector<std::uint8_t> entity_baseline_predict(const ConceptLexicon& lex, const TaskLexicon& tl,
                                                         const Transcript& t, const LabelSpace& space) {
  if (tl.task != space.task) throw ConfigError("task map and label space belong to different tasks");
  std::vector<std::uint8_t> out(space.size(), 0);
  for (const auto& u : t.utterances) {
    for (const auto& m : tag_utterance(lex, u)) {
      if (auto label = tl.label_for(m.cui))
        if (auto ix = space.index_of(*label)) out[*ix] = 1;
    }
  }
  return out;
}

}  // namespace noteworthy
