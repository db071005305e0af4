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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/annotation.hpp"
#include "noteworthy/catalog.hpp"
#include "noteworthy/error.hpp"
#include "noteworthy/transcript.hpp"
#include "noteworthy/util.hpp"

namespace noteworthy {

struct GenConfig {
  std::uint64_t seed = 0;
  std::size_t n_examples = 200;
  std::vector<LabelStat> diagnosis_prevalence = reference_diagnosis_prevalence();
  std::vector<LabelStat> ros_prevalence = reference_ros_prevalence();
  double extra_tag_rate = 0.004;    // per out-of-space problem tag
  double rare_system_rate = 0.01;   // per catalog system outside ros_prevalence
  double mean_utterances = 215.0;
  double mean_words = 7.0;
  double mean_evidence = 3.85;      // evidence lines per note entry
  double mean_other_entries = 4.0;  // entries unrelated to either task
  double explicit_mention_prob = 0.8;
  double repeat_mention_prob = 0.3;
  double paraphrase_rate = 0.3;
  double distractor_rate = 0.018;         // per filler line
  double history_distractor_rate = 0.065; // per negative diagnosis
  double denial_rate = 0.4;               // per negative system
  double marker_strength = 0.9;
  double marker_noise = 0.02;
  double chief_complaint_rate = 0.2;
  double pmh_hpi_rate = 0.2;
  double tag_variant_rate = 0.05;
  double second_symptom_rate = 0.3;
  double backchannel_rate = 0.12;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    for (const auto& [l, p] : diagnosis_prevalence) prob(p, ("prevalence of " + l).c_str());
    for (const auto& [l, p] : ros_prevalence) prob(p, ("prevalence of " + l).c_str());
    prob(extra_tag_rate, "extra_tag_rate");
    prob(rare_system_rate, "rare_system_rate");
    prob(explicit_mention_prob, "explicit_mention_prob");
    prob(repeat_mention_prob, "repeat_mention_prob");
    prob(paraphrase_rate, "paraphrase_rate");
    prob(distractor_rate, "distractor_rate");
    prob(history_distractor_rate, "history_distractor_rate");
    prob(denial_rate, "denial_rate");
    prob(marker_strength, "marker_strength");
    prob(marker_noise, "marker_noise");
    prob(chief_complaint_rate, "chief_complaint_rate");
    prob(pmh_hpi_rate, "pmh_hpi_rate");
    if (chief_complaint_rate + pmh_hpi_rate > 1.0) throw ConfigError("chief_complaint_rate + pmh_hpi_rate exceeds 1");
    prob(tag_variant_rate, "tag_variant_rate");
    prob(second_symptom_rate, "second_symptom_rate");
    prob(backchannel_rate, "backchannel_rate");
    if (!(mean_utterances > 0.0)) throw ConfigError("mean_utterances must be positive");
    if (!(mean_words > 0.0)) throw ConfigError("mean_words must be positive");
    if (!(mean_evidence >= 1.0)) throw ConfigError("mean_evidence must be at least 1");
    if (!(mean_other_entries >= 0.0)) throw ConfigError("mean_other_entries must be non-negative");
    for (const auto& [l, p] : diagnosis_prevalence) {
      const auto& c = demo_diagnoses();
      if (std::none_of(c.begin(), c.end(), [&](const DiagnosisSpec& d) { return d.label == l; }))
        throw ConfigError("diagnosis \"" + l + "\" is not in the demo catalog");
    }
    for (const auto& [l, p] : ros_prevalence) {
      const auto& c = demo_systems();
      if (std::none_of(c.begin(), c.end(), [&](const SystemSpec& s) { return s.system == l; }))
        throw ConfigError("system \"" + l + "\" is not in the demo catalog");
    }
  }
};

inline nlohmann::json to_json(const GenConfig& c) {
  return {{"seed", c.seed},
          {"n_examples", c.n_examples},
          {"diagnosis_prevalence", to_json(c.diagnosis_prevalence)},
          {"ros_prevalence", to_json(c.ros_prevalence)},
          {"extra_tag_rate", c.extra_tag_rate},
          {"rare_system_rate", c.rare_system_rate},
          {"mean_utterances", c.mean_utterances},
          {"mean_words", c.mean_words},
          {"mean_evidence", c.mean_evidence},
          {"mean_other_entries", c.mean_other_entries},
          {"explicit_mention_prob", c.explicit_mention_prob},
          {"repeat_mention_prob", c.repeat_mention_prob},
          {"paraphrase_rate", c.paraphrase_rate},
          {"distractor_rate", c.distractor_rate},
          {"history_distractor_rate", c.history_distractor_rate},
          {"denial_rate", c.denial_rate},
          {"marker_strength", c.marker_strength},
          {"marker_noise", c.marker_noise},
          {"chief_complaint_rate", c.chief_complaint_rate},
          {"pmh_hpi_rate", c.pmh_hpi_rate},
          {"tag_variant_rate", c.tag_variant_rate},
          {"second_symptom_rate", c.second_symptom_rate},
          {"backchannel_rate", c.backchannel_rate}};
}

// Missing keys keep the values in `base`.
inline GenConfig gen_config_from_json(const nlohmann::json& j, GenConfig base = {}) {
  try {
    base.seed = j.value("seed", base.seed);
    base.n_examples = j.value("n_examples", base.n_examples);
    if (j.contains("diagnosis_prevalence")) base.diagnosis_prevalence = label_stats_from_json(j["diagnosis_prevalence"]);
    if (j.contains("ros_prevalence")) base.ros_prevalence = label_stats_from_json(j["ros_prevalence"]);
#define NOTEWORTHY_GEN_FIELD(name) base.name = j.value(#name, base.name)
    NOTEWORTHY_GEN_FIELD(extra_tag_rate);
    NOTEWORTHY_GEN_FIELD(rare_system_rate);
    NOTEWORTHY_GEN_FIELD(mean_utterances);
    NOTEWORTHY_GEN_FIELD(mean_words);
    NOTEWORTHY_GEN_FIELD(mean_evidence);
    NOTEWORTHY_GEN_FIELD(mean_other_entries);
    NOTEWORTHY_GEN_FIELD(explicit_mention_prob);
    NOTEWORTHY_GEN_FIELD(repeat_mention_prob);
    NOTEWORTHY_GEN_FIELD(paraphrase_rate);
    NOTEWORTHY_GEN_FIELD(distractor_rate);
    NOTEWORTHY_GEN_FIELD(history_distractor_rate);
    NOTEWORTHY_GEN_FIELD(denial_rate);
    NOTEWORTHY_GEN_FIELD(marker_strength);
    NOTEWORTHY_GEN_FIELD(marker_noise);
    NOTEWORTHY_GEN_FIELD(chief_complaint_rate);
    NOTEWORTHY_GEN_FIELD(pmh_hpi_rate);
    NOTEWORTHY_GEN_FIELD(tag_variant_rate);
    NOTEWORTHY_GEN_FIELD(second_symptom_rate);
    NOTEWORTHY_GEN_FIELD(backchannel_rate);
#undef NOTEWORTHY_GEN_FIELD
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid generator config: ") + e.what());
  }
  base.validate();
  return base;
}

// ---------------------------------------------------------------------------
// Closed word lists. None of these words occurs in the demo lexicon.

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> v = {
      "so",     "well",   "the",     "a",      "we",     "you",    "i",      "think",   "going",  "to",
      "about",  "that",   "it",      "is",     "was",    "just",   "know",   "like",    "maybe",  "week",
      "morning", "today", "weather", "car",    "work",   "kids",   "weekend", "drive",  "traffic", "dinner",
      "yesterday", "last", "next",   "time",   "things", "good",   "fine",   "really",  "pretty", "little",
      "bit",    "how",    "doing",   "been",   "have",   "had",    "got",    "get",     "see",    "look",
      "let",    "me",     "talk",    "tell",   "said",   "say",    "again",  "still",   "also",   "then",
      "now",    "when",   "what",    "where",  "there",  "here",   "they",   "them",    "our",    "your",
      "my",     "this",   "those",   "some",   "any",    "more",   "most",   "year",    "month",  "day",
      "night",  "home",   "family",  "daughter", "son",  "wife",   "husband", "garden", "dog",    "walk",
      "store",  "church", "phone",   "call",   "email",  "office", "visit",  "plans",   "trip",   "lunch",
      "coffee", "tea",    "water",   "game",   "news",   "summer", "winter", "rain",    "sister", "brother"};
  return v;
}

inline const std::vector<std::string>& backchannels() {
  static const std::vector<std::string> v = {"Okay.", "Mm-hmm.", "Yeah.", "Right.", "Uh-huh.", "Sure.", "Got it."};
  return v;
}

enum class MarkerKind { kDiagnosis, kRos, kOther };

inline const std::vector<std::string>& marker_words(MarkerKind k) {
  static const std::vector<std::string> diag = {"diagnosed", "condition", "treatment", "longstanding", "managed", "followup"};
  static const std::vector<std::string> ros = {"experiencing", "lately", "noticed", "episodes", "symptoms", "bothering"};
  static const std::vector<std::string> other = {"pharmacy", "refill", "exercise", "smoking", "dose", "schedule", "appointment"};
  switch (k) {
    case MarkerKind::kDiagnosis: return diag;
    case MarkerKind::kRos: return ros;
    case MarkerKind::kOther: return other;
  }
  return other;
}

// ---------------------------------------------------------------------------
// Corpus

struct MentionRecord {
  std::size_t utterance = 0;
  std::string cui;
  std::string surface;
  bool evidence = false;  // false: distractor in a filler line
};

struct OracleRecord {
  std::string id;
  std::vector<std::string> diagnoses;    // planted, in-space
  std::vector<std::string> ros_systems;  // planted confirmed, in-space
  std::vector<std::string> rare_systems;
  std::vector<std::string> extra_tags;
  std::vector<std::size_t> noteworthy;             // every evidence line
  std::vector<std::size_t> diagnosis_noteworthy;   // evidence of planted-diagnosis entries
  std::vector<std::size_t> ros_noteworthy;         // evidence of confirmed in-space system entries
  std::vector<MentionRecord> mentions;
};

inline nlohmann::json to_json(const OracleRecord& r) {
  nlohmann::json mentions = nlohmann::json::array();
  for (const auto& m : r.mentions)
    mentions.push_back({{"utterance", m.utterance}, {"cui", m.cui}, {"surface", m.surface}, {"evidence", m.evidence}});
  return {{"id", r.id},
          {"diagnoses", r.diagnoses},
          {"ros_systems", r.ros_systems},
          {"rare_systems", r.rare_systems},
          {"extra_tags", r.extra_tags},
          {"noteworthy", r.noteworthy},
          {"diagnosis_noteworthy", r.diagnosis_noteworthy},
          {"ros_noteworthy", r.ros_noteworthy},
          {"mentions", std::move(mentions)}};
}

struct SynthCorpus {
  GenConfig config;
  std::vector<Example> examples;
  LabelMatrix diagnosis;  // planted rows over config.diagnosis_prevalence order
  LabelMatrix ros;
  std::vector<OracleRecord> oracle;

  std::vector<Transcript> transcripts() const {
    std::vector<Transcript> out;
    out.reserve(examples.size());
    for (const auto& e : examples) out.push_back(e.transcript);
    return out;
  }
  std::vector<SoapNote> notes() const {
    std::vector<SoapNote> out;
    out.reserve(examples.size());
    for (const auto& e : examples) out.push_back(e.note);
    return out;
  }
  const LabelMatrix& labels(Task t) const { return t == Task::kDiagnosis ? diagnosis : ros; }
};

namespace detail {

// 1 + Binomial(m, (mean - 1) / m) with m = ceil(2 (mean - 1)): mean exactly
// `mean`, never below 1.
inline std::size_t count_with_mean(Rng& rng, double mean) {
  const double extra = mean - 1.0;
  if (extra <= 0.0) return 1;
  const auto trials = static_cast<std::size_t>(std::ceil(2.0 * extra));
  const double p = extra / static_cast<double>(trials);
  std::size_t n = 1;
  for (std::size_t i = 0; i < trials; ++i) n += rng.bernoulli(p) ? 1 : 0;
  return n;
}

struct LinePlan {
  MarkerKind marker = MarkerKind::kOther;
  std::optional<std::pair<std::string, std::string>> mention;  // (cui, surface)
  std::string plain;  // words inserted verbatim (out-of-lexicon tags)
};

struct EntryPlan {
  NoteEntry entry;
  std::vector<LinePlan> lines;
  enum class Role { kDiagnosis, kRos, kOther } role = Role::kOther;
};

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

class ExampleBuilder {
 public:
  ExampleBuilder(const GenConfig& cfg, std::size_t index)
      : cfg_(cfg), rng_(splitmix64(cfg.seed ^ splitmix64(index + 1))) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "synth-%06zu", index);
    id_ = buf;
  }

  std::pair<Example, OracleRecord> build() {
    OracleRecord rec;
    rec.id = id_;
    std::vector<EntryPlan> plans;
    std::set<std::string> planted_dx, planted_sys;

    for (const auto& [label, p] : cfg_.diagnosis_prevalence)
      if (rng_.bernoulli(p)) planted_dx.insert(label);
    for (const auto& [system, p] : cfg_.ros_prevalence)
      if (rng_.bernoulli(p)) planted_sys.insert(system);

    for (const auto& d : demo_diagnoses()) {
      const bool in_space = in_dx_space(d.label);
      if (in_space && planted_dx.count(d.label)) {
        rec.diagnoses.push_back(d.label);
        plans.push_back(diagnosis_entry(d));
      } else if (rng_.bernoulli(cfg_.history_distractor_rate)) {
        plans.push_back(history_entry(d));
      }
    }
    for (const auto& tag : demo_extra_problem_tags()) {
      if (!rng_.bernoulli(cfg_.extra_tag_rate)) continue;
      rec.extra_tags.push_back(tag);
      plans.push_back(extra_tag_entry(tag));
    }
    for (const auto& s : demo_systems()) {
      const bool in_space = in_ros_space(s.system);
      bool confirmed = false;
      if (in_space) {
        confirmed = planted_sys.count(s.system) > 0;
        if (confirmed) rec.ros_systems.push_back(s.system);
      } else if (rng_.bernoulli(cfg_.rare_system_rate)) {
        confirmed = true;
        rec.rare_systems.push_back(s.system);
      }
      if (confirmed)
        plans.push_back(ros_entry(s, RosResult::kConfirms));
      else if (rng_.bernoulli(cfg_.denial_rate))
        plans.push_back(ros_entry(s, RosResult::kDenies));
    }
    const auto n_other = static_cast<std::size_t>(std::max<std::int64_t>(0, rng_.around(cfg_.mean_other_entries, 1)));
    for (std::size_t i = 0; i < n_other; ++i) plans.push_back(other_entry());

    std::size_t evidence_total = 0;
    for (const auto& p : plans) evidence_total += p.lines.size();
    const auto spread = static_cast<std::int64_t>(cfg_.mean_utterances / 3.0);
    const auto n_utt = static_cast<std::size_t>(std::max<std::int64_t>(1, rng_.around(cfg_.mean_utterances, spread)));
    if (evidence_total > n_utt)
      throw GenerationError(id_ + ": " + std::to_string(evidence_total) + " evidence lines exceed " +
                            std::to_string(n_utt) + " utterances");

    std::vector<std::size_t> slots(n_utt);
    for (std::size_t i = 0; i < n_utt; ++i) slots[i] = i;
    rng_.shuffle(slots);
    std::vector<const LinePlan*> line_of(n_utt, nullptr);
    std::size_t next = 0;
    std::set<std::size_t> all, dx, ros;
    for (auto& p : plans) {
      for (const auto& line : p.lines) {
        const auto slot = slots[next++];
        line_of[slot] = &line;
        p.entry.evidence.push_back(slot);
        all.insert(slot);
        if (p.role == EntryPlan::Role::kDiagnosis) dx.insert(slot);
        if (p.role == EntryPlan::Role::kRos) ros.insert(slot);
      }
      std::sort(p.entry.evidence.begin(), p.entry.evidence.end());
    }
    rec.noteworthy.assign(all.begin(), all.end());
    rec.diagnosis_noteworthy.assign(dx.begin(), dx.end());
    rec.ros_noteworthy.assign(ros.begin(), ros.end());

    Example ex;
    ex.transcript.id = id_;
    ex.note.transcript_id = id_;
    std::int64_t clock = 0;
    Speaker speaker = Speaker::kPhysician;
    for (std::size_t i = 0; i < n_utt; ++i) {
      if (i > 0) {
        if (rng_.bernoulli(0.01))
          speaker = Speaker::kOther;
        else if (speaker == Speaker::kOther || rng_.bernoulli(0.85))
          speaker = speaker == Speaker::kPhysician ? Speaker::kPatient : Speaker::kPhysician;
      }
      ex.transcript.utterances.push_back({i, speaker, clock, utterance_text(i, line_of[i], planted_dx, planted_sys, rec)});
      clock += rng_.uniform_int(800, 6000);
    }
    for (auto& p : plans) ex.note.entries.push_back(std::move(p.entry));
    std::sort(rec.mentions.begin(), rec.mentions.end(),
              [](const MentionRecord& a, const MentionRecord& b) { return a.utterance < b.utterance; });
    return {std::move(ex), std::move(rec)};
  }

 private:
  bool in_dx_space(const std::string& label) const {
    return std::any_of(cfg_.diagnosis_prevalence.begin(), cfg_.diagnosis_prevalence.end(),
                       [&](const LabelStat& s) { return s.label == label; });
  }
  bool in_ros_space(const std::string& system) const {
    return std::any_of(cfg_.ros_prevalence.begin(), cfg_.ros_prevalence.end(),
                       [&](const LabelStat& s) { return s.label == system; });
  }

  std::string surface(const std::string& canonical, const std::vector<std::string>& synonyms) {
    if (!synonyms.empty() && rng_.bernoulli(cfg_.paraphrase_rate)) return rng_.pick(synonyms);
    return canonical;
  }

  // Evidence lines; the first carries the mention with explicit_mention_prob,
  // later ones with repeat_mention_prob after that.
  std::vector<LinePlan> mention_lines(MarkerKind marker, const std::string& cui, const std::string& canonical,
                                      const std::vector<std::string>& synonyms, std::size_t min_lines = 1) {
    std::vector<LinePlan> lines(std::max(min_lines, count_with_mean(rng_, cfg_.mean_evidence)));
    for (auto& l : lines) l.marker = marker;
    if (rng_.bernoulli(cfg_.explicit_mention_prob)) {
      lines[0].mention = {{cui, surface(canonical, synonyms)}};
      for (std::size_t i = 1; i < lines.size(); ++i)
        if (rng_.bernoulli(cfg_.repeat_mention_prob)) lines[i].mention = {{cui, surface(canonical, synonyms)}};
    }
    return lines;
  }

  EntryPlan diagnosis_entry(const DiagnosisSpec& d) {
    EntryPlan p;
    p.role = EntryPlan::Role::kDiagnosis;
    const double u = rng_.uniform();
    if (u < cfg_.chief_complaint_rate) {
      p.entry.subsection = Subsection::kChiefComplaint;
    } else if (u < cfg_.chief_complaint_rate + cfg_.pmh_hpi_rate) {
      p.entry.subsection = Subsection::kPastMedicalHistory;
      p.entry.tags.push_back({std::string(kContextTagKey), std::string(kHpiTagValue)});
    } else {
      p.entry.subsection = Subsection::kAssessment;
    }
    const std::string tag =
        !d.variants.empty() && rng_.bernoulli(cfg_.tag_variant_rate) ? rng_.pick(d.variants) : d.label;
    p.entry.tags.insert(p.entry.tags.begin(), Tag{std::string(kProblemTagKey), tag});
    p.entry.text = capitalize(tag) + ".";
    p.lines = mention_lines(MarkerKind::kDiagnosis, d.cui, d.label, d.synonyms);
    return p;
  }

  // Past history without the HPI marker: no diagnosis label.
  EntryPlan history_entry(const DiagnosisSpec& d) {
    EntryPlan p;
    p.entry.subsection = Subsection::kPastMedicalHistory;
    p.entry.tags.push_back({std::string(kProblemTagKey), d.label});
    p.entry.text = "History of " + d.label + ".";
    p.lines = mention_lines(MarkerKind::kDiagnosis, d.cui, d.label, d.synonyms);
    return p;
  }

  EntryPlan extra_tag_entry(const std::string& tag) {
    EntryPlan p;
    p.entry.subsection = Subsection::kAssessment;
    p.entry.tags.push_back({std::string(kProblemTagKey), tag});
    p.entry.text = capitalize(tag) + ".";
    p.lines.resize(count_with_mean(rng_, cfg_.mean_evidence));
    for (auto& l : p.lines) l.marker = MarkerKind::kDiagnosis;
    p.lines[0].plain = tag;
    return p;
  }

  EntryPlan ros_entry(const SystemSpec& s, RosResult result) {
    EntryPlan p;
    p.role = result == RosResult::kConfirms && in_ros_space(s.system) ? EntryPlan::Role::kRos : EntryPlan::Role::kOther;
    p.entry.subsection = Subsection::kReviewOfSystems;
    std::vector<std::size_t> picks(s.symptoms.size());
    for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
    rng_.shuffle(picks);
    const std::size_t n_sym = std::min<std::size_t>(picks.size(), rng_.bernoulli(cfg_.second_symptom_rate) ? 2 : 1);
    p.lines.resize(std::max(n_sym, count_with_mean(rng_, cfg_.mean_evidence)));
    for (auto& l : p.lines) l.marker = MarkerKind::kRos;
    const bool mention = rng_.bernoulli(cfg_.explicit_mention_prob);
    std::string text = result == RosResult::kConfirms ? "Confirms " : "Denies ";
    for (std::size_t k = 0; k < n_sym; ++k) {
      const auto& sym = s.symptoms[picks[k]];
      p.entry.ros.push_back({s.system, sym.name, result});
      if (mention) p.lines[k].mention = {{sym.cui, surface(sym.name, sym.synonyms)}};
      text += (k ? " and " : "") + sym.name;
    }
    p.entry.text = text + ".";
    return p;
  }

  EntryPlan other_entry() {
    static const std::vector<Subsection> kinds = {Subsection::kMedications, Subsection::kPlan,
                                                  Subsection::kSocialHistory, Subsection::kPhysicalExam,
                                                  Subsection::kLabResults, Subsection::kFamilyHistory,
                                                  Subsection::kPastSurgicalHistory};
    EntryPlan p;
    p.entry.subsection = rng_.pick(kinds);
    if (p.entry.subsection == Subsection::kMedications) {
      const auto& drug = rng_.pick(demo_drugs());
      p.entry.tags.push_back({"medication", drug.name});
      p.entry.text = "Take " + drug.name + " daily.";
      p.lines = mention_lines(MarkerKind::kOther, drug.cui, drug.name, drug.synonyms);
      return p;
    }
    switch (p.entry.subsection) {
      case Subsection::kPlan: p.entry.text = "Follow up in three months."; break;
      case Subsection::kSocialHistory: p.entry.text = "Walks daily."; break;
      case Subsection::kPhysicalExam: p.entry.text = "Lungs clear to auscultation."; break;
      case Subsection::kLabResults: p.entry.text = "Labs reviewed."; break;
      case Subsection::kFamilyHistory: p.entry.text = "Family history reviewed."; break;
      default: p.entry.text = "Prior surgery noted."; break;
    }
    p.lines.resize(count_with_mean(rng_, cfg_.mean_evidence));
    for (auto& l : p.lines) l.marker = MarkerKind::kOther;
    return p;
  }

  std::pair<std::string, std::string> distractor(const std::set<std::string>& dx, const std::set<std::string>& sys) {
    std::vector<std::pair<std::string, std::string>> pool;
    for (const auto& d : demo_diagnoses())
      if (!dx.count(d.label)) pool.push_back({d.cui, surface(d.label, d.synonyms)});
    for (const auto& s : demo_systems())
      if (!sys.count(s.system))
        for (const auto& sym : s.symptoms) pool.push_back({sym.cui, surface(sym.name, sym.synonyms)});
    return rng_.pick(pool);
  }

  std::string utterance_text(std::size_t index, const LinePlan* plan, const std::set<std::string>& dx,
                             const std::set<std::string>& sys, OracleRecord& rec) {
    if (!plan && rng_.bernoulli(cfg_.backchannel_rate)) return rng_.pick(backchannels());
    const auto n_words = static_cast<std::size_t>(std::max<std::int64_t>(1, rng_.around(cfg_.mean_words, 3)));
    std::vector<std::string> words;
    words.reserve(n_words + 4);
    for (std::size_t i = 0; i < n_words; ++i) words.push_back(rng_.pick(filler_words()));
    auto insert = [&](std::string phrase) { words.insert(words.begin() + rng_.index(words.size() + 1), std::move(phrase)); };
    if (plan) {
      if (rng_.bernoulli(cfg_.marker_strength)) {
        insert(rng_.pick(marker_words(plan->marker)));
        insert(rng_.pick(marker_words(plan->marker)));
      }
      if (!plan->plain.empty()) insert(plan->plain);
      if (plan->mention) {
        insert(plan->mention->second);
        rec.mentions.push_back({index, plan->mention->first, plan->mention->second, true});
      }
    } else {
      if (rng_.bernoulli(cfg_.marker_noise))
        insert(rng_.pick(marker_words(static_cast<MarkerKind>(rng_.index(3)))));
      if (rng_.bernoulli(cfg_.distractor_rate)) {
        auto [cui, text] = distractor(dx, sys);
        insert(text);
        rec.mentions.push_back({index, cui, text, false});
      }
    }
    std::string out;
    for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
    return capitalize(out) + ".";
  }

  const GenConfig& cfg_;
  Rng rng_;
  std::string id_;
};

}  // namespace detail

// Example i depends only on (seed, i): a smaller corpus is a prefix of a
// larger one with the same seed.
inline SynthCorpus generate(const GenConfig& cfg) {
  cfg.validate();
  SynthCorpus c;
  c.config = cfg;
  c.diagnosis = LabelMatrix{{}, space_from_stats(Task::kDiagnosis, cfg.diagnosis_prevalence), {}};
  c.ros = LabelMatrix{{}, space_from_stats(Task::kRos, cfg.ros_prevalence), {}};
  c.examples.reserve(cfg.n_examples);
  c.oracle.reserve(cfg.n_examples);
  for (std::size_t i = 0; i < cfg.n_examples; ++i) {
    auto [ex, rec] = detail::ExampleBuilder(cfg, i).build();
    for (LabelMatrix* m : {&c.diagnosis, &c.ros}) {
      const auto& planted = m == &c.diagnosis ? rec.diagnoses : rec.ros_systems;
      m->example_ids.push_back(ex.transcript.id);
      for (const auto& l : m->space.labels)
        m->values.push_back(std::find(planted.begin(), planted.end(), l) != planted.end() ? 1 : 0);
    }
    c.examples.push_back(std::move(ex));
    c.oracle.push_back(std::move(rec));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Splits

struct SplitFractions {
  double validation = static_cast<double>(kReferenceValidationSize) /
                      static_cast<double>(kReferenceTrainSize + kReferenceValidationSize + kReferenceTestSize);
  double test = static_cast<double>(kReferenceTestSize) /
                static_cast<double>(kReferenceTrainSize + kReferenceValidationSize + kReferenceTestSize);
};

struct Split {
  std::vector<std::string> train, validation, test;
};

// Seeded shuffle, then test and validation are cut from the front.
inline Split split_ids(std::vector<std::string> ids, std::uint64_t seed, SplitFractions f = {}) {
  if (!(f.validation >= 0.0 && f.test >= 0.0 && f.validation + f.test < 1.0))
    throw ConfigError("split fractions must be non-negative and sum below 1");
  Rng rng(splitmix64(seed ^ 0x5b1170e5ULL));
  rng.shuffle(ids);
  const auto n = static_cast<double>(ids.size());
  const auto n_test = static_cast<std::size_t>(std::llround(f.test * n));
  const auto n_val = static_cast<std::size_t>(std::llround(f.validation * n));
  Split s;
  s.test.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test),
                      ids.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), ids.end());
  for (auto* part : {&s.train, &s.validation, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

inline nlohmann::json to_json(const Split& s) {
  return {{"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

inline Split split_from_json(const nlohmann::json& j) {
  try {
    return {j.at("train").get<std::vector<std::string>>(), j.at("validation").get<std::vector<std::string>>(),
            j.at("test").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid split file: ") + e.what(), 0);
  }
}

// Examples whose transcript id is in `ids`, corpus order.
inline std::vector<Example> subset(std::span<const Example> corpus, std::span<const std::string> ids) {
  const std::set<std::string> keep(ids.begin(), ids.end());
  std::vector<Example> out;
  for (const auto& ex : corpus)
    if (keep.count(ex.transcript.id)) out.push_back(ex);
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct CorpusStats {
  std::size_t examples = 0;
  std::size_t entries = 0;
  double mean_utterances = 0.0;
  double mean_words = 0.0;
  double mean_evidence_per_entry = 0.0;
  Histogram utterance_words{5, {}};      // words per utterance
  Histogram transcript_words{100, {}};   // words per transcript
  Histogram evidence_per_entry{1, {}};
};

inline CorpusStats corpus_stats(std::span<const Example> corpus) {
  CorpusStats s;
  s.examples = corpus.size();
  std::size_t utterances = 0, words = 0, evidence = 0;
  for (const auto& ex : corpus) {
    utterances += ex.transcript.size();
    std::size_t tw = 0;
    for (const auto& u : ex.transcript.utterances) {
      const auto w = word_count(u.text);
      s.utterance_words.add(w);
      tw += w;
    }
    s.transcript_words.add(tw);
    words += tw;
    for (const auto& e : ex.note.entries) {
      ++s.entries;
      evidence += e.evidence.size();
      s.evidence_per_entry.add(e.evidence.size());
    }
  }
  if (s.examples) {
    s.mean_utterances = static_cast<double>(utterances) / static_cast<double>(s.examples);
    s.mean_words = static_cast<double>(words) / static_cast<double>(s.examples);
  }
  if (s.entries) s.mean_evidence_per_entry = static_cast<double>(evidence) / static_cast<double>(s.entries);
  return s;
}

inline nlohmann::json to_json(const CorpusStats& s) {
  return {{"examples", s.examples},
          {"entries", s.entries},
          {"mean_utterances", s.mean_utterances},
          {"mean_words", s.mean_words},
          {"mean_evidence_per_entry", s.mean_evidence_per_entry},
          {"utterance_words", to_json(s.utterance_words)},
          {"transcript_words", to_json(s.transcript_words)},
          {"evidence_per_entry", to_json(s.evidence_per_entry)}};
}

}  // namespace noteworthy
