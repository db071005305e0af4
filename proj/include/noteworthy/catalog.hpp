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
#include <string>
#include <utility>
#include <vector>

#include "noteworthy/annotation.hpp"
#include "noteworthy/concept_matcher.hpp"

namespace noteworthy {

// Demonstration concept catalog. Identifiers (DX###, SY###, RX###) are
// illustrative placeholders, not real terminology codes.

struct DiagnosisSpec {
  std::string label;
  std::string cui;
  std::vector<std::string> synonyms;
  std::vector<std::string> variants;  // problem-tag spellings that merge into `label`
};

struct SymptomSpec {
  std::string cui;
  std::string name;
  std::vector<std::string> synonyms;
};

struct SystemSpec {
  std::string system;
  std::vector<SymptomSpec> symptoms;
};

struct DrugSpec {
  std::string cui;
  std::string name;
  std::vector<std::string> synonyms;
};

inline const std::vector<DiagnosisSpec>& demo_diagnoses() {
  static const std::vector<DiagnosisSpec> v = {
      {"atrial fibrillation", "DX001", {"afib", "irregular heartbeat"}, {"paroxysmal atrial fibrillation", "atrial fibrillation (persistent)"}},
      {"hypertension", "DX002", {"high blood pressure", "elevated blood pressure"}, {"essential hypertension", "systolic hypertension"}},
      {"diabetes", "DX003", {"high blood sugar", "sugar disease"}, {"type 2 diabetes", "diabetes (insulin dependent)"}},
      {"hypercholesterolemia", "DX004", {"high cholesterol", "elevated cholesterol"}, {"familial hypercholesterolemia"}},
      {"heart failure", "DX005", {"chf", "weak heart pump"}, {"congestive heart failure", "diastolic heart failure"}},
      {"myocardial infarction", "DX006", {"heart attack", "cardiac infarct"}, {"old myocardial infarction"}},
      {"coronary arteriosclerosis", "DX007", {"coronary artery disease", "cad"}, {"coronary arteriosclerosis (native vessel)"}},
      {"chronic obstructive lung disease", "DX008", {"copd", "emphysema"}, {"severe chronic obstructive lung disease"}},
      {"dyspnea", "DX009", {"shortness of breath", "breathlessness"}, {"exertional dyspnea"}},
      {"depression", "DX010", {"low mood", "major depressive disorder"}, {"recurrent depression"}},
      {"asthma", "DX011", {"reactive airway disease", "bronchial hyperreactivity"}, {"asthma (mild intermittent)"}},
      {"cardiomyopathy", "DX012", {"enlarged heart", "heart muscle disease"}, {"dilated cardiomyopathy", "ischemic cardiomyopathy"}},
      {"heart disease", "DX013", {"cardiac disease", "heart trouble"}, {"valvular heart disease"}},
      {"arthritis", "DX014", {"joint inflammation", "arthritic joints"}, {"osteoarthritis", "rheumatoid arthritis"}},
      {"sleep apnea", "DX015", {"osa", "sleep disordered breathing"}, {"obstructive sleep apnea"}},
  };
  return v;
}

// Problem tags outside the label space: they reach the tag counts but stay
// below the label cut.
inline const std::vector<std::string>& demo_extra_problem_tags() {
  static const std::vector<std::string> v = {"obesity", "anemia", "gout", "hypothyroidism", "insomnia"};
  return v;
}

inline const std::vector<SystemSpec>& demo_systems() {
  static const std::vector<SystemSpec> v = {
      {"cardiovascular",
       {{"SY001", "chest pain", {"chest discomfort", "chest tightness"}},
        {"SY002", "palpitations", {"racing heart", "heart fluttering"}},
        {"SY003", "leg swelling", {"ankle swelling", "edema"}}}},
      {"musculoskeletal",
       {{"SY004", "joint pain", {"arthralgia", "achy joints"}},
        {"SY005", "back pain", {"lumbago", "sore back"}},
        {"SY006", "muscle pain", {"myalgia", "sore muscles"}}}},
      {"respiratory",
       {{"SY007", "cough", {"coughing spells", "hacking"}}, {"SY008", "wheezing", {"whistling breath", "wheeze"}}}},
      {"gastrointestinal",
       {{"SY009", "nausea", {"queasiness", "upset stomach"}},
        {"SY010", "abdominal pain", {"stomach ache", "belly pain"}},
        {"SY011", "heartburn", {"acid reflux", "indigestion"}}}},
      {"head", {{"SY012", "headache", {"head pain", "migraine"}}}},
      {"neurologic",
       {{"SY013", "dizziness", {"vertigo", "lightheadedness"}}, {"SY014", "numbness", {"tingling", "pins and needles"}}}},
      {"skin", {{"SY015", "rash", {"skin eruption", "hives"}}, {"SY016", "itching", {"pruritus", "itchy skin"}}}},
      {"endocrine", {{"SY017", "excessive thirst", {"polydipsia", "always thirsty"}}}},
      {"hematologic", {{"SY018", "easy bruising", {"bruises easily", "purpura"}}}},
  };
  return v;
}

inline const std::vector<DrugSpec>& demo_drugs() {
  static const std::vector<DrugSpec> v = {
      {"RX001", "aspirin", {"acetylsalicylic acid"}},
      {"RX002", "metformin", {"glucophage"}},
      {"RX003", "lisinopril", {"zestril"}},
      {"RX004", "atorvastatin", {"lipitor"}},
      {"RX005", "warfarin", {"coumadin"}},
  };
  return v;
}

// Concepts with or without their synonym lists (the canonical name is
// always a surface form).
inline std::vector<Concept> demo_concepts(bool with_synonyms = true) {
  std::vector<Concept> out;
  auto syn = [&](const std::vector<std::string>& s) { return with_synonyms ? s : std::vector<std::string>{}; };
  for (const auto& d : demo_diagnoses()) out.push_back({d.cui, d.label, syn(d.synonyms)});
  for (const auto& s : demo_systems())
    for (const auto& sym : s.symptoms) out.push_back({sym.cui, sym.name, syn(sym.synonyms)});
  for (const auto& d : demo_drugs()) out.push_back({d.cui, d.name, syn(d.synonyms)});
  return out;
}

inline ConceptLexicon demo_lexicon(bool with_synonyms = true) { return build_lexicon(demo_concepts(with_synonyms)); }

inline TaskLexicon demo_task_lexicon(Task task) {
  TaskLexicon tl{task, {}, {}};
  if (task == Task::kDiagnosis) {
    for (const auto& d : demo_diagnoses()) tl.diagnosis_map.emplace(d.cui, d.label);
  } else {
    for (const auto& s : demo_systems())
      for (const auto& sym : s.symptoms) tl.symptom_map.emplace(sym.cui, SymptomRef{s.system, sym.name});
  }
  return tl;
}

// ---------------------------------------------------------------------------
// Reference label statistics of the original clinical dataset

struct LabelStat {
  std::string label;
  double value;
};

// Test-split prevalence per diagnosis.
inline const std::vector<LabelStat>& reference_diagnosis_prevalence() {
  static const std::vector<LabelStat> v = {
      {"atrial fibrillation", 0.2568}, {"hypertension", 0.2027},
      {"diabetes", 0.1959},            {"hypercholesterolemia", 0.1216},
      {"heart failure", 0.1014},       {"myocardial infarction", 0.0861},
      {"coronary arteriosclerosis", 0.0372}, {"chronic obstructive lung disease", 0.0372},
      {"dyspnea", 0.0304},             {"depression", 0.0304},
      {"asthma", 0.0287},              {"cardiomyopathy", 0.0236},
      {"heart disease", 0.0236},       {"arthritis", 0.0220},
      {"sleep apnea", 0.0186},
  };
  return v;
}

// Test-split prevalence per system.
inline const std::vector<LabelStat>& reference_ros_prevalence() {
  static const std::vector<LabelStat> v = {
      {"cardiovascular", 0.3041}, {"musculoskeletal", 0.2010}, {"respiratory", 0.1571},
      {"gastrointestinal", 0.0845}, {"head", 0.0828},          {"neurologic", 0.0574},
      {"skin", 0.0389},
  };
  return v;
}

// Train+validation occurrence counts.
inline const std::vector<LabelStat>& reference_diagnosis_frequency() {
  static const std::vector<LabelStat> v = {
      {"hypertension", 1573}, {"diabetes", 1423}, {"atrial fibrillation", 1335},
      {"hypercholesterolemia", 1023}, {"heart failure", 584}, {"myocardial infarction", 386},
      {"arthritis", 288}, {"cardiomyopathy", 273}, {"coronary arteriosclerosis", 257},
      {"heart disease", 240}, {"chronic obstructive lung disease", 235}, {"dyspnea", 228},
      {"asthma", 188}, {"sleep apnea", 185}, {"depression", 148},
  };
  return v;
}

inline const std::vector<LabelStat>& reference_ros_frequency() {
  static const std::vector<LabelStat> v = {
      {"cardiovascular", 2245}, {"musculoskeletal", 1924}, {"respiratory", 1401}, {"gastrointestinal", 878},
      {"skin", 432},            {"head", 418},             {"neurologic", 385},
  };
  return v;
}

inline constexpr std::size_t kReferenceTrainSize = 5770;
inline constexpr std::size_t kReferenceValidationSize = 500;
inline constexpr std::size_t kReferenceTestSize = 592;

inline LabelSpace space_from_stats(Task task, const std::vector<LabelStat>& stats) {
  LabelSpace s{task, {}, {}};
  for (const auto& [label, value] : stats) {
    s.labels.push_back(label);
    s.train_prevalence.push_back(value);
  }
  return s;
}

// Same labels as `space`, prevalences replaced by `stats` (matched by name).
// Labels missing from `stats` get prevalence 0.
inline LabelSpace with_prevalence(LabelSpace space, const std::vector<LabelStat>& stats) {
  for (std::size_t l = 0; l < space.size(); ++l) {
    space.train_prevalence[l] = 0.0;
    for (const auto& [label, value] : stats)
      if (label == space.labels[l]) space.train_prevalence[l] = value;
  }
  return space;
}

// Ordered array of {"label", "value"}; order carries ranking information.
inline nlohmann::json to_json(const std::vector<LabelStat>& stats) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [label, value] : stats) j.push_back({{"label", label}, {"value", value}});
  return j;
}

// Accepts the array form above or a plain {label: value} object.
inline std::vector<LabelStat> label_stats_from_json(const nlohmann::json& j) {
  std::vector<LabelStat> out;
  try {
    if (j.is_array()) {
      for (const auto& e : j) out.push_back({e.at("label").get<std::string>(), e.at("value").get<double>()});
    } else if (j.is_object()) {
      for (const auto& [k, v] : j.items()) out.push_back({k, v.get<double>()});
    } else {
      throw ParseError("label statistics must be an array or an object", 0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid label statistics: ") + e.what(), 0);
  }
  return out;
}

}  // namespace noteworthy
