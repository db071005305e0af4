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

// noteworthy: command-line front end.
//
// Every command that writes files also writes a run manifest next to its
// primary output. Outputs are staged and only renamed into place when the
// command succeeds.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "noteworthy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace noteworthy;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string config_path;
};

json load_config(const Common& c) {
  if (c.config_path.empty()) return json::object();
  auto j = read_json_file(c.config_path);
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  return j;
}

json config_section(const Common& c, const char* key) {
  const auto j = load_config(c);
  return j.contains(key) ? j.at(key) : json::object();
}

// Inputs, outputs and resolved parameters of one command.
class Run {
 public:
  Run(std::string command, const Common& common) {
    manifest_.command = std::move(command);
    manifest_.seed = common.seed;
    if (!common.config_path.empty()) input(common.config_path);
  }

  std::string input(const std::string& path) {
    auto content = read_file(path);
    manifest_.inputs[path] = Fnv1a().update(content).hex();
    return content;
  }

  std::ofstream& output(const fs::path& path) { return outputs_.open(path); }
  void write(const fs::path& path, const std::string& content) { outputs_.write(path, content); }

  json& config() { return manifest_.config; }

  void commit(const fs::path& manifest_path) {
    manifest_.config_hash = config_hash(manifest_.config);
    manifest_.outputs = outputs_.paths();
    manifest_.outputs.push_back(manifest_path.string());
    outputs_.write(manifest_path, to_json(manifest_).dump(2) + "\n");
    outputs_.commit();
  }

 private:
  RunManifest manifest_;
  OutputSet outputs_;
};

fs::path manifest_for(const fs::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

std::vector<Transcript> load_transcripts(Run& run, const std::string& path) {
  std::istringstream in(run.input(path));
  return read_transcripts(in);
}

std::vector<SoapNote> load_notes(Run& run, const std::string& path) {
  std::istringstream in(run.input(path));
  return read_notes(in);
}

LabelMatrix load_labels(Run& run, const std::string& path) {
  std::istringstream in(run.input(path));
  return read_label_matrix(in);
}

json load_json(Run& run, const std::string& path) {
  const auto content = run.input(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

std::optional<Split> load_split(Run& run, const std::string& path) {
  if (path.empty()) return std::nullopt;
  try {
    return split_from_json(load_json(run, path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

// Ids of one split part; empty optional means everything.
std::optional<std::set<std::string>> part_ids(const std::optional<Split>& split, const std::string& part) {
  if (!split || part == "all") return std::nullopt;
  const std::vector<std::string>* v = nullptr;
  if (part == "train") v = &split->train;
  else if (part == "validation") v = &split->validation;
  else if (part == "test") v = &split->test;
  else if (part == "fit") {
    std::set<std::string> out(split->train.begin(), split->train.end());
    out.insert(split->validation.begin(), split->validation.end());
    return out;
  } else {
    throw ConfigError("unknown split part \"" + part + "\" (expected train, validation, test, fit or all)");
  }
  return std::set<std::string>(v->begin(), v->end());
}

template <typename T>
std::vector<T> restrict_to(const std::vector<T>& items, const std::optional<std::set<std::string>>& ids) {
  if (!ids) return items;
  std::vector<T> out;
  for (const auto& x : items) {
    const std::string& id = [&]() -> const std::string& {
      if constexpr (std::is_same_v<T, Example>)
        return x.transcript.id;
      else
        return x.id;
    }();
    if (ids->count(id)) out.push_back(x);
  }
  return out;
}

// Lexicon and task map, built-in demo data when no path is given.
struct LexiconInputs {
  std::string lexicon;
  std::string task_map;
};

struct LoadedLexicon {
  ConceptLexicon lexicon;
  TaskLexicon task_map;
};

LoadedLexicon load_lexicon(Run& run, const LexiconInputs& in, Task task) {
  LoadedLexicon out{in.lexicon.empty() ? demo_lexicon() : build_lexicon(concepts_from_json(load_json(run, in.lexicon))),
                    in.task_map.empty() ? demo_task_lexicon(task) : task_lexicon_from_json(load_json(run, in.task_map))};
  if (out.task_map.task != task) throw ConfigError("task map belongs to a different task");
  check_task_lexicon(out.lexicon, out.task_map);
  return out;
}

// Ground-truth selections from notes. Task scopes use labelers fit on `fit`.
std::map<std::string, std::vector<std::size_t>> oracle_selections(std::span<const Example> corpus,
                                                                  std::span<const Example> fit,
                                                                  NoteworthyScope scope, std::size_t label_count,
                                                                  double min_rate) {
  std::vector<std::vector<std::uint8_t>> targets;
  if (scope == NoteworthyScope::kAll) {
    targets = all_noteworthy_targets(corpus);
  } else if (scope == NoteworthyScope::kDiagnosis) {
    targets = task_noteworthy_targets(corpus, DiagnosisLabeler::fit(fit, label_count));
  } else {
    targets = task_noteworthy_targets(corpus, RosLabeler::fit(fit, min_rate));
  }
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) out[corpus[i].transcript.id] = indices_of(targets[i]);
  return out;
}

// Everything a filter strategy may consume.
struct ContextOptions {
  LexiconInputs lexicon;
  std::string filter_model;
  std::string notes;
  std::size_t label_count = 15;
  double min_rate = kDefaultRosMinRate;
};

struct LoadedContext {
  std::optional<LoadedLexicon> lexicon;
  std::optional<FilterModel> model;
  std::map<std::string, std::vector<std::size_t>> oracle;
  FilterContext ctx;
};

std::unique_ptr<LoadedContext> load_context(Run& run, const ContextOptions& o, const FilterStrategy& s, Task task,
                                            std::span<const Transcript> transcripts,
                                            const std::optional<Split>& split) {
  auto out = std::make_unique<LoadedContext>();
  if (s.needs_lexicon()) {
    out->lexicon = load_lexicon(run, o.lexicon, task);
    out->ctx.lexicon = &out->lexicon->lexicon;
    out->ctx.task_lexicon = &out->lexicon->task_map;
  }
  if (s.needs_model()) {
    if (o.filter_model.empty()) throw ConfigError("strategy " + to_string(s) + " needs --filter-model");
    out->model = filter_model_from_json(load_json(run, o.filter_model));
    out->ctx.model = &*out->model;
  }
  if (s.kind == FilterStrategy::Kind::kOracle) {
    if (o.notes.empty()) throw ConfigError("oracle strategies need --notes");
    const auto corpus = join_corpus({transcripts.begin(), transcripts.end()}, load_notes(run, o.notes));
    const auto fit = restrict_to(corpus, part_ids(split, "fit"));
    out->oracle = oracle_selections(corpus, fit, s.scope, o.label_count, o.min_rate);
    out->ctx.oracle = [m = &out->oracle](const Transcript& t) {
      auto it = m->find(t.id);
      if (it == m->end()) throw ValidationError("no note for transcript " + t.id);
      return it->second;
    };
  }
  return out;
}

void add_context_options(CLI::App* cmd, ContextOptions& o) {
  cmd->add_option("--lexicon", o.lexicon.lexicon, "Concept lexicon JSON (default: built-in demo lexicon)");
  cmd->add_option("--task-map", o.lexicon.task_map, "Task map JSON (default: built-in demo map for the task)");
  cmd->add_option("--filter-model", o.filter_model, "Filter model from train-filter (pred, union and f2k strategies)");
  cmd->add_option("--notes", o.notes, "Notes JSONL supplying ground truth for oracle strategies");
  cmd->add_option("--label-count", o.label_count, "Diagnosis labels for oracle targets");
  cmd->add_option("--min-rate", o.min_rate, "RoS minimum positive rate for oracle targets");
}

const char* kStrategyHelp =
    "Filter strategy: none, umls, pred:<scope>[@t], union:umls+pred:<scope>[@t], "
    "f2k:umls+pred:<scope>[@K=k], oracle:<scope>, or AN/DN/RN, UMLS+DN, UMLS+F2K-DN, ORACLE-DN. "
    "Scopes all/diagnosis/ros. Thresholds default to the filter model's (0.4/0.1/0.02); K defaults to 50/15/20";

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Commands

struct SynthOptions {
  std::size_t n = 200;
  std::string out;
  double validation = SplitFractions{}.validation;
  double test = SplitFractions{}.test;
};

void cmd_synth(const Common& common, const SynthOptions& o) {
  Run run("synth", common);
  auto cfg = gen_config_from_json(config_section(common, "synth"));
  cfg.seed = common.seed;
  cfg.n_examples = o.n;
  const auto corpus = generate(cfg);
  std::vector<std::string> ids;
  for (const auto& e : corpus.examples) ids.push_back(e.transcript.id);
  const auto split = split_ids(ids, common.seed, {o.validation, o.test});

  const fs::path dir(o.out);
  const auto transcripts = corpus.transcripts();
  write_transcripts(run.output(dir / "transcripts.jsonl"), transcripts);
  const auto notes = corpus.notes();
  write_notes(run.output(dir / "notes.jsonl"), notes);
  auto& oracle = run.output(dir / "oracle.jsonl");
  for (const auto& r : corpus.oracle) oracle << to_json(r).dump() << '\n';
  write_label_matrix(run.output(dir / "truth_diagnosis.jsonl"), corpus.diagnosis, {{"source", "planted"}});
  write_label_matrix(run.output(dir / "truth_ros.jsonl"), corpus.ros, {{"source", "planted"}});
  run.write(dir / "split.json", to_json(split).dump(2) + "\n");
  run.write(dir / "stats.json", to_json(corpus_stats(corpus.examples)).dump(2) + "\n");
  run.config() = {{"generator", to_json(cfg)}, {"validation_fraction", o.validation}, {"test_fraction", o.test}};
  run.commit(dir / "manifest.json");
  std::cout << "wrote " << corpus.examples.size() << " examples to " << dir.string() << " (train "
            << split.train.size() << ", validation " << split.validation.size() << ", test " << split.test.size()
            << ")\n";
}

struct IngestOptions {
  std::string transcripts, notes, out;
};

void cmd_ingest(const Common& common, const IngestOptions& o) {
  Run run("ingest", common);
  ParseStats tstats, nstats;
  std::istringstream tin(run.input(o.transcripts));
  auto transcripts = read_transcripts(tin, &tstats);
  std::istringstream nin(run.input(o.notes));
  auto notes = read_notes(nin, &nstats);
  const auto corpus = join_corpus(std::move(transcripts), std::move(notes));
  for (const auto& ex : corpus) validate_note(ex.note, ex.transcript);

  const fs::path dir(o.out);
  std::vector<Transcript> ts;
  std::vector<SoapNote> ns;
  for (const auto& ex : corpus) {
    ts.push_back(ex.transcript);
    ns.push_back(ex.note);
  }
  write_transcripts(run.output(dir / "transcripts.jsonl"), ts);
  write_notes(run.output(dir / "notes.jsonl"), ns);
  auto stats = to_json(corpus_stats(corpus));
  stats["transcript_records"] = tstats.records;
  stats["note_records"] = nstats.records;
  stats["unknown_fields"] = tstats.unknown_fields + nstats.unknown_fields;
  stats["remapped_speakers"] = tstats.remapped_speakers;
  run.write(dir / "stats.json", stats.dump(2) + "\n");
  run.commit(dir / "manifest.json");
  std::cout << "ingested " << corpus.size() << " examples\n";
}

struct DeriveOptions {
  std::string transcripts, notes, split, task = "diagnosis", out;
  std::size_t label_count = 15;
  std::size_t merge_top_k = kDefaultMergeTopK;
  double min_rate = kDefaultRosMinRate;
};

void cmd_derive_labels(const Common& common, const DeriveOptions& o) {
  Run run("derive-labels", common);
  const auto task = parse_task(o.task);
  const auto corpus = join_corpus(load_transcripts(run, o.transcripts), load_notes(run, o.notes));
  const auto fit = restrict_to(corpus, part_ids(load_split(run, o.split), "fit"));
  LabelMatrix m;
  json header = {{"source", "derived"}};
  if (task == Task::kDiagnosis) {
    const auto labeler = DiagnosisLabeler::fit(fit, o.label_count, o.merge_top_k);
    m = labeler.label(corpus);
    header["merge_table"] = labeler.merge_table();
  } else {
    m = RosLabeler::fit(fit, o.min_rate).label(corpus);
  }
  write_label_matrix(run.output(o.out), m, header);
  run.config() = {{"task", o.task},
                  {"label_count", o.label_count},
                  {"merge_top_k", o.merge_top_k},
                  {"min_rate", o.min_rate},
                  {"fit_examples", fit.size()}};
  run.commit(manifest_for(o.out));
  std::cout << m.cols() << " labels over " << m.rows() << " examples\n";
}

struct LexiconOptions {
  bool demo = false;
  std::string concepts, task_map, out;
};

void cmd_build_lexicon(const Common& common, const LexiconOptions& o) {
  Run run("build-lexicon", common);
  if (o.demo == !o.concepts.empty()) throw ConfigError("give exactly one of --demo or --concepts");
  const fs::path dir(o.out);
  const auto lex = o.demo ? demo_lexicon() : build_lexicon(concepts_from_json(load_json(run, o.concepts)));
  run.write(dir / "lexicon.json", lexicon_to_json(lex).dump(2) + "\n");
  if (o.demo) {
    for (Task t : {Task::kDiagnosis, Task::kRos})
      run.write(dir / ("task_" + std::string(to_string(t)) + ".json"), to_json(demo_task_lexicon(t)).dump(2) + "\n");
  }
  if (!o.task_map.empty()) check_task_lexicon(lex, task_lexicon_from_json(load_json(run, o.task_map)));
  run.config() = {{"demo", o.demo}, {"concepts", lex.concepts().size()}, {"patterns", lex.pattern_count()}};
  run.commit(dir / "manifest.json");
  std::cout << lex.concepts().size() << " concepts, " << lex.pattern_count() << " patterns\n";
}

struct TagOptions {
  std::string transcripts, lexicon, out;
};

void cmd_tag(const Common& common, const TagOptions& o) {
  Run run("tag", common);
  const auto lex = o.lexicon.empty() ? demo_lexicon() : build_lexicon(concepts_from_json(load_json(run, o.lexicon)));
  const auto transcripts = load_transcripts(run, o.transcripts);
  auto& out = run.output(o.out);
  std::size_t total = 0;
  for (const auto& t : transcripts) {
    json matches = json::array();
    for (const auto& u : t.utterances)
      for (const auto& m : tag_utterance(lex, u)) {
        matches.push_back({{"utterance", u.index}, {"cui", m.cui}, {"start", m.start}, {"end", m.end}});
        ++total;
      }
    out << json{{"id", t.id}, {"matches", std::move(matches)}}.dump() << '\n';
  }
  run.config() = {{"default_lexicon", o.lexicon.empty()}};
  run.commit(manifest_for(o.out));
  std::cout << total << " concept matches in " << transcripts.size() << " transcripts\n";
}

struct TrainFilterOptions {
  std::string transcripts, notes, split, scope = "all", out;
  std::optional<double> threshold;
  double reg_c = kDefaultRegC;
  std::size_t min_df = kUtteranceMinDf;
  bool speaker_feature = false;
  std::size_t label_count = 15;
  double min_rate = kDefaultRosMinRate;
};

void cmd_train_filter(const Common& common, const TrainFilterOptions& o) {
  Run run("train-filter", common);
  const auto scope = parse_scope(o.scope);
  const auto corpus = join_corpus(load_transcripts(run, o.transcripts), load_notes(run, o.notes));
  const auto split = load_split(run, o.split);
  const auto train = restrict_to(corpus, part_ids(split, "train"));
  const auto fit = restrict_to(corpus, part_ids(split, "fit"));
  std::vector<std::vector<std::uint8_t>> targets;
  if (scope == NoteworthyScope::kAll)
    targets = all_noteworthy_targets(train);
  else if (scope == NoteworthyScope::kDiagnosis)
    targets = task_noteworthy_targets(train, DiagnosisLabeler::fit(fit, o.label_count));
  else
    targets = task_noteworthy_targets(train, RosLabeler::fit(fit, o.min_rate));
  std::vector<Transcript> ts;
  for (const auto& ex : train) ts.push_back(ex.transcript);
  const auto fm = train_filter(ts, targets, scope, FilterTrainConfig{o.reg_c, o.min_df, o.threshold, o.speaker_feature});
  run.write(o.out, to_json(fm).dump() + "\n");
  run.config() = {{"scope", o.scope},     {"threshold", fm.threshold},       {"reg_c", o.reg_c},
                  {"min_df", o.min_df},   {"speaker_feature", o.speaker_feature}, {"label_count", o.label_count},
                  {"min_rate", o.min_rate}, {"train_examples", train.size()}};
  run.commit(manifest_for(o.out));
  std::cout << "filter over " << fm.vocabulary.size() << " terms, threshold " << fm.threshold
            << (fm.degenerate ? " (degenerate: all utterances positive)" : "") << "\n";
}

struct FilterOptions {
  std::string transcripts, split, part = "all", strategy = "none", task = "diagnosis", out;
  ContextOptions context;
};

void cmd_filter(const Common& common, const FilterOptions& o) {
  Run run("filter", common);
  const auto strategy = parse_strategy(o.strategy);
  const auto split = load_split(run, o.split);
  const auto all = load_transcripts(run, o.transcripts);
  const auto loaded = load_context(run, o.context, strategy, parse_task(o.task), all, split);
  const auto transcripts = restrict_to(all, part_ids(split, o.part));
  auto& out = run.output(o.out);
  double total = 0.0;
  for (const auto& t : transcripts) {
    const auto selected = apply_filter(strategy, loaded->ctx, t);
    total += static_cast<double>(selected.size());
    out << json{{"id", t.id}, {"selected", selected}}.dump() << '\n';
  }
  run.config() = {{"strategy", to_string(strategy)}, {"task", o.task}, {"part", o.part}};
  run.commit(manifest_for(o.out));
  std::cout << "mean selected utterances "
            << fixed4(transcripts.empty() ? 0.0 : total / static_cast<double>(transcripts.size())) << "\n";
}

struct TrainOptions {
  std::string transcripts, labels, split, strategy, backend, out;
  std::optional<double> reg_c;
  std::optional<std::size_t> min_df;
  std::optional<double> nb_alpha;
  std::vector<double> tune_grid;
  ContextOptions context;
};

PipelineConfig resolve_pipeline(const Common& common, const TrainOptions& o, Task task) {
  auto cfg = pipeline_config_from_json(config_section(common, "pipeline"));
  cfg.task = task;
  if (!o.strategy.empty()) cfg.strategy = parse_strategy(o.strategy);
  if (!o.backend.empty()) cfg.backend = parse_backend(o.backend);
  if (o.reg_c) cfg.reg_c = *o.reg_c;
  if (o.min_df) cfg.min_df = *o.min_df;
  if (o.nb_alpha) cfg.nb_alpha = *o.nb_alpha;
  cfg.encoder.seed = common.seed;
  cfg.jobs = common.jobs;
  cfg.validate();
  return cfg;
}

void cmd_train(const Common& common, const TrainOptions& o) {
  Run run("train", common);
  const auto labels = load_labels(run, o.labels);
  auto cfg = resolve_pipeline(common, o, labels.space.task);
  const auto split = load_split(run, o.split);
  const auto all = load_transcripts(run, o.transcripts);
  const auto loaded = load_context(run, o.context, cfg.strategy, cfg.task, all, split);
  const auto train = restrict_to(all, part_ids(split, "train"));
  if (!o.tune_grid.empty()) {
    if (!split || split->validation.empty()) throw ConfigError("--tune-reg-c needs a split with a validation part");
    const auto validation = restrict_to(all, part_ids(split, "validation"));
    cfg.reg_c = select_reg_c(cfg, train, validation, labels, loaded->ctx, o.tune_grid);
  }
  const auto models = train_pipeline(cfg, train, labels, loaded->ctx);
  run.write(o.out, to_json(models).dump() + "\n");
  run.config() = to_json(cfg);
  run.config()["train_examples"] = train.size();
  run.commit(manifest_for(o.out));
  std::cout << "trained " << models.classifier.space.size() << " " << to_string(cfg.task) << " classifiers ("
            << to_string(cfg.backend) << ", " << to_string(cfg.strategy) << ", reg_c " << cfg.reg_c << ")\n";
}

struct PredictOptions {
  std::string model, transcripts, split, part = "all", out;
  ContextOptions context;
};

void cmd_predict(const Common& common, const PredictOptions& o) {
  Run run("predict", common);
  const auto models = trained_pipeline_from_json(load_json(run, o.model));
  auto cfg = models.config;
  cfg.jobs = common.jobs;
  const auto split = load_split(run, o.split);
  const auto all = load_transcripts(run, o.transcripts);
  const auto loaded = load_context(run, o.context, cfg.strategy, cfg.task, all, split);
  const auto corpus = restrict_to(all, part_ids(split, o.part));
  const auto scores = run_pipeline(cfg, models, corpus, loaded->ctx);
  write_scores(run.output(o.out), scores);
  run.config() = {{"pipeline", to_json(cfg)}, {"part", o.part}};
  run.commit(manifest_for(o.out));
  std::cout << "scored " << scores.rows() << " examples\n";
}

struct EvaluateOptions {
  std::string scores, labels, name = "model", out, markdown;
  double threshold = kDefaultDecisionThreshold;
};

void cmd_evaluate(const Common& common, const EvaluateOptions& o) {
  Run run("evaluate", common);
  const auto truth = load_labels(run, o.labels);
  std::istringstream in(run.input(o.scores));
  const auto scores = read_scores(in, truth.space);
  const auto report = evaluate(scores, truth, o.threshold);
  const auto md = to_markdown(report, o.name);
  run.write(o.out, to_json(report).dump(2) + "\n");
  if (!o.markdown.empty()) run.write(o.markdown, md);
  run.config() = {{"threshold", o.threshold}, {"name", o.name}};
  run.commit(manifest_for(o.out));
  std::cout << md;
}

struct BaselineOptions {
  std::string task = "diagnosis", prevalence, rank_prevalence, metric;
  std::size_t n = kReferenceTestSize;
  std::string labels, transcripts, split, out;
  LexiconInputs lexicon;
};

const std::vector<AgnosticMetric> kAgnosticMetrics = {AgnosticMetric::kAccuracy, AgnosticMetric::kMacroF1,
                                                      AgnosticMetric::kMacroAuc, AgnosticMetric::kMicroF1,
                                                      AgnosticMetric::kMicroAuc, AgnosticMetric::kPrecisionAt1};

// Prevalence-only mode: prints metric values, writes nothing.
void baseline_from_prevalence(const Common& common, const BaselineOptions& o) {
  Run run("baseline", common);
  const auto task = parse_task(o.task);
  const auto truth = space_from_stats(task, label_stats_from_json(load_json(run, o.prevalence)));
  const auto ranking =
      o.rank_prevalence.empty() ? truth
                                : with_prevalence(truth, label_stats_from_json(load_json(run, o.rank_prevalence)));
  if (!o.metric.empty()) {
    std::cout << fixed4(input_agnostic_score(truth, ranking, parse_agnostic_metric(o.metric), o.n)) << "\n";
    return;
  }
  for (auto m : kAgnosticMetrics)
    std::cout << to_string(m) << "\t" << fixed4(input_agnostic_score(truth, ranking, m, o.n)) << "\n";
}

// Corpus mode: entity-matching and input-agnostic rows on the test part.
void baseline_from_corpus(const Common& common, const BaselineOptions& o) {
  Run run("baseline", common);
  const auto labels = load_labels(run, o.labels);
  const auto task = labels.space.task;
  const auto split = load_split(run, o.split);
  const auto transcripts = restrict_to(load_transcripts(run, o.transcripts), part_ids(split, "test"));
  const auto lex = load_lexicon(run, o.lexicon, task);
  const auto tl = lex.task_map.restricted_to(labels.space);

  ScoreMatrix entity{{}, labels.space, {}};
  for (const auto& t : transcripts) {
    entity.example_ids.push_back(t.id);
    for (auto v : entity_baseline_predict(lex.lexicon, tl, t, labels.space)) entity.probs.push_back(v);
  }
  const auto train_ids = part_ids(split, "fit");
  std::vector<std::string> fit_rows;
  for (const auto& id : labels.example_ids)
    if (!train_ids || train_ids->count(id)) fit_rows.push_back(id);
  auto space = labels.space;
  space.train_prevalence = column_prevalence(select_rows(labels, fit_rows));

  std::vector<std::pair<std::string, EvalReport>> rows{{"entity matching", evaluate(entity, labels)}};
  EvalReport agnostic;
  for (auto m : kAgnosticMetrics) {
    auto scores = input_agnostic_predict(space, m, entity.example_ids);
    const auto key = std::string(to_string(m));
    agnostic.aggregate[key] = evaluate(scores, labels).aggregate.at(key);
  }
  rows.emplace_back("input-agnostic", agnostic);

  const auto md = markdown_model_table(rows);
  json j = json::object();
  for (const auto& [name, r] : rows) j[name] = r.aggregate;
  run.write(o.out, j.dump(2) + "\n");
  run.config() = {{"task", to_string(task)}, {"examples", transcripts.size()}};
  run.commit(manifest_for(o.out));
  std::cout << md;
}

void cmd_baseline(const Common& common, const BaselineOptions& o) {
  if (!o.prevalence.empty() == !o.labels.empty()) throw ConfigError("give exactly one of --prevalence or --labels");
  if (!o.prevalence.empty())
    baseline_from_prevalence(common, o);
  else
    baseline_from_corpus(common, o);
}

struct SweepOptions {
  std::string transcripts, notes, labels, split, filter_model, backend, out;
  std::vector<double> grid = default_sweep_grid();
  std::optional<double> reg_c;
};

// Pipelines trained on the train part and scored on the test part, with the
// filter's selections at each threshold injected as the utterance subset.
void cmd_sweep(const Common& common, const SweepOptions& o) {
  Run run("sweep", common);
  const auto labels = load_labels(run, o.labels);
  const auto split = load_split(run, o.split);
  if (!split) throw ConfigError("sweep needs --split");
  const auto all = load_transcripts(run, o.transcripts);
  const auto fm = filter_model_from_json(load_json(run, o.filter_model));
  const auto train = restrict_to(all, part_ids(split, "train"));
  const auto test = restrict_to(all, part_ids(split, "test"));

  TrainOptions topts;
  topts.backend = o.backend;
  topts.reg_c = o.reg_c;
  auto cfg = resolve_pipeline(common, topts, labels.space.task);
  cfg.strategy = FilterStrategy::oracle(fm.scope);
  const auto evaluator = [&](const std::vector<std::vector<std::size_t>>& selections) {
    std::map<std::string, std::vector<std::size_t>> by_id;
    for (std::size_t i = 0; i < all.size(); ++i) by_id[all[i].id] = selections[i];
    FilterContext ctx;
    ctx.oracle = [&](const Transcript& t) { return by_id.at(t.id); };
    const auto models = train_pipeline(cfg, train, labels, ctx);
    return evaluate(run_pipeline(cfg, models, test, ctx), labels).aggregate;
  };
  const auto points = threshold_sweep(fm, all, evaluator, o.grid);
  const auto table = sweep_table(points);
  run.write(o.out, table);
  run.config() = {{"pipeline", to_json(cfg)}, {"grid", o.grid}};
  run.commit(manifest_for(o.out));
  std::cout << table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noteworthy-utterance filtering and multilabel extraction from clinical conversation transcripts"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  Common common;
  app.add_option("--seed", common.seed, "Seed for every random choice");
  app.add_option("--jobs", common.jobs, "Worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--config", common.config_path, "JSON config with \"synth\" and \"pipeline\" sections")
      ->envname("NOTEWORTHY_CONFIG");
  app.set_version_flag("--version", std::string(kVersion));

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted labels and evidence");
  c_synth->add_option("--n", synth.n, "Examples to generate")->check(CLI::PositiveNumber);
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--validation-fraction", synth.validation, "Validation share of the split");
  c_synth->add_option("--test-fraction", synth.test, "Test share of the split");
  c_synth->callback([&] { cmd_synth(common, synth); });

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate and join transcripts with notes");
  c_ingest->add_option("--transcripts", ingest.transcripts, "Transcript JSONL")->required();
  c_ingest->add_option("--notes", ingest.notes, "Note JSONL")->required();
  c_ingest->add_option("--out", ingest.out, "Output directory")->required();
  c_ingest->callback([&] { cmd_ingest(common, ingest); });

  DeriveOptions derive;
  auto* c_derive = app.add_subcommand("derive-labels", "Derive diagnosis or RoS label matrices from notes");
  c_derive->add_option("--transcripts", derive.transcripts, "Transcript JSONL")->required();
  c_derive->add_option("--notes", derive.notes, "Note JSONL")->required();
  c_derive->add_option("--task", derive.task, "diagnosis or ros");
  c_derive->add_option("--split", derive.split, "Split JSON; labels are fit on train and validation");
  c_derive->add_option("--label-count", derive.label_count, "Most frequent merged diagnosis tags kept");
  c_derive->add_option("--merge-top-k", derive.merge_top_k, "Canonical tags used for substring merging");
  c_derive->add_option("--min-rate", derive.min_rate, "RoS systems need a positive rate above this");
  c_derive->add_option("--out", derive.out, "Label matrix JSONL")->required();
  c_derive->callback([&] { cmd_derive_labels(common, derive); });

  LexiconOptions lexicon;
  auto* c_lex = app.add_subcommand("build-lexicon", "Build and validate a concept lexicon");
  c_lex->add_flag("--demo", lexicon.demo, "Use the built-in demo concepts and task maps");
  c_lex->add_option("--concepts", lexicon.concepts, "Concept JSON");
  c_lex->add_option("--task-map", lexicon.task_map, "Task map JSON to check against the lexicon");
  c_lex->add_option("--out", lexicon.out, "Output directory")->required();
  c_lex->callback([&] { cmd_build_lexicon(common, lexicon); });

  TagOptions tag;
  auto* c_tag = app.add_subcommand("tag", "Tag concept mentions in transcripts");
  c_tag->add_option("--transcripts", tag.transcripts, "Transcript JSONL")->required();
  c_tag->add_option("--lexicon", tag.lexicon, "Concept lexicon JSON (default: built-in demo lexicon)");
  c_tag->add_option("--out", tag.out, "Match JSONL")->required();
  c_tag->callback([&] { cmd_tag(common, tag); });

  TrainFilterOptions tf;
  auto* c_tf = app.add_subcommand("train-filter", "Train an utterance-level noteworthy classifier");
  c_tf->add_option("--transcripts", tf.transcripts, "Transcript JSONL")->required();
  c_tf->add_option("--notes", tf.notes, "Note JSONL")->required();
  c_tf->add_option("--split", tf.split, "Split JSON; trains on the train part");
  c_tf->add_option("--scope", tf.scope, "all, diagnosis or ros");
  c_tf->add_option("--threshold", tf.threshold, "Operating threshold (default by scope: all 0.4, diagnosis 0.1, ros 0.02)");
  c_tf->add_option("--reg-c", tf.reg_c, "Inverse L2 strength")->check(CLI::PositiveNumber);
  c_tf->add_option("--min-df", tf.min_df, "Minimum document frequency of a term");
  c_tf->add_flag("--speaker-feature", tf.speaker_feature, "Add the speaker role as a feature");
  c_tf->add_option("--label-count", tf.label_count, "Diagnosis labels defining task-scope targets");
  c_tf->add_option("--min-rate", tf.min_rate, "RoS minimum positive rate defining task-scope targets");
  c_tf->add_option("--out", tf.out, "Filter model JSON")->required();
  c_tf->callback([&] { cmd_train_filter(common, tf); });

  FilterOptions filter;
  auto* c_filter = app.add_subcommand("filter", "Select noteworthy utterances");
  c_filter->add_option("--transcripts", filter.transcripts, "Transcript JSONL")->required();
  c_filter->add_option("--strategy", filter.strategy, kStrategyHelp);
  c_filter->add_option("--task", filter.task, "Task map used by umls strategies");
  c_filter->add_option("--split", filter.split, "Split JSON");
  c_filter->add_option("--part", filter.part, "Split part to filter: train, validation, test, fit or all");
  add_context_options(c_filter, filter.context);
  c_filter->add_option("--out", filter.out, "Selection JSONL")->required();
  c_filter->callback([&] { cmd_filter(common, filter); });

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Train one-vs-rest classifiers on filtered transcripts");
  c_train->add_option("--transcripts", train.transcripts, "Transcript JSONL")->required();
  c_train->add_option("--labels", train.labels, "Label matrix JSONL")->required();
  c_train->add_option("--split", train.split, "Split JSON; trains on the train part");
  c_train->add_option("--strategy", train.strategy, std::string(kStrategyHelp) + " (default none)");
  c_train->add_option("--backend", train.backend, "logistic, naive_bayes or encoder (default logistic)");
  c_train->add_option("--reg-c", train.reg_c, "Inverse L2 strength (default 1)")->check(CLI::PositiveNumber);
  c_train->add_option("--min-df", train.min_df, "Minimum document frequency (default 2)");
  c_train->add_option("--nb-alpha", train.nb_alpha, "Naive Bayes smoothing (default 1)");
  c_train->add_option("--tune-reg-c", train.tune_grid, "Pick reg_c from these values by validation micro-F1");
  add_context_options(c_train, train.context);
  c_train->add_option("--out", train.out, "Model JSON")->required();
  c_train->callback([&] { cmd_train(common, train); });

  PredictOptions predict;
  auto* c_predict = app.add_subcommand("predict", "Score transcripts with a trained model");
  c_predict->add_option("--model", predict.model, "Model JSON")->required();
  c_predict->add_option("--transcripts", predict.transcripts, "Transcript JSONL")->required();
  c_predict->add_option("--split", predict.split, "Split JSON");
  c_predict->add_option("--part", predict.part, "Split part to score: train, validation, test, fit or all");
  add_context_options(c_predict, predict.context);
  c_predict->add_option("--out", predict.out, "Score JSONL")->required();
  c_predict->callback([&] { cmd_predict(common, predict); });

  EvaluateOptions ev;
  auto* c_eval = app.add_subcommand("evaluate", "Compute metrics for scores against labels");
  c_eval->add_option("--scores", ev.scores, "Score JSONL")->required();
  c_eval->add_option("--labels", ev.labels, "Label matrix JSONL")->required();
  c_eval->add_option("--threshold", ev.threshold, "Decision threshold for binary metrics");
  c_eval->add_option("--name", ev.name, "Model name in the markdown row");
  c_eval->add_option("--markdown", ev.markdown, "Also write the markdown report here");
  c_eval->add_option("--out", ev.out, "Report JSON")->required();
  c_eval->callback([&] { cmd_evaluate(common, ev); });

  BaselineOptions baseline;
  auto* c_base = app.add_subcommand("baseline", "Input-agnostic and entity-matching baselines");
  c_base->add_option("--task", baseline.task, "diagnosis or ros (prevalence mode)");
  c_base->add_option("--prevalence", baseline.prevalence, "Evaluation prevalences JSON (prevalence mode)");
  c_base->add_option("--rank-prevalence", baseline.rank_prevalence,
                     "Training prevalences the constant predictor is fit on (default: --prevalence)");
  c_base->add_option("--metric", baseline.metric,
                     "accuracy, macro_f1, micro_f1, macro_auc, micro_auc or precision_at_1 (default: all)");
  c_base->add_option("--n", baseline.n, "Evaluation examples in prevalence mode")->check(CLI::PositiveNumber);
  c_base->add_option("--labels", baseline.labels, "Label matrix JSONL (corpus mode)");
  c_base->add_option("--transcripts", baseline.transcripts, "Transcript JSONL (corpus mode)");
  c_base->add_option("--split", baseline.split, "Split JSON; evaluates the test part");
  c_base->add_option("--lexicon", baseline.lexicon.lexicon, "Concept lexicon JSON (default: built-in demo lexicon)");
  c_base->add_option("--task-map", baseline.lexicon.task_map, "Task map JSON (default: built-in demo map)");
  c_base->add_option("--out", baseline.out, "Report JSON (corpus mode)");
  c_base->callback([&] {
    if (!baseline.labels.empty() && (baseline.transcripts.empty() || baseline.out.empty()))
      throw ConfigError("corpus mode needs --labels, --transcripts and --out");
    cmd_baseline(common, baseline);
  });

  SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Metrics across filter thresholds");
  c_sweep->add_option("--transcripts", sweep.transcripts, "Transcript JSONL")->required();
  c_sweep->add_option("--labels", sweep.labels, "Label matrix JSONL")->required();
  c_sweep->add_option("--split", sweep.split, "Split JSON")->required();
  c_sweep->add_option("--filter-model", sweep.filter_model, "Filter model JSON")->required();
  c_sweep->add_option("--grid", sweep.grid, "Thresholds to evaluate");
  c_sweep->add_option("--backend", sweep.backend, "logistic, naive_bayes or encoder (default logistic)");
  c_sweep->add_option("--reg-c", sweep.reg_c, "Inverse L2 strength (default 1)")->check(CLI::PositiveNumber);
  c_sweep->add_option("--out", sweep.out, "Sweep table TSV")->required();
  c_sweep->callback([&] { cmd_sweep(common, sweep); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const EncoderError& e) {
    std::cerr << "error: " << e.what() << " (chunk " << e.chunk() << ")\n";
    return e.exit_code();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
