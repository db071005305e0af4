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

// Generates a small synthetic corpus, trains an utterance filter and compares
// diagnosis classifiers trained on filtered and unfiltered transcripts.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "noteworthy.hpp"

using namespace noteworthy;

int main() {
  GenConfig gen;
  gen.n_examples = 400;
  gen.seed = 1;
  const auto corpus = generate(gen);

  std::vector<std::string> ids;
  for (const auto& e : corpus.examples) ids.push_back(e.transcript.id);
  const auto split = split_ids(ids, 1, {0.0, 0.3});
  const auto train = subset(corpus.examples, split.train);
  const auto test = subset(corpus.examples, split.test);
  std::vector<Transcript> train_t, test_t;
  for (const auto& e : train) train_t.push_back(e.transcript);
  for (const auto& e : test) test_t.push_back(e.transcript);

  const auto labeler = DiagnosisLabeler::fit(train, 15);
  const auto labels = labeler.label(corpus.examples);
  const auto filter = train_filter(train_t, task_noteworthy_targets(train, labeler), NoteworthyScope::kDiagnosis);

  const auto lexicon = demo_lexicon();
  const auto task_map = demo_task_lexicon(Task::kDiagnosis);
  FilterContext ctx;
  ctx.lexicon = &lexicon;
  ctx.task_lexicon = &task_map;
  ctx.model = &filter;

  std::vector<std::pair<std::string, EvalReport>> rows;
  for (const char* s : {"none", "UMLS", "DN", "UMLS+DN", "UMLS+F2K-DN"}) {
    PipelineConfig cfg;
    cfg.strategy = parse_strategy(s);
    cfg.reg_c = 100.0;
    const auto models = train_pipeline(cfg, train_t, labels, ctx);
    rows.emplace_back(s, evaluate(run_pipeline(cfg, models, test_t, ctx), labels));
  }
  std::cout << markdown_model_table(rows);
}
