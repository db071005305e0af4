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

#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "noteworthy/synth.hpp"
#include "noteworthy/transcript.hpp"

namespace noteworthy {
namespace {

constexpr const char* kThree =
    R"({"id":"t1","utterances":[)"
    R"({"speaker":"physician","start_ms":0,"text":"How are you?"},)"
    R"({"speaker":"patient","start_ms":1200,"text":"Chest pain, again."},)"
    R"({"speaker":"physician","start_ms":1200,"text":"Since when?"}]})";

TEST(ParseTranscript, ThreeUtterances) {
  const auto t = parse_transcript(kThree);
  EXPECT_EQ(t.id, "t1");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.utterances[0].speaker, Speaker::kPhysician);
  EXPECT_EQ(t.utterances[1].speaker, Speaker::kPatient);
  EXPECT_EQ(t.utterances[2].speaker, Speaker::kPhysician);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(t.utterances[i].index, i);
}

TEST(ParseTranscript, EmptyTextIsValidationError) {
  EXPECT_THROW(parse_transcript(R"({"id":"x","utterances":[{"speaker":"patient","start_ms":0,"text":""}]})"),
               ValidationError);
  EXPECT_THROW(parse_transcript(R"({"id":"x","utterances":[{"speaker":"patient","start_ms":0,"text":"  "}]})"),
               ValidationError);
}

TEST(ParseTranscript, DecreasingTimestampNamesIndex) {
  try {
    parse_transcript(R"({"id":"x","utterances":[{"speaker":"patient","start_ms":50,"text":"a"},)"
                     R"({"speaker":"patient","start_ms":10,"text":"b"}]})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("utterance 1"), std::string::npos) << e.what();
  }
}

TEST(ParseTranscript, MalformedRecordCarriesLine) {
  std::istringstream in(std::string(kThree) + "\n{not json\n");
  try {
    read_transcripts(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseTranscript, RejectsStructuralProblems) {
  EXPECT_THROW(parse_transcript(R"({"utterances":[]})"), ParseError);
  EXPECT_THROW(parse_transcript(R"({"id":"x","utterances":[]})"), ValidationError);
  EXPECT_THROW(parse_transcript(R"({"id":"x","utterances":[{"speaker":"patient","start_ms":1.5,"text":"a"}]})"),
               ParseError);
  EXPECT_THROW(parse_transcript(R"({"id":"x","utterances":[{"speaker":"patient","start_ms":-1,"text":"a"}]})"),
               ValidationError);
  EXPECT_THROW(parse_transcript(R"([1,2])"), ParseError);
}

TEST(ParseTranscript, UnknownFieldsAndRolesAreCounted) {
  ParseStats stats;
  const auto t = parse_transcript(
      R"({"id":"x","site":"a","utterances":[{"speaker":"nurse","start_ms":0,"text":"hi","conf":0.9}]})", 1, &stats);
  EXPECT_EQ(t.utterances[0].speaker, Speaker::kOther);
  EXPECT_EQ(stats.unknown_fields, 2u);
  EXPECT_EQ(stats.remapped_speakers, 1u);
  EXPECT_EQ(stats.records, 1u);
}

TEST(ReadTranscripts, DuplicateIdRejected) {
  std::istringstream in(std::string(kThree) + "\n\n" + kThree + "\n");
  EXPECT_THROW(read_transcripts(in), ParseError);
}

TEST(ReadTranscripts, RoundTrip) {
  const auto t = parse_transcript(kThree);
  const auto again = parse_transcript(serialize_transcript(t));
  EXPECT_EQ(t, again);
  EXPECT_EQ(serialize_transcript(again), serialize_transcript(t));
}

TEST(ReadTranscripts, SyntheticCorpusRoundTrip) {
  GenConfig cfg;
  cfg.seed = 4;
  cfg.n_examples = 100;
  cfg.mean_utterances = 60;
  cfg.mean_evidence = 1.0;
  cfg.mean_other_entries = 0.0;
  const auto corpus = generate(cfg).transcripts();
  std::stringstream buf;
  write_transcripts(buf, corpus);
  const auto back = read_transcripts(buf);
  ASSERT_EQ(back.size(), 100u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i], corpus[i]);
    ids.insert(back[i].id);
  }
  EXPECT_EQ(ids.size(), 100u);
}

TEST(WordCount, Basics) {
  Transcript t{"w", {{0, Speaker::kPatient, 0, "hello there"}, {1, Speaker::kPhysician, 0, "hi"}}};
  EXPECT_EQ(word_count(t), 3u);
  EXPECT_EQ(word_count("  a\tb\n c  "), 3u);
  EXPECT_EQ(word_count(""), 0u);
}

TEST(WordCount, EmptyCorpusHistogramHasZeroMass) {
  std::vector<Transcript> none;
  EXPECT_EQ(word_count_histogram(none).mass(), 0u);
}

TEST(WordCount, SyntheticMeanNearFifteenHundred) {
  GenConfig cfg;
  cfg.seed = 8;
  cfg.n_examples = 300;
  const auto corpus = generate(cfg).transcripts();
  double total = 0;
  for (const auto& t : corpus) total += static_cast<double>(word_count(t));
  const double mean = total / static_cast<double>(corpus.size());
  EXPECT_NEAR(mean, 1500.0, 150.0);
  EXPECT_EQ(word_count_histogram(corpus).mass(), corpus.size());
}

}  // namespace
}  // namespace noteworthy
