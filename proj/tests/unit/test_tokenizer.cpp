// Copyright 2026 The dfaguide Authors.
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

#include <cstdio>
#include <fstream>

#include "doctest.h"

#include "dfaguide/constraints.hpp"
#include "tokenizer.hpp"

using namespace dfaguide::text;
using Ids = std::vector<std::int32_t>;

namespace {

std::string temp_path(const std::string& name) { return std::string(P_tmpdir) + "/dfaguide_tok_" + name; }

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const TextError& e) {
    return e.what();
  }
  return "";
}

const char* kText = "The cat sat. The dog sat, then ran! Did the cat run? Snow fell.";

}  // namespace

TEST_CASE("splitting words") {
  CHECK(split_words("Hello, World!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(split_words("don't  stop-now") == std::vector<std::string>{"don't", "stop", "-", "now"});
  CHECK(split_words("(a \"b\")") == std::vector<std::string>{"(", "a", "\"", "b", "\"", ")"});
  CHECK(split_words("  ").empty());
  CHECK(split_words("x2 y") == std::vector<std::string>{"x2", "y"});
}

TEST_CASE("vocabulary building") {
  const WordTokenizer tok = WordTokenizer::build(kText);
  CHECK(tok.word(WordTokenizer::kEos) == "<eos>");
  CHECK(tok.word(WordTokenizer::kPad) == "<pad>");
  CHECK(tok.word(WordTokenizer::kUnk) == "<unk>");
  // "the" (3) beats "cat" and "sat" (2 each, alphabetical), then the rest.
  CHECK(tok.word(3) == "the");
  CHECK(tok.word(4) == ".");
  CHECK(tok.contains("snow"));
  CHECK(tok.is_punctuation(4));
  CHECK_FALSE(tok.is_punctuation(3));
  CHECK_FALSE(tok.is_punctuation(WordTokenizer::kEos));

  const WordTokenizer small = WordTokenizer::build(kText, 6);
  CHECK(small.size() == 6);
  CHECK(small.encode("zebra the") == Ids{WordTokenizer::kUnk, 3});
  CHECK(error_of([&] { small.encode_exact("the zebra"); }).find("unknown word 'zebra'") != std::string::npos);
  CHECK(error_of([&] { (void)tok.word(999); }).find("out of range") != std::string::npos);
}

TEST_CASE("encode and decode") {
  const WordTokenizer tok = WordTokenizer::build(kText);
  const Ids ids = tok.encode_exact("The dog sat, then ran!");
  CHECK(tok.decode(ids) == "the dog sat, then ran!");
  Ids padded = ids;
  padded.push_back(WordTokenizer::kEos);
  padded.push_back(tok.encode_exact("cat").front());
  CHECK(tok.decode(padded) == "the dog sat, then ran!");
  CHECK(tok.decode({WordTokenizer::kPad, ids[0], WordTokenizer::kPad}) == "the");
}

TEST_CASE("save and load") {
  const WordTokenizer tok = WordTokenizer::build(kText);
  const std::string path = temp_path("vocab.txt");
  tok.save(path);
  const WordTokenizer back = WordTokenizer::load(path);
  REQUIRE(back.size() == tok.size());
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(tok.size()); ++i) CHECK(back.word(i) == tok.word(i));
  {
    std::ofstream bad(path);
    bad << "<pad>\n<eos>\n<unk>\nx\n";
  }
  CHECK(error_of([&] { WordTokenizer::load(path); }).find("must start with") != std::string::npos);
  {
    std::ofstream dup(path);
    dup << "<eos>\n<pad>\n<unk>\nx\nx\n";
  }
  CHECK(error_of([&] { WordTokenizer::load(path); }).find("duplicate") != std::string::npos);
  std::remove(path.c_str());
  CHECK(error_of([&] { WordTokenizer::load(path); }).find("cannot open") != std::string::npos);
}

TEST_CASE("sentence corpus") {
  const WordTokenizer tok = WordTokenizer::build(kText);
  const auto rows = tok.sentence_corpus(kText, 6);
  // "the dog sat , then ran !" has 7 tokens and is skipped.
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.size() == 6);
    CHECK(std::find(r.begin(), r.end(), WordTokenizer::kEos) != r.end());
  }
  CHECK(tok.decode(rows[0]) == "the cat sat.");
  CHECK(rows[0][4] == WordTokenizer::kEos);
  CHECK(rows[0][5] == WordTokenizer::kPad);
  CHECK(tok.sentence_corpus("the cat", 4).size() == 1);  // trailing text without a stop
}

TEST_CASE("text constraints to token constraints") {
  const WordTokenizer tok = WordTokenizer::build(kText);
  const nlohmann::json spec = nlohmann::json::parse(R"({
    "keyphrases": [["snow", "snow fell"], "cat"],
    "ordered_segments": [{"text": "the", "window_after": {"min": 1, "max": 3}}, {"text": "sat"}],
    "word_length": {"min": 2, "max": 8},
    "end_phrase": ".",
    "forbidden": ["dog"],
    "horizon": 12})");
  const auto out = text_spec_to_tokens(spec, tok);
  CHECK(out["horizon"] == 12);
  CHECK(out["keyphrases"].size() == 2);
  CHECK(out["keyphrases"][0][1] == tok.encode_exact("snow fell"));
  CHECK(out["keyphrases"][1][0] == tok.encode_exact("cat"));
  CHECK(out["ordered_segments"][0]["window_after"]["max"] == 3);
  CHECK(out["alphabet"]["size"] == tok.size());
  CHECK(text_spec_to_tokens(spec, tok, 20)["horizon"] == 20);

  // The compiler accepts the output and sees punctuation as boundaries.
  const auto cs = dfaguide::spec_from_json(out.dump());
  CHECK(cs.horizon == 12);
  CHECK(cs.alphabet.of(tok.encode_exact(".").front()) == dfaguide::TokenClass::kBoundary);
  CHECK(cs.alphabet.of(tok.encode_exact("cat").front()) == dfaguide::TokenClass::kWordStart);

  const auto message = [&](const char* text) {
    return error_of([&] { text_spec_to_tokens(nlohmann::json::parse(text), tok); });
  };
  CHECK(message(R"({"keyphrases": ["zebra"]})") == "keyphrases[0]: unknown word 'zebra'");
  CHECK(message(R"({"keyphrases": [["cat", "zebra"]]})").rfind("keyphrases[0][1]", 0) == 0);
  CHECK(message(R"({"colour": 1})").find("unknown field 'colour'") != std::string::npos);
  CHECK(message(R"({"keyphrases": [[]]})").find("keyphrases[0]") != std::string::npos);
  CHECK(message(R"({"keyphrases": [""]})").find("empty") != std::string::npos);
  CHECK(message(R"({"word_length": {"min": -1, "max": 2}})").rfind("word_length", 0) == 0);
  CHECK(message(R"({"horizon": "long"})").rfind("horizon", 0) == 0);
  CHECK(message(R"([1])").find("object") != std::string::npos);
  CHECK(message(R"({"ordered_segments": [{"words": "the"}]})").rfind("ordered_segments[0]", 0) == 0);
}
