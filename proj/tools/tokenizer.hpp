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

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace dfaguide::text {

/// Thrown for unknown words in exact mode and for malformed vocab or
/// constraint files.
class TextError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower-cased words ([a-z0-9'] runs) and single punctuation marks.
std::vector<std::string> split_words(const std::string& text);

/// Word-level vocabulary with fixed ids EOS = 0, PAD = 1, UNK = 2.
/// Punctuation marks are boundary tokens; everything else starts a word.
class WordTokenizer {
 public:
  static constexpr std::int32_t kEos = 0;
  static constexpr std::int32_t kPad = 1;
  static constexpr std::int32_t kUnk = 2;

  WordTokenizer();

  /// Most frequent words first (ties alphabetical), at most max_vocab ids
  /// in total including the reserved ones; 0 keeps every word.
  static WordTokenizer build(const std::string& text, std::size_t max_vocab = 0);
  /// One token per line, line i holding id i.
  static WordTokenizer load(const std::string& path);
  void save(const std::string& path) const;

  std::size_t size() const { return words_.size(); }
  const std::string& word(std::int32_t id) const;
  bool contains(const std::string& word) const { return ids_.count(word) != 0; }
  bool is_punctuation(std::int32_t id) const;

  /// Unknown words become UNK.
  std::vector<std::int32_t> encode(const std::string& text) const;
  /// Unknown words throw TextError naming them.
  std::vector<std::int32_t> encode_exact(const std::string& text) const;
  /// Stops at the first EOS; PAD and the reserved markers are dropped.
  std::string decode(const std::vector<std::int32_t>& tokens) const;

  /// Token-level alphabet JSON understood by the constraint compiler.
  nlohmann::json alphabet_json() const;

  /// Splits text into sentences (ending at . ! ?), encodes each and pads it
  /// as content EOS PAD* to exactly `length` tokens. Sentences that do not
  /// fit are skipped.
  std::vector<std::vector<std::int32_t>> sentence_corpus(const std::string& text, std::size_t length) const;

 private:
  void add(const std::string& word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

/// Converts a text-level constraint file into the token-level JSON.
///
///   {"keyphrases": [["snow", "snowing"], "winter"],
///    "ordered_segments": [{"text": "once upon", "window_after": {"min": 1, "max": 5}}],
///    "word_length": {"min": 5, "max": 10}, "end_phrase": "the end .",
///    "suffix": "...", "forbidden": ["dark"], "horizon": 16}
///
/// A plain string in "keyphrases" is a group with one variant. Words must
/// be in the vocabulary. A nonzero `horizon` overrides the file.
nlohmann::json text_spec_to_tokens(const nlohmann::json& text_spec, const WordTokenizer& tok, std::size_t horizon = 0);

}  // namespace dfaguide::text
