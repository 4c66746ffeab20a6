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

#include "tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

namespace dfaguide::text {

using nlohmann::json;

namespace {

const std::string kPunctuation = ".,!?;:\"()-";
const char* const kReserved[] = {"<eos>", "<pad>", "<unk>"};

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '\'';
}

bool sentence_end(const std::string& w) { return w == "." || w == "!" || w == "?"; }

std::vector<std::int32_t> phrase(const json& j, const WordTokenizer& tok, const std::string& path) {
  if (!j.is_string()) throw TextError(path + ": expected a string");
  try {
    auto ids = tok.encode_exact(j.get<std::string>());
    if (ids.empty()) throw TextError("phrase is empty");
    return ids;
  } catch (const TextError& e) {
    throw TextError(path + ": " + e.what());
  }
}

json window(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("min") || !j.contains("max") || !j["min"].is_number_unsigned() ||
      !j["max"].is_number_unsigned()) {
    throw TextError(path + ": expected {\"min\": a, \"max\": b} with non-negative integers");
  }
  return {{"min", j["min"]}, {"max", j["max"]}};
}

}  // namespace

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (is_word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      continue;
    }
    if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    if (kPunctuation.find(c) != std::string::npos) out.emplace_back(1, c);
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

WordTokenizer::WordTokenizer() {
  for (const char* r : kReserved) add(r);
}

void WordTokenizer::add(const std::string& word) {
  if (!ids_.emplace(word, static_cast<std::int32_t>(words_.size())).second) {
    throw TextError("duplicate vocabulary entry '" + word + "'");
  }
  words_.push_back(word);
}

WordTokenizer WordTokenizer::build(const std::string& text, std::size_t max_vocab) {
  std::map<std::string, std::size_t> counts;
  for (auto& w : split_words(text)) ++counts[w];
  std::vector<std::pair<std::string, std::size_t>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  WordTokenizer tok;
  for (const auto& [w, c] : order) {
    if (max_vocab && tok.size() >= max_vocab) break;
    if (!tok.contains(w)) tok.add(w);
  }
  return tok;
}

WordTokenizer WordTokenizer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TextError("cannot open vocabulary " + path);
  WordTokenizer tok;
  tok.words_.clear();
  tok.ids_.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw TextError("vocabulary line " + std::to_string(lineno) + ": empty entry");
    tok.add(line);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (tok.words_.size() <= i || tok.words_[i] != kReserved[i]) {
      throw TextError("vocabulary " + path + " must start with <eos>, <pad>, <unk>");
    }
  }
  return tok;
}

void WordTokenizer::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw TextError("cannot write vocabulary " + path);
  for (const auto& w : words_) out << w << '\n';
  if (!out) throw TextError("write failed for " + path);
}

const std::string& WordTokenizer::word(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) throw TextError("token id out of range");
  return words_[static_cast<std::size_t>(id)];
}

bool WordTokenizer::is_punctuation(std::int32_t id) const {
  const auto& w = word(id);
  return w.size() == 1 && kPunctuation.find(w[0]) != std::string::npos;
}

std::vector<std::int32_t> WordTokenizer::encode(const std::string& text) const {
  std::vector<std::int32_t> out;
  for (const auto& w : split_words(text)) {
    const auto it = ids_.find(w);
    out.push_back(it == ids_.end() ? kUnk : it->second);
  }
  return out;
}

std::vector<std::int32_t> WordTokenizer::encode_exact(const std::string& text) const {
  std::vector<std::int32_t> out;
  for (const auto& w : split_words(text)) {
    const auto it = ids_.find(w);
    if (it == ids_.end()) throw TextError("unknown word '" + w + "'");
    out.push_back(it->second);
  }
  return out;
}

std::string WordTokenizer::decode(const std::vector<std::int32_t>& tokens) const {
  std::string out;
  for (std::int32_t t : tokens) {
    if (t == kEos) break;
    if (t == kPad) continue;
    const auto& w = word(t);
    if (!out.empty() && !(is_punctuation(t) && w != "\"" && w != "(")) out.push_back(' ');
    out += w;
  }
  return out;
}

json WordTokenizer::alphabet_json() const {
  json boundary = json::array();
  for (std::size_t i = 3; i < words_.size(); ++i) {
    if (is_punctuation(static_cast<std::int32_t>(i))) boundary.push_back(i);
  }
  return {{"size", words_.size()},
          {"eos", kEos},
          {"pad", kPad},
          {"default_class", "word_start"},
          {"boundary", boundary}};
}

std::vector<std::vector<std::int32_t>> WordTokenizer::sentence_corpus(const std::string& text,
                                                                      std::size_t length) const {
  std::vector<std::vector<std::int32_t>> out;
  std::vector<std::int32_t> cur;
  auto flush = [&] {
    if (!cur.empty() && cur.size() < length) {
      cur.push_back(kEos);
      cur.resize(length, kPad);
      out.push_back(cur);
    }
    cur.clear();
  };
  for (const auto& w : split_words(text)) {
    const auto it = ids_.find(w);
    cur.push_back(it == ids_.end() ? kUnk : it->second);
    if (sentence_end(w)) flush();
  }
  flush();
  return out;
}

json text_spec_to_tokens(const json& spec, const WordTokenizer& tok, std::size_t horizon) {
  if (!spec.is_object()) throw TextError("constraints: expected a JSON object");
  static const std::vector<std::string> known = {"keyphrases", "ordered_segments", "word_length", "end_phrase",
                                                 "suffix",     "forbidden",        "horizon",     "version"};
  for (const auto& [key, value] : spec.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw TextError("constraints: unknown field '" + key + "'");
    }
  }
  json out{{"version", 1}, {"alphabet", tok.alphabet_json()}};
  if (spec.contains("keyphrases")) {
    json groups = json::array();
    const auto& kp = spec["keyphrases"];
    if (!kp.is_array()) throw TextError("keyphrases: expected an array");
    for (std::size_t i = 0; i < kp.size(); ++i) {
      const std::string path = "keyphrases[" + std::to_string(i) + "]";
      json group = json::array();
      if (kp[i].is_string()) {
        group.push_back(phrase(kp[i], tok, path));
      } else if (kp[i].is_array() && !kp[i].empty()) {
        for (std::size_t j = 0; j < kp[i].size(); ++j) {
          group.push_back(phrase(kp[i][j], tok, path + "[" + std::to_string(j) + "]"));
        }
      } else {
        throw TextError(path + ": expected a string or a non-empty array of strings");
      }
      groups.push_back(group);
    }
    out["keyphrases"] = groups;
  }
  if (spec.contains("ordered_segments")) {
    const auto& segs = spec["ordered_segments"];
    if (!segs.is_array()) throw TextError("ordered_segments: expected an array");
    json list = json::array();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string path = "ordered_segments[" + std::to_string(i) + "]";
      if (!segs[i].is_object() || !segs[i].contains("text")) throw TextError(path + ": expected {\"text\": ...}");
      json seg{{"tokens", phrase(segs[i]["text"], tok, path + ".text")}};
      if (segs[i].contains("window_after")) seg["window_after"] = window(segs[i]["window_after"], path + ".window_after");
      list.push_back(seg);
    }
    out["ordered_segments"] = list;
  }
  if (spec.contains("word_length")) out["word_length"] = window(spec["word_length"], "word_length");
  if (spec.contains("end_phrase")) out["end_phrase"] = phrase(spec["end_phrase"], tok, "end_phrase");
  if (spec.contains("suffix")) out["suffix"] = phrase(spec["suffix"], tok, "suffix");
  if (spec.contains("forbidden")) {
    const auto& f = spec["forbidden"];
    if (!f.is_array()) throw TextError("forbidden: expected an array");
    json list = json::array();
    for (std::size_t i = 0; i < f.size(); ++i) list.push_back(phrase(f[i], tok, "forbidden[" + std::to_string(i) + "]"));
    out["forbidden"] = list;
  }
  if (horizon) {
    out["horizon"] = horizon;
  } else if (spec.contains("horizon")) {
    if (!spec["horizon"].is_number_unsigned()) throw TextError("horizon: expected a positive integer");
    out["horizon"] = spec["horizon"];
  }
  return out;
}

}  // namespace dfaguide::text
