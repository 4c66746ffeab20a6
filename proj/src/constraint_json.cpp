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

#include "json.hpp"

#include "dfaguide/constraints.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {

using nlohmann::json;

namespace {
constexpr int kSpecVersion = 1;

const char* class_name(TokenClass c) {
  switch (c) {
    case TokenClass::kWordStart: return "word_start";
    case TokenClass::kContinuation: return "continuation";
    case TokenClass::kBoundary: return "boundary";
    case TokenClass::kEos: return "eos";
    case TokenClass::kPad: return "pad";
  }
  return "word_start";
}

TokenClass class_from_name(const std::string& s) {
  if (s == "word_start") return TokenClass::kWordStart;
  if (s == "continuation") return TokenClass::kContinuation;
  if (s == "boundary") return TokenClass::kBoundary;
  throw InputError("alphabet.default_class must be word_start, continuation or boundary (got '" + s + "')");
}

Phrase phrase_from(const json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(path + ": expected an array of token ids");
  Phrase p;
  for (const auto& t : j) {
    if (!t.is_number_integer()) throw InputError(path + ": token ids must be integers");
    p.push_back(t.get<Token>());
  }
  return p;
}

WordWindow window_from(const json& j, const std::string& path) {
  if (!j.is_object()) throw InputError(path + ": expected {\"min\", \"max\"}");
  const auto lo = j.at("min").get<long long>();
  const auto hi = j.at("max").get<long long>();
  if (lo < 0 || hi < 0) throw InputError(path + ": bounds must be non-negative");
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

json window_to(const WordWindow& w) { return {{"min", w.min}, {"max", w.max}}; }

Alphabet alphabet_from(const json& j) {
  const auto size = j.at("size").get<long long>();
  if (size <= 0) throw InputError("alphabet.size must be positive");
  const TokenClass def = class_from_name(j.value("default_class", std::string("word_start")));
  Alphabet a = Alphabet::make(static_cast<std::size_t>(size), j.value("eos", 0), j.value("pad", 1), def);
  for (const auto* key : {"word_start", "continuation", "boundary"}) {
    if (!j.contains(key)) continue;
    const TokenClass c = class_from_name(key);
    for (Token w : phrase_from(j.at(key), std::string("alphabet.") + key)) {
      if (w < 0 || w >= size) throw InputError(std::string("alphabet.") + key + ": token out of range");
      if (!a.is_content(w)) throw InputError(std::string("alphabet.") + key + ": cannot reclassify EOS or PAD");
      a.classes[static_cast<std::size_t>(w)] = c;
    }
  }
  return a;
}

json alphabet_to(const Alphabet& a) {
  // Majority class becomes the default; the rest are listed.
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t w = 0; w < a.size(); ++w) {
    if (a.is_content(static_cast<Token>(w))) ++counts[static_cast<std::size_t>(a.classes[w])];
  }
  const auto def = static_cast<TokenClass>(std::max_element(counts, counts + 3) - counts);
  json j{{"size", a.size()}, {"eos", a.eos}, {"pad", a.pad}, {"default_class", class_name(def)}};
  for (TokenClass c : {TokenClass::kWordStart, TokenClass::kContinuation, TokenClass::kBoundary}) {
    if (c == def) continue;
    json ids = json::array();
    for (std::size_t w = 0; w < a.size(); ++w) {
      if (a.classes[w] == c) ids.push_back(w);
    }
    if (!ids.empty()) j[class_name(c)] = ids;
  }
  return j;
}

json to_json(const ConstraintSpec& spec) {
  json j{{"version", kSpecVersion}, {"alphabet", alphabet_to(spec.alphabet)}, {"horizon", spec.horizon}};
  json groups = json::array();
  for (const auto& g : spec.keyphrase_groups) groups.push_back(g);
  j["keyphrases"] = groups;
  json segs = json::array();
  for (const auto& s : spec.ordered_segments) {
    json e{{"tokens", s.tokens}};
    if (s.window_after) e["window_after"] = window_to(*s.window_after);
    segs.push_back(e);
  }
  j["ordered_segments"] = segs;
  if (spec.word_length) j["word_length"] = window_to(*spec.word_length);
  j["end_phrase"] = spec.end_phrase;
  j["suffix"] = spec.suffix;
  j["forbidden"] = spec.forbidden;
  return j;
}

}  // namespace

ConstraintSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("constraint JSON does not parse: ") + e.what());
  }
  try {
    if (!j.is_object()) throw InputError("constraint JSON must be an object");
    if (j.value("version", kSpecVersion) != kSpecVersion) throw InputError("unsupported constraint version");
    ConstraintSpec spec;
    spec.alphabet = alphabet_from(j.at("alphabet"));
    spec.horizon = j.value("horizon", 32);
    if (j.contains("keyphrases")) {
      const auto& groups = j.at("keyphrases");
      for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<Phrase> variants;
        for (std::size_t v = 0; v < groups[g].size(); ++v) {
          variants.push_back(phrase_from(groups[g][v], "keyphrases[" + std::to_string(g) + "][" + std::to_string(v) + "]"));
        }
        spec.keyphrase_groups.push_back(std::move(variants));
      }
    }
    if (j.contains("ordered_segments")) {
      const auto& segs = j.at("ordered_segments");
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string path = "ordered_segments[" + std::to_string(i) + "]";
        OrderedSegment s;
        s.tokens = phrase_from(segs[i].at("tokens"), path);
        if (segs[i].contains("window_after") && !segs[i].at("window_after").is_null()) {
          s.window_after = window_from(segs[i].at("window_after"), path + ".window_after");
        }
        spec.ordered_segments.push_back(std::move(s));
      }
    }
    if (j.contains("word_length") && !j.at("word_length").is_null()) {
      spec.word_length = window_from(j.at("word_length"), "word_length");
    }
    if (j.contains("end_phrase")) spec.end_phrase = phrase_from(j.at("end_phrase"), "end_phrase");
    if (j.contains("suffix")) spec.suffix = phrase_from(j.at("suffix"), "suffix");
    if (j.contains("forbidden")) {
      const auto& f = j.at("forbidden");
      for (std::size_t i = 0; i < f.size(); ++i) {
        spec.forbidden.push_back(phrase_from(f[i], "forbidden[" + std::to_string(i) + "]"));
      }
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw InputError(std::string("constraint JSON: ") + e.what());
  }
}

std::string spec_to_json(const ConstraintSpec& spec) { return to_json(spec).dump(2); }

std::string canonical_key(const ConstraintSpec& spec) { return to_json(spec).dump(); }

}  // namespace dfaguide
