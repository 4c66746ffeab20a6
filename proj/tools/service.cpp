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

#include "service.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "httplib.h"

#include "dfaguide/distill.hpp"
#include "dfaguide/error.hpp"
#include "dfaguide/oracle.hpp"

namespace dfaguide::service {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxSuggestions = 16;
constexpr std::size_t kMaxWindow = 32;

Reply error_reply(int status, const std::string& message) { return {status, {{"error", message}}}; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The request fields as a text-level constraint file.
json text_spec_of(const json& req) {
  json spec = json::object();
  if (req.contains("keyphrases")) spec["keyphrases"] = req["keyphrases"];
  if (req.contains("word_length")) spec["word_length"] = req["word_length"];
  return spec;
}

void validate_request(const json& req) {
  if (!req.is_object()) throw InputError("request body must be a JSON object");
  static const std::set<std::string> known = {"prefix", "suffix", "keyphrases", "word_length", "num_suggestions", "seed"};
  for (const auto& [key, value] : req.items()) {
    if (!known.count(key)) throw InputError("unknown field '" + key + "'");
  }
  if (req.contains("prefix") && !req["prefix"].is_string()) throw InputError("prefix must be a string");
  if (req.contains("suffix") && !req["suffix"].is_null() && !req["suffix"].is_string()) {
    throw InputError("suffix must be a string");
  }
  if (req.contains("num_suggestions")) {
    const auto& n = req["num_suggestions"];
    if (!n.is_number_unsigned() || n.get<std::size_t>() < 1 || n.get<std::size_t>() > kMaxSuggestions) {
      throw InputError("num_suggestions must be an integer in [1, 16]");
    }
  }
  if (req.contains("seed") && !req["seed"].is_number_unsigned()) throw InputError("seed must be a non-negative integer");
  if (req.contains("word_length")) {
    const auto& w = req["word_length"];
    if (!w.is_object() || !w.contains("min") || !w.contains("max") || !w["min"].is_number_unsigned() ||
        !w["max"].is_number_unsigned()) {
      throw InputError("word_length must be {\"min\": a, \"max\": b}");
    }
    const auto lo = w["min"].get<std::size_t>(), hi = w["max"].get<std::size_t>();
    if (lo < 1 || hi > kMaxWindow || lo > hi) throw InputError("word_length must satisfy 1 <= min <= max <= 32");
  }
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  try {
    tok_ = std::make_unique<text::WordTokenizer>(text::WordTokenizer::load(config_.vocab_path));
    const std::string bytes = read_file(config_.model_path);
    auto hmm = std::make_unique<Hmm>(load_hmm(config_.model_path));
    if (hmm->vocab_size() != tok_->size()) {
      throw InputError("model vocabulary " + std::to_string(hmm->vocab_size()) + " does not match vocabulary file " +
                       std::to_string(tok_->size()));
    }
    if (config_.base_lm == "ngram") {
      auto ngram = std::make_unique<NgramLm>(tok_->size(), config_.lm_order, 0.1);
      for (const auto& seq : tok_->sentence_corpus(read_file(config_.lm_text), config_.horizon)) {
        ngram->train_sequence(seq);
      }
      lm_ = std::move(ngram);
    } else if (config_.base_lm == "hmm") {
      lm_ = std::make_unique<HmmLm>(*hmm);
    } else {
      throw InputError("unknown base LM '" + config_.base_lm + "'");
    }
    file_hash_ = hex64(fnv1a64(bytes));
    hmm_ = std::move(hmm);
  } catch (const std::exception& e) {
    load_error_ = e.what();
    lm_.reset();
    hmm_.reset();
  }
}

Reply Service::health() const {
  json body{{"version", "v1"}, {"model_loaded", ready()}, {"status", ready() ? "ok" : "degraded"}};
  if (!ready()) body["error"] = load_error_;
  return {200, body};
}

Reply Service::model() const {
  if (!ready()) return error_reply(503, "model not loaded: " + load_error_);
  return {200,
          {{"fingerprint", file_hash_},
           {"parameter_fingerprint", hex64(hmm_->fingerprint())},
           {"num_hidden", hmm_->num_hidden()},
           {"vocab_size", hmm_->vocab_size()},
           {"horizon", config_.horizon},
           {"num_samples", config_.num_samples},
           {"base_lm", lm_->name()}}};
}

std::size_t Service::cache_hits() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return hits_;
}

std::shared_ptr<const Service::Compiled> Service::compiled(const ConstraintSpec& spec) {
  const std::string key = canonical_key(spec);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      ++hits_;
      return it->second.first;
    }
  }
  auto entry = std::make_shared<Compiled>(Compiled{spec, compile(spec), std::nullopt});
  if (!entry->result.empty_language) entry->table.emplace(precompute_backward(*hmm_, entry->result.dfa, spec.horizon));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!cache_.count(key) && config_.cache_size > 0) {
    lru_.push_front(key);
    cache_.emplace(key, std::make_pair(entry, lru_.begin()));
    while (cache_.size() > config_.cache_size) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
  }
  return entry;
}

Reply Service::generate(const std::string& body) {
  if (!ready()) return error_reply(503, "model not loaded: " + load_error_);
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error_reply(400, std::string("body is not valid JSON: ") + e.what());
  }
  ConstraintSpec spec;
  std::vector<Token> context;
  std::vector<Token> suffix;
  try {
    validate_request(req);
    spec = spec_from_json(text::text_spec_to_tokens(text_spec_of(req), *tok_, config_.horizon).dump());
    context = tok_->encode(req.value("prefix", std::string()));
    if (req.contains("suffix") && req["suffix"].is_string()) {
      // Only the start of the suffix constrains the insertion; it stops at
      // the first word the model cannot produce.
      for (Token w : tok_->encode(req["suffix"].get<std::string>())) {
        if (w == text::WordTokenizer::kUnk || suffix.size() == config_.max_suffix_tokens) break;
        suffix.push_back(w);
      }
    }
    spec.suffix = suffix;
    spec.validate();
  } catch (const text::TextError& e) {
    return error_reply(400, e.what());
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }

  const auto entry = compiled(spec);
  const auto unsatisfiable = [&] {
    const auto d = diagnose_unsatisfiable(spec, spec.horizon);
    json b{{"error", "unsatisfiable constraint"}};
    b["clause"] = d ? json(d->clause) : json();
    b["message"] = d ? d->message : "no accepted sequence has positive probability under the model";
    return Reply{422, b};
  };
  if (entry->result.empty_language || entry->table->log_acceptance(*hmm_, entry->result.dfa.initial()) == kNegInf) return unsatisfiable();

  DecodeOptions options;
  options.temperature = config_.temperature;
  RerankResult rr;
  try {
    rr = sample_and_rerank(*hmm_, entry->result.dfa, *entry->table, *lm_, options, config_.num_samples,
                           req.value("seed", std::uint64_t{0}), context, config_.threads);
  } catch (const UnsatisfiableError&) {
    return unsatisfiable();
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }

  const std::size_t wanted = req.value("num_suggestions", std::size_t{3});
  json suggestions = json::array();
  std::set<std::string> seen;
  for (std::size_t idx : rr.ranking) {
    if (suggestions.size() == wanted) break;
    const auto& s = rr.samples[idx];
    if (!oracle::naive_constraint_check(spec, s.tokens) || !accepts(entry->result.dfa, s.tokens)) continue;
    std::vector<Token> g;
    for (Token w : s.tokens) {
      if (w == spec.alphabet.eos) break;
      g.push_back(w);
    }
    g.resize(g.size() - suffix.size());
    const std::string text = tok_->decode(g);
    if (!seen.insert(text).second) continue;
    suggestions.push_back({{"text", text},
                           {"tokens", g},
                           {"loglik", s.lm_loglik},
                           {"satisfied", true},
                           {"tokens_per_second", s.seconds > 0 ? static_cast<double>(s.tokens.size()) / s.seconds : 0.0}});
  }
  return {200,
          {{"version", "v1"},
           {"suggestions", suggestions},
           {"horizon", spec.horizon},
           {"suffix_used", tok_->decode(suffix)}}};
}

void Service::mount(httplib::Server& server) {
  server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  const auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.Get("/v1/model", [this, send](const httplib::Request&, httplib::Response& res) { send(res, model()); });
  server.Post("/v1/generate",
              [this, send](const httplib::Request& req, httplib::Response& res) { send(res, generate(req.body)); });
}

}  // namespace dfaguide::service
