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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "dfaguide/constraints.hpp"
#include "dfaguide/distill.hpp"
#include "dfaguide/oracle.hpp"
#include "service.hpp"
#include "tokenizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using dfaguide::service::Reply;
using dfaguide::service::Service;
using dfaguide::service::ServiceConfig;
using dfaguide::text::WordTokenizer;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a, 64-bit, written out here to check the model fingerprint.
std::string fnv_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Fixture {
  fs::path dir, vocab, model;
  std::string stories;

  Fixture() {
    dir = fs::temp_directory_path() / "dfaguide_service_test";
    fs::create_directories(dir);
    vocab = dir / "vocab.txt";
    model = dir / "model.bin";
    stories = std::string(DFAGUIDE_DATA_DIR) + "/stories.txt";
    const std::string text = slurp(stories);
    const WordTokenizer tok = WordTokenizer::build(text);
    tok.save(vocab.string());
    dfaguide::Corpus corpus;
    corpus.length = 16;
    for (const auto& s : tok.sentence_corpus(text, 16)) corpus.append(s);
    dfaguide::EmConfig em;
    em.num_hidden = 12;
    em.max_iters = 15;
    em.seed = 2;
    em.num_threads = 1;
    dfaguide::save_hmm(dfaguide::fit_baum_welch(corpus, tok.size(), em).hmm, model.string());
  }

  ServiceConfig config() const {
    ServiceConfig c;
    c.model_path = model.string();
    c.vocab_path = vocab.string();
    c.horizon = 16;
    c.num_samples = 24;
    return c;
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

Service& shared_service() {
  static Service s(fixture().config());
  return s;
}

json strip_timing(json body) {
  for (auto& s : body["suggestions"]) s.erase("tokens_per_second");
  return body;
}

}  // namespace

TEST_CASE("health and model") {
  Service& s = shared_service();
  REQUIRE(s.ready());
  const Reply h = s.health();
  CHECK(h.status == 200);
  CHECK(h.body.at("status") == "ok");
  CHECK(h.body.at("model_loaded") == true);
  const Reply m = s.model();
  CHECK(m.status == 200);
  CHECK(m.body.at("fingerprint") == fnv_hex(slurp(fixture().model)));
  CHECK(m.body.at("num_hidden") == 12);
  CHECK(m.body.at("horizon") == 16);
  CHECK(m.body.at("base_lm") == "hmm");
}

TEST_CASE("generate returns verified suggestions") {
  Service& s = shared_service();
  const WordTokenizer tok = WordTokenizer::load(fixture().vocab.string());
  const std::string req = R"({"keyphrases": ["snow"], "word_length": {"min": 4, "max": 9}, "num_suggestions": 3, "seed": 4})";
  const Reply r = s.generate(req);
  REQUIRE_MESSAGE(r.status == 200, r.body.dump());
  CHECK(r.body.at("version") == "v1");
  CHECK(r.body.at("horizon") == 16);
  const auto& sug = r.body.at("suggestions");
  REQUIRE(sug.size() >= 1);
  CHECK(sug.size() <= 3);
  const auto spec = dfaguide::spec_from_json(
      dfaguide::text::text_spec_to_tokens(json::parse(R"({"keyphrases": ["snow"], "word_length": {"min": 4, "max": 9}})"), tok, 16)
          .dump());
  std::set<std::string> texts;
  double prev = 0.0;
  for (std::size_t i = 0; i < sug.size(); ++i) {
    const auto toks = sug[i].at("tokens").get<std::vector<std::int32_t>>();
    CHECK(sug[i].at("satisfied") == true);
    CHECK(tok.decode(toks) == sug[i].at("text"));
    CHECK(sug[i].at("text").get<std::string>().find("snow") != std::string::npos);
    // Pad back to the horizon and check with the clause checker.
    std::vector<std::int32_t> full = toks;
    if (full.size() < 16) full.push_back(WordTokenizer::kEos);
    full.resize(16, WordTokenizer::kPad);
    CHECK(dfaguide::oracle::naive_constraint_check(spec, full));
    CHECK(texts.insert(sug[i].at("text").get<std::string>()).second);
    const double ll = sug[i].at("loglik").get<double>();
    if (i > 0) CHECK(ll <= prev);
    prev = ll;
  }

  SUBCASE("identical requests give identical suggestions and hit the cache") {
    const std::size_t hits = s.cache_hits();
    const Reply again = s.generate(req);
    CHECK(strip_timing(again.body) == strip_timing(r.body));
    CHECK(s.cache_hits() == hits + 1);
  }
  SUBCASE("a prefix only changes the base model's context") {
    const Reply p = s.generate(R"({"prefix": "the dog", "keyphrases": ["snow"], "seed": 4})");
    REQUIRE(p.status == 200);
    for (const auto& x : p.body.at("suggestions")) CHECK(x.at("text").get<std::string>().find("snow") != std::string::npos);
  }
}

TEST_CASE("suffix handling") {
  Service& s = shared_service();
  const WordTokenizer tok = WordTokenizer::load(fixture().vocab.string());
  const Reply r = s.generate(R"({"suffix": "the snow . zebra owl", "seed": 1, "num_suggestions": 2})");
  REQUIRE_MESSAGE(r.status == 200, r.body.dump());
  CHECK(r.body.at("suffix_used") == "the snow.");
  const auto sfx = tok.encode_exact("the snow .");
  for (const auto& x : r.body.at("suggestions")) {
    auto full = x.at("tokens").get<std::vector<std::int32_t>>();
    for (auto t : full) CHECK(t != WordTokenizer::kEos);
    full.insert(full.end(), sfx.begin(), sfx.end());
    CHECK(full.size() <= 16);
  }
  const Reply longer = s.generate(R"({"suffix": "the snow fell and the dog ran home", "seed": 1})");
  REQUIRE(longer.status == 200);
  CHECK(tok.encode(longer.body.at("suffix_used").get<std::string>()).size() == 6);
}

TEST_CASE("request errors") {
  Service& s = shared_service();
  const auto status = [&](const std::string& body) { return s.generate(body).status; };
  CHECK(status("{") == 400);
  CHECK(status("[]") == 400);
  CHECK(status(R"({"colour": "red"})") == 400);
  CHECK(s.generate(R"({"colour": "red"})").body.at("error").get<std::string>().find("colour") != std::string::npos);
  CHECK(status(R"({"keyphrases": ["zebra"]})") == 400);
  CHECK(s.generate(R"({"keyphrases": ["zebra"]})").body.at("error").get<std::string>().find("zebra") != std::string::npos);
  CHECK(status(R"({"num_suggestions": 0})") == 400);
  CHECK(status(R"({"num_suggestions": 17})") == 400);
  CHECK(status(R"({"word_length": {"min": 0, "max": 3}})") == 400);
  CHECK(status(R"({"word_length": {"min": 2, "max": 40}})") == 400);
  CHECK(status(R"({"seed": -1})") == 400);
  CHECK(status(R"({"prefix": 3})") == 400);

  const Reply u = s.generate(R"({"keyphrases": ["snow"], "word_length": {"min": 20, "max": 30}})");
  CHECK(u.status == 422);
  CHECK(u.body.at("clause") == "word_length");
  CHECK(u.body.at("message").is_string());
}

TEST_CASE("a model that fails to load leaves the service degraded") {
  ServiceConfig c = fixture().config();
  c.model_path = (fixture().dir / "missing.bin").string();
  Service s(c);
  CHECK_FALSE(s.ready());
  const Reply h = s.health();
  CHECK(h.status == 200);
  CHECK(h.body.at("status") == "degraded");
  CHECK(h.body.at("error").get<std::string>().find("missing.bin") != std::string::npos);
  CHECK(s.model().status == 503);
  CHECK(s.generate("{}").status == 503);

  ServiceConfig bad_lm = fixture().config();
  bad_lm.base_lm = "transformer";
  CHECK_FALSE(Service(bad_lm).ready());
}

TEST_CASE("n-gram base model") {
  ServiceConfig c = fixture().config();
  c.base_lm = "ngram";
  c.lm_text = fixture().stories;
  Service s(c);
  REQUIRE(s.ready());
  CHECK(s.model().body.at("base_lm") == "ngram3");
  const Reply r = s.generate(R"({"keyphrases": ["snow"], "seed": 2})");
  CHECK(r.status == 200);
  CHECK(r.body.at("suggestions").size() >= 1);
}

TEST_CASE("HTTP transport") {
  Service& s = shared_service();
  httplib::Server server;
  s.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto h = client.Get("/v1/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(json::parse(h->body).at("status") == "ok");

  const auto pre = client.Options("/v1/generate");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  const auto g = client.Post("/v1/generate", R"({"keyphrases": ["snow"], "seed": 3})", "application/json");
  REQUIRE(g);
  CHECK(g->status == 200);
  CHECK(g->get_header_value("Content-Type") == "application/json");
  CHECK(json::parse(g->body).at("suggestions").size() >= 1);

  const auto bad = client.Post("/v1/generate", R"({"keyphrases": ["zebra"]})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  const auto m = client.Get("/v1/model");
  REQUIRE(m);
  CHECK(json::parse(m->body).at("fingerprint") == fnv_hex(slurp(fixture().model)));

  server.stop();
  th.join();
}
