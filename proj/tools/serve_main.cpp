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

// HTTP front end for interactive constrained generation.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"

#include "service.hpp"

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  dfaguide::service::ServiceConfig config;
  std::string host = env_or("DFAGUIDE_HOST", "127.0.0.1");
  int port = std::atoi(env_or("DFAGUIDE_PORT", "8080").c_str());

  CLI::App app{"Serve constrained generation over HTTP"};
  app.add_option("--model", config.model_path, "HMM file")->required();
  app.add_option("--vocab", config.vocab_path, "Vocabulary file")->required();
  app.add_option("--host", host, "Bind address (DFAGUIDE_HOST)")->capture_default_str();
  app.add_option("--port", port, "Port (DFAGUIDE_PORT)")->capture_default_str();
  app.add_option("--samples", config.num_samples, "Samples drawn per request before reranking")->capture_default_str();
  app.add_option("--horizon", config.horizon, "Tokens per suggestion")->capture_default_str();
  app.add_option("--temperature", config.temperature, "Softmax temperature")->capture_default_str();
  app.add_option("--cache-size", config.cache_size, "Compiled constraints kept")->capture_default_str();
  app.add_option("--threads", config.threads, "Sampling threads per request")->capture_default_str();
  app.add_option("--cors-origin", config.cors_origin, "Allowed browser origin")->capture_default_str();
  app.add_option("--base-lm", config.base_lm, "hmm or ngram")->check(CLI::IsMember({"hmm", "ngram"}));
  app.add_option("--lm-text", config.lm_text, "Training text for --base-lm ngram");
  app.add_option("--lm-order", config.lm_order, "N-gram order")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  dfaguide::service::Service service(config);
  if (!service.ready()) std::cerr << "dfaguide-serve: " << service.health().body["error"].get<std::string>() << '\n';
  httplib::Server server;
  service.mount(server);
  std::cerr << "dfaguide-serve: listening on " << host << ":" << port << '\n';
  if (!server.listen(host, port)) {
    std::cerr << "dfaguide-serve: cannot bind " << host << ":" << port << '\n';
    return 2;
  }
  return 0;
}
