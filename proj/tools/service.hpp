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
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "json.hpp"

#include "dfaguide/base_lm.hpp"
#include "dfaguide/constraints.hpp"
#include "dfaguide/engine.hpp"
#include "dfaguide/hmm.hpp"
#include "tokenizer.hpp"

namespace httplib {
class Server;
}

namespace dfaguide::service {

struct ServiceConfig {
  std::string model_path;
  std::string vocab_path;
  std::size_t num_samples = 64;
  std::size_t horizon = 32;
  double temperature = 0.7;
  std::size_t cache_size = 32;
  std::size_t max_suffix_tokens = 6;
  std::size_t threads = 1;
  std::string cors_origin = "*";
  /// "hmm" or "ngram" (trained on lm_text).
  std::string base_lm = "hmm";
  std::string lm_text;
  std::size_t lm_order = 3;
};

struct Reply {
  int status = 200;
  nlohmann::json body;
};

/// Request handling without the transport, so it can be driven directly.
/// A model that fails to load leaves the service up but degraded: health
/// says so and generation answers 503.
class Service {
 public:
  explicit Service(ServiceConfig config);

  bool ready() const { return hmm_ != nullptr; }
  const ServiceConfig& config() const { return config_; }

  Reply health() const;
  Reply model() const;
  Reply generate(const std::string& body);

  /// Routes /v1/* on `server`, with CORS headers and preflight.
  void mount(httplib::Server& server);

  std::size_t cache_hits() const;

 private:
  struct Compiled {
    ConstraintSpec spec;
    CompileResult result;
    std::optional<BackwardTable> table;
  };
  std::shared_ptr<const Compiled> compiled(const ConstraintSpec& spec);

  ServiceConfig config_;
  std::string load_error_;
  std::string file_hash_;
  std::unique_ptr<Hmm> hmm_;
  std::unique_ptr<text::WordTokenizer> tok_;
  std::unique_ptr<BaseLm> lm_;

  mutable std::mutex cache_mutex_;
  std::list<std::string> lru_;
  std::unordered_map<std::string, std::pair<std::shared_ptr<const Compiled>, std::list<std::string>::iterator>> cache_;
  std::size_t hits_ = 0;
};

}  // namespace dfaguide::service
