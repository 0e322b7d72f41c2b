// Copyright 2026 The contactdiff Authors
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

#include "contactdiff/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace contactdiff {

FixtureLlmClient FixtureLlmClient::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("fixture file not found: " + path);
  std::vector<std::string> responses;
  std::string current, line;
  while (std::getline(in, line)) {
    if (line == "---") {
      responses.push_back(current);
      current.clear();
    } else {
      current += line;
      current += "\n";
    }
  }
  if (!current.empty()) responses.push_back(current);
  if (responses.empty()) {
    throw ConfigError("fixture file has no responses: " + path);
  }
  return FixtureLlmClient(std::move(responses));
}

std::string FixtureLlmClient::complete(const std::vector<ChatMessage>&) {
  if (next_ >= int(responses_.size())) {
    throw TransportError("fixture exhausted after " +
                         std::to_string(next_) + " responses");
  }
  return responses_[size_t(next_++)];
}

HttpLlmClient::HttpLlmClient(std::string url, std::string model,
                             std::string api_key)
    : url_(std::move(url)), model_(std::move(model)),
      api_key_(std::move(api_key)) {}

HttpLlmClient HttpLlmClient::from_env() {
  const char* url = std::getenv("CONTACTDIFF_LLM_URL");
  const char* model = std::getenv("CONTACTDIFF_LLM_MODEL");
  const char* key = std::getenv("CONTACTDIFF_LLM_KEY");
  if (!url || !model) {
    throw ConfigError(
        "LLM endpoint not configured: set CONTACTDIFF_LLM_URL and "
        "CONTACTDIFF_LLM_MODEL (and CONTACTDIFF_LLM_KEY if required), or "
        "use a fixture file");
  }
  return HttpLlmClient(url, model, key ? key : "");
}

std::string HttpLlmClient::complete(const std::vector<ChatMessage>& messages) {
  // Split the endpoint URL into origin and path.
  const auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("LLM URL must start with http:// or https://");
  }
  const auto path_start = url_.find('/', scheme_end + 3);
  const std::string origin =
      path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : url_.substr(path_start);

  nlohmann::json body;
  body["model"] = model_;
  auto& msgs = body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  }

  httplib::Client client(origin);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("LLM request failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("LLM endpoint returned HTTP " +
                         std::to_string(res->status) + ": " + res->body);
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed LLM response: ") + e.what());
  }
}

std::string extract_program_source(const std::string& response) {
  const auto fence = response.find("```");
  if (fence == std::string::npos) return response;
  auto body_start = response.find('\n', fence);
  if (body_start == std::string::npos) return response;
  ++body_start;
  const auto fence_end = response.find("```", body_start);
  if (fence_end == std::string::npos) return response.substr(body_start);
  return response.substr(body_start, fence_end - body_start);
}

GuidanceGenResult generate_guidance(const PromptBundle& bundle,
                                    LlmClient& client, int max_rounds,
                                    const guidescript::DslContext& ctx) {
  if (max_rounds < 1) throw ConfigError("generate_guidance: max_rounds >= 1");
  std::vector<ChatMessage> conversation;
  conversation.push_back({"user", bundle.render()});

  // Probe trajectory: plausible magnitudes from the normalizer midpoints.
  Array2 probe(ctx.horizon, ctx.act_dim + ctx.obs_dim);
  Rng probe_rng(0xc0ffee);
  for (int r = 0; r < probe.rows; ++r) {
    for (int c = 0; c < probe.cols; ++c) {
      double mid = 0.0, spread = 1.0;
      if (ctx.normalizer) {
        mid = ctx.normalizer->offset[c];
        spread = ctx.normalizer->scale[c];
      }
      probe(r, c) = mid + 0.3 * spread * probe_rng.gaussian();
    }
  }

  GuidanceGenResult result;
  for (int round = 1; round <= max_rounds; ++round) {
    const std::string response = client.complete(conversation);
    const std::string source = extract_program_source(response);
    std::string diagnostic;
    try {
      guidescript::Program program = guidescript::load_program(source, ctx);
      guidescript::calibrate(program, probe, ctx);
      guidescript::eval_grad(program, probe, ctx);  // probe execution
      result.program = std::move(program);
      result.rounds = round;
      return result;
    } catch (const ParseError& e) {
      std::ostringstream os;
      os << "parse/semantic error at line " << e.line << ", column "
         << e.column << ": " << e.what();
      if (!e.expected.empty()) {
        os << " (expected";
        for (const auto& x : e.expected) os << " " << x;
        os << ")";
      }
      diagnostic = os.str();
    } catch (const EvalError& e) {
      std::ostringstream os;
      os << "evaluation error at line " << e.line << ", column " << e.column
         << ": " << e.what();
      diagnostic = os.str();
    }
    result.diagnostics.push_back(diagnostic);
    conversation.push_back({"assistant", response});
    conversation.push_back(
        {"user", "The program failed validation.\n" + diagnostic +
                     "\nRespond with a corrected program in a fenced code "
                     "block."});
  }
  throw ExhaustionError("guidance generation failed after " +
                            std::to_string(max_rounds) + " round(s); last "
                            "error: " + result.diagnostics.back(),
                        result.diagnostics);
}

}  // namespace contactdiff
