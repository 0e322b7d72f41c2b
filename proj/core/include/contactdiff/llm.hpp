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

#ifndef CONTACTDIFF_LLM_HPP_
#define CONTACTDIFF_LLM_HPP_

#include <string>
#include <vector>

#include "contactdiff/envs.hpp"
#include "contactdiff/guidescript.hpp"

namespace contactdiff {

// Six-part prompt for guidance-function generation: purpose, guidance
// structure (dual-phase), environment description, function prototype (the
// DSL term form), task instruction, and few-shot hints. render() also
// appends the grammar reference.
struct PromptBundle {
  std::string function_purpose;
  std::string guidance_structure;
  std::string environment_description;
  std::string function_prototype;
  std::string task_instruction;
  std::string fewshot_hints;

  std::string render() const;
};

// Deterministic. Empty hints select a default hints section. Throws
// ConfigError for unknown envs.
PromptBundle render_prompt(const EnvSpec& spec,
                           const std::string& task_instruction,
                           const std::string& hints = "");

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// Replays recorded responses: a plain-text file of response bodies
// separated by lines containing exactly "---". One response per round;
// running past the end raises TransportError.
class FixtureLlmClient : public LlmClient {
 public:
  static FixtureLlmClient from_file(const std::string& path);
  explicit FixtureLlmClient(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}
  std::string complete(const std::vector<ChatMessage>& messages) override;
  int rounds_used() const { return next_; }

 private:
  std::vector<std::string> responses_;
  int next_ = 0;
};

// Chat-completion endpoint client. Configuration comes from the
// environment: CONTACTDIFF_LLM_URL (full endpoint URL),
// CONTACTDIFF_LLM_MODEL, CONTACTDIFF_LLM_KEY.
class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient(std::string url, std::string model, std::string api_key);
  // Throws ConfigError if the environment variables are unset.
  static HttpLlmClient from_env();
  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  std::string url_;
  std::string model_;
  std::string api_key_;
};

struct GuidanceGenResult {
  guidescript::Program program;
  int rounds = 0;
  std::vector<std::string> diagnostics;  // one entry per failed round
};

// Query -> parse/check/probe-evaluate -> on failure append the structured
// error to the conversation and retry, at most max_rounds times. Only
// parsed programs are ever evaluated. Exhaustion raises ExhaustionError
// carrying every diagnostic.
GuidanceGenResult generate_guidance(const PromptBundle& bundle,
                                    LlmClient& client, int max_rounds,
                                    const guidescript::DslContext& ctx);

// Extracts the program source from a model response: the first fenced code
// block if present, otherwise the whole text.
std::string extract_program_source(const std::string& response);

}  // namespace contactdiff

#endif  // CONTACTDIFF_LLM_HPP_
