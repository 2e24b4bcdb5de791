// Copyright 2026 The Tandem Authors.
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

#include <string>

#include "tandem/backend.hpp"
#include "tandem/harness.hpp"
#include "tandem/oracle_sim.hpp"

namespace tandem {

// Chat-completions-style endpoint shared by the HTTP adapters. The API key
// is read from the named environment variable when present and sent as a
// bearer token.
struct ChatEndpoint {
    std::string base_url = "http://localhost:8000"; // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model = "simulator";
    std::string api_key_env = "TANDEM_API_KEY";
    int timeout_seconds = 30;
};

// POSTs {"model", "messages":[{role,content}...], "max_tokens"} and returns
// choices[0].message.content. Throws ClientError on transport or protocol
// failure.
std::string chat_complete(const ChatEndpoint& endpoint,
                          const std::vector<std::pair<std::string, std::string>>& messages,
                          int max_tokens);

class HttpSimulatorClient : public SimulatorClient {
public:
    explicit HttpSimulatorClient(ChatEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    SimulatorResponse complete(const SimulatorRequest& request) override;

private:
    ChatEndpoint endpoint_;
};

class HttpLLMClient : public LLMClient {
public:
    explicit HttpLLMClient(ChatEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::string respond(const std::string& partial_text, const std::string& history) override;

private:
    ChatEndpoint endpoint_;
};

// Asks for a single numeric rating in [0, 10] and parses the first number
// in the reply, scaled to [0, 1].
class HttpJudgeClient : public JudgeClient {
public:
    explicit HttpJudgeClient(ChatEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    double score(const JudgeRequest& request) override;

private:
    ChatEndpoint endpoint_;
};

} // namespace tandem
