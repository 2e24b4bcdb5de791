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

#include "tandem/http_clients.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"

namespace tandem {

using nlohmann::json;

std::string chat_complete(const ChatEndpoint& endpoint,
                          const std::vector<std::pair<std::string, std::string>>& messages,
                          int max_tokens) {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(endpoint.timeout_seconds);
    client.set_read_timeout(endpoint.timeout_seconds);
    if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key) {
        client.set_bearer_token_auth(key);
    }

    json body;
    body["model"] = endpoint.model;
    body["max_tokens"] = max_tokens;
    json jmessages = json::array();
    for (const auto& [role, content] : messages) {
        jmessages.push_back({{"role", role}, {"content", content}});
    }
    body["messages"] = std::move(jmessages);

    httplib::Result result = client.Post(endpoint.path, body.dump(), "application/json");
    if (!result) {
        throw ClientError("HTTP request to " + endpoint.base_url + endpoint.path + " failed: " +
                          httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw ClientError("HTTP " + std::to_string(result->status) + " from " + endpoint.base_url +
                          endpoint.path);
    }
    try {
        json reply = json::parse(result->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ClientError(std::string("malformed chat-completions reply: ") + e.what());
    }
}

SimulatorResponse HttpSimulatorClient::complete(const SimulatorRequest& request) {
    std::vector<std::pair<std::string, std::string>> messages;
    std::string system = "You stand in for a real-time assistant that answers while the user "
                         "is still speaking. Reply with the spoken answer only.";
    if (request.instruction) system += " " + *request.instruction;
    messages.emplace_back("system", std::move(system));
    std::string user = "Conversation so far:\n" + request.history;
    if (request.hint) user += "\n\nHint:\n" + *request.hint;
    messages.emplace_back("user", std::move(user));
    return {chat_complete(endpoint_, messages, request.max_tokens)};
}

std::string HttpLLMClient::respond(const std::string& partial_text, const std::string& history) {
    std::vector<std::pair<std::string, std::string>> messages;
    messages.emplace_back("system",
                          "You answer spoken questions. The transcript may be incomplete; give "
                          "your best current answer, briefly.");
    std::string user;
    if (!history.empty()) user += "Conversation so far:\n" + history + "\n\n";
    user += "Current (possibly partial) question:\n" + partial_text;
    messages.emplace_back("user", std::move(user));
    return chat_complete(endpoint_, messages, 256);
}

double HttpJudgeClient::score(const JudgeRequest& request) {
    std::vector<std::pair<std::string, std::string>> messages;
    messages.emplace_back("system",
                          "Rate how well the answer matches the reference on a scale of 0 to 10. "
                          "Reply with the number only.");
    messages.emplace_back("user", "Question:\n" + request.question + "\n\nReference:\n" +
                                      request.reference + "\n\nAnswer:\n" + request.answer);
    std::string reply = chat_complete(endpoint_, messages, 8);
    std::size_t pos = reply.find_first_of("0123456789");
    if (pos == std::string::npos) throw ClientError("judge reply carries no rating: " + reply);
    double rating = std::strtod(reply.c_str() + pos, nullptr);
    if (rating < 0.0 || rating > 10.0) throw ClientError("judge rating out of range: " + reply);
    return rating / 10.0;
}

} // namespace tandem
