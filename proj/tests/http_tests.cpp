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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/http_clients.hpp"

using namespace tandem;
using nlohmann::json;

namespace {

// Loopback chat-completions stand-in; records the last request body.
class LoopbackServer {
public:
    LoopbackServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            last_body = req.body;
            int failures = failures_remaining.load();
            if (failures > 0) {
                failures_remaining = failures - 1;
                res.status = 500;
                return;
            }
            json body = json::parse(req.body);
            std::string content = reply_prefix + body["messages"].back()["content"].get<std::string>();
            if (!canned_reply.empty()) content = canned_reply;
            json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LoopbackServer() {
        server_.stop();
        thread_.join();
    }

    ChatEndpoint endpoint() const {
        ChatEndpoint ep;
        ep.base_url = "http://127.0.0.1:" + std::to_string(port_);
        ep.model = "test-model";
        return ep;
    }

    std::string last_body;
    std::string reply_prefix = "echo: ";
    std::string canned_reply;
    std::atomic<int> failures_remaining{0};

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST_CASE("http simulator client speaks the chat-completions protocol") {
    LoopbackServer server;
    HttpSimulatorClient client(server.endpoint());

    SimulatorRequest request;
    request.history = "what is the capital of";
    request.hint = "it is paris";
    request.instruction = std::string(hint_instruction(4));
    request.max_tokens = 64;

    SimulatorResponse response = client.complete(request);
    CHECK(response.text.rfind("echo: ", 0) == 0);

    json body = json::parse(server.last_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["max_tokens"] == 64);
    REQUIRE(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"].get<std::string>().find("Use the hint.") !=
          std::string::npos);
    CHECK(body["messages"][1]["role"] == "user");
    std::string user = body["messages"][1]["content"].get<std::string>();
    CHECK(user.find("what is the capital of") != std::string::npos);
    CHECK(user.find("it is paris") != std::string::npos);
}

TEST_CASE("http back-end client embeds history and partial") {
    LoopbackServer server;
    HttpLLMClient client(server.endpoint());
    std::string reply = client.respond("who won the", "earlier context");
    CHECK(reply.rfind("echo: ", 0) == 0);
    json body = json::parse(server.last_body);
    std::string user = body["messages"][1]["content"].get<std::string>();
    CHECK(user.find("earlier context") != std::string::npos);
    CHECK(user.find("who won the") != std::string::npos);
}

TEST_CASE("http judge parses a numeric rating") {
    LoopbackServer server;
    HttpJudgeClient judge(server.endpoint());

    server.canned_reply = "7";
    CHECK(judge.score({"q", "ref", "ans"}) == doctest::Approx(0.7));

    server.canned_reply = "rating: 9.5";
    CHECK(judge.score({"q", "ref", "ans"}) == doctest::Approx(0.95));

    server.canned_reply = "no idea";
    CHECK_THROWS_AS(judge.score({"q", "ref", "ans"}), ClientError);
}

TEST_CASE("server errors surface as ClientError and the retry policy covers them") {
    LoopbackServer server;
    HttpSimulatorClient client(server.endpoint());

    server.failures_remaining = 1;
    SimulatorRequest request;
    request.history = "flaky";
    CHECK_THROWS_AS(client.complete(request), ClientError);

    // One failure already consumed; generate_oracle's retries absorb two more.
    server.failures_remaining = 2;
    PromptBuild build;
    build.level = 0;
    build.ratio = completeness(0, 1);
    build.request = OraclePrompt{"flaky history", std::nullopt, std::nullopt};
    SimulatedOracle oracle = generate_oracle(build, client, 0, {2, 0});
    CHECK(oracle.text.rfind("echo: ", 0) == 0);
}

TEST_CASE("unreachable endpoint is a ClientError") {
    ChatEndpoint endpoint;
    endpoint.base_url = "http://127.0.0.1:9"; // discard port, nothing listens
    endpoint.timeout_seconds = 1;
    HttpSimulatorClient client(endpoint);
    SimulatorRequest request;
    request.history = "hello";
    CHECK_THROWS_AS(client.complete(request), ClientError);
}
