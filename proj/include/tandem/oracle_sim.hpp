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

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tandem/config.hpp"
#include "tandem/session.hpp"

namespace tandem {

// Fraction of the current question's words fully uttered by some snapshot
// time, kept as an exact rational so the hint-level boundaries are
// deterministic (13/20 must not depend on floating-point rounding).
struct CompletenessRatio {
    std::int64_t observed = 0; // words heard so far
    std::int64_t total = 1;    // words in the full utterance

    double value() const { return static_cast<double>(observed) / static_cast<double>(total); }
    bool complete() const { return observed == total; }

    // Exact comparison against p/q via cross-multiplication.
    bool less_than(std::int64_t p, std::int64_t q) const { return observed * q < p * total; }

    bool operator==(const CompletenessRatio&) const = default;
};

CompletenessRatio completeness(std::int64_t words_observed, std::int64_t total_words);

// Stage 0-5 controlling how much of the ground-truth response the oracle
// simulator may use. Deterministic function of the completeness ratio:
//   0: [0, 0.5)   1: [0.5, 0.65)   2: [0.65, 0.8)
//   3: [0.8, 0.95) 4: [0.95, 1)    5: exactly 1
// Each interior boundary belongs to the higher level.
using HintLevel = int;

HintLevel hint_level(const CompletenessRatio& r);

// The per-level hint-usage instructions, fixed verbatim as the prompt
// contract. index 1..4; levels 0 and 5 carry no instruction.
std::string_view hint_instruction(HintLevel level);

// Prompt for the simulator LLM at levels 0-4. history is every word of the
// session heard so far; hint is the recorded response transcript (levels
// 1-4 only).
struct OraclePrompt {
    std::string history;
    std::optional<std::string> hint;
    std::optional<std::string> instruction;

    bool operator==(const OraclePrompt&) const = default;
};

// Level 5: the input is complete, no generation happens, the recorded
// response is used directly.
struct Level5Passthrough {
    std::string text;

    bool operator==(const Level5Passthrough&) const = default;
};

struct PromptBuild {
    HintLevel level = 0;
    CompletenessRatio ratio;
    std::variant<OraclePrompt, Level5Passthrough> request;
};

// Snapshot of a question turn at time_ms. turn_index must address a User
// turn followed by a System turn (its ground-truth response); anything else
// is a StructuralError.
PromptBuild build_prompt(const AlignedSession& session, std::size_t turn_index,
                         std::int64_t time_ms);

// One back-end stand-in response produced by the simulation pipeline.
struct SimulatedOracle {
    std::string text;
    std::int64_t generated_at_ms = 0;
    HintLevel level = 0;
    CompletenessRatio ratio;

    bool operator==(const SimulatedOracle&) const = default;
};

struct ScheduledOracle {
    std::int64_t emit_time_ms = 0;
    std::size_t turn_index = 0;
    SimulatedOracle oracle;

    bool operator==(const ScheduledOracle&) const = default;
};

// Abstract simulator-LLM client. request/response shapes mirror a plain
// chat completion; implementations: MockSimulatorClient (deterministic,
// used by tests) and HttpSimulatorClient (chat-completions JSON).
struct SimulatorRequest {
    std::string history;
    std::optional<std::string> hint;
    std::optional<std::string> instruction;
    int max_tokens = 256;
};

struct SimulatorResponse {
    std::string text;
};

class SimulatorClient {
public:
    virtual ~SimulatorClient() = default;
    // Throws ClientError on failure.
    virtual SimulatorResponse complete(const SimulatorRequest& request) = 0;
};

// Retry policy for simulator failures: two retries with exponential
// backoff, then the injection point is skipped (the next cycle supersedes
// it anyway).
struct RetryPolicy {
    int retries = 2;
    std::int64_t backoff_ms = 100; // doubled per retry; 0 in tests
};

// Runs the simulator (or the passthrough) for one injection point.
// Passthrough never touches the client. Exhausted retries rethrow
// ClientError; callers decide whether to skip.
SimulatedOracle generate_oracle(const PromptBuild& build, SimulatorClient& simulator,
                                std::int64_t generated_at_ms, const RetryPolicy& retry = {});

// Simulated-oracle schedule for a whole session: snapshots every
// backend_cycle_ms from each question's start through its end, plus one
// final level-5 entry at the frame after the question's last word, which
// carries the recorded response verbatim. Injection points whose simulator
// calls fail permanently are skipped.
std::vector<ScheduledOracle> schedule_oracles(const AlignedSession& session,
                                              const TandemConfig& cfg,
                                              SimulatorClient& simulator,
                                              const RetryPolicy& retry = {});

// Deterministic template-based simulator. Output depends only on
// (seed, request).
class MockSimulatorClient : public SimulatorClient {
public:
    explicit MockSimulatorClient(std::uint64_t seed) : seed_(seed) {}
    SimulatorResponse complete(const SimulatorRequest& request) override;

private:
    std::uint64_t seed_;
};

// Mock that fails a fixed number of times before delegating; exercises the
// retry policy.
class FlakySimulatorClient : public SimulatorClient {
public:
    FlakySimulatorClient(SimulatorClient& inner, int failures_before_success)
        : inner_(inner), remaining_failures_(failures_before_success) {}
    SimulatorResponse complete(const SimulatorRequest& request) override;
    int calls() const { return calls_; }

private:
    SimulatorClient& inner_;
    int remaining_failures_;
    int calls_ = 0;
};

// Augmented-output JSONL: one record per (session, injection point), with
// the ratio rendered exactly as "n/N".
std::string scheduled_oracle_to_json(const std::string& session_id, const ScheduledOracle& entry);
struct OracleFileRecord {
    std::string session_id;
    ScheduledOracle entry;
};
OracleFileRecord scheduled_oracle_from_json(const std::string& line);

void write_oracle_file(const std::string& path,
                       const std::vector<std::pair<std::string, std::vector<ScheduledOracle>>>& by_session);
std::vector<OracleFileRecord> read_oracle_file(const std::string& path);

} // namespace tandem
