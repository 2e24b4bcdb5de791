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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tandem/config.hpp"
#include "tandem/session.hpp"

namespace tandem {

// Prefix of a question as transcribed by the streaming recognizer at one
// snapshot. Here derived from ground-truth word alignments; a real STT
// adapter would produce the same shape.
struct PartialTranscript {
    std::string text;
    std::int64_t snapshot_time_ms = 0;
    std::int64_t words_observed = 0;

    bool operator==(const PartialTranscript&) const = default;
};

// One candidate response in flight from the back-end to the front-end.
// seq follows issue order; arrival order may differ (out-of-order delivery
// is legal and the front-end must cope).
struct OracleMessage {
    std::uint64_t seq = 0;
    std::string text;
    std::int64_t issued_at_ms = 0;
    std::int64_t arrived_at_ms = 0;
    std::int64_t source_words = 0;

    bool operator==(const OracleMessage&) const = default;
};

// Periodic partials for one question turn: one per backend cycle tick
// inside the turn, plus a final complete partial at the turn's end. Ticks
// on which no new word finished still emit (downstream deduplicates).
std::vector<PartialTranscript> stream_partials(const Turn& turn, std::int64_t backend_cycle_ms);

// Adapter slot for the streaming recognizer. Only the alignment-backed
// implementation ships; a live recognizer would plug in here with the same
// output shape.
class StreamingTranscriber {
public:
    virtual ~StreamingTranscriber() = default;
    virtual std::vector<PartialTranscript> transcribe(const Turn& turn,
                                                      std::int64_t backend_cycle_ms) = 0;
};

class AlignmentTranscriber : public StreamingTranscriber {
public:
    std::vector<PartialTranscript> transcribe(const Turn& turn,
                                              std::int64_t backend_cycle_ms) override {
        return stream_partials(turn, backend_cycle_ms);
    }
};

// Back-end LLM client. Deterministic mock for tests and offline runs; an
// HTTP adapter lives with the other chat-completions clients.
class LLMClient {
public:
    virtual ~LLMClient() = default;
    // Throws ClientError on failure.
    virtual std::string respond(const std::string& partial_text, const std::string& history) = 0;
};

// Canned corpus answers for complete questions; seeded template text for
// prefixes. Deterministic given (partial, history, seed).
class MockLLMClient : public LLMClient {
public:
    explicit MockLLMClient(std::uint64_t seed) : seed_(seed) {}
    // Learns question -> recorded answer pairs, so a complete partial gets
    // the knowledgeable response.
    void load_corpus(const std::vector<AlignedSession>& sessions);
    std::string respond(const std::string& partial_text, const std::string& history) override;
    std::size_t calls() const { return calls_; }

private:
    std::uint64_t seed_;
    std::map<std::string, std::string> answers_;
    std::size_t calls_ = 0;
};

// One back-end call for one partial. Empty candidates are a protocol
// violation by the client.
std::string respond(const PartialTranscript& partial, const std::string& history,
                    LLMClient& client);

struct Candidate {
    std::int64_t issued_at_ms = 0;
    std::string text;
    std::int64_t source_words = 0;
    std::size_t turn_index = 0;

    bool operator==(const Candidate&) const = default;
};

// Full live back-end pass over a session: partials per question, one LLM
// call per *distinct* partial text (unchanged partials skip the call), the
// history being every completed prior turn. Failed calls drop their cycle.
// Pass a transcriber to replace the alignment-backed one.
std::vector<Candidate> generate_candidates(const AlignedSession& session, const TandemConfig& cfg,
                                           LLMClient& client,
                                           StreamingTranscriber* transcriber = nullptr);

// Replay: candidates taken verbatim from a simulated-oracle schedule
// instead of calling any LLM.
struct ScheduledOracle;
std::vector<Candidate> candidates_from_schedule(const std::vector<ScheduledOracle>& schedule);

// Response-latency model for the relay. Sampled once per candidate.
class LatencyModel {
public:
    virtual ~LatencyModel() = default;
    virtual std::int64_t sample_ms(class Rng& rng) = 0;
};

// Constant base plus uniform jitter in [0, jitter_max_ms].
class UniformLatencyModel : public LatencyModel {
public:
    UniformLatencyModel(std::int64_t base_ms, std::int64_t jitter_max_ms)
        : base_ms_(base_ms), jitter_max_ms_(jitter_max_ms) {}
    std::int64_t sample_ms(Rng& rng) override;

private:
    std::int64_t base_ms_;
    std::int64_t jitter_max_ms_;
};

// Sequences candidates toward the front-end: seq in issue order, arrival
// at issue time plus sampled latency, output ordered by arrival. Every
// candidate appears exactly once. Deterministic given the seed.
std::vector<OracleMessage> relay(const std::vector<Candidate>& candidates,
                                 LatencyModel& latency_model, std::uint64_t rng_seed);

} // namespace tandem
