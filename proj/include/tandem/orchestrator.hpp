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
#include <vector>

#include "tandem/backend.hpp"
#include "tandem/config.hpp"
#include "tandem/frame.hpp"
#include "tandem/session.hpp"
#include "tandem/tokens.hpp"

namespace tandem {

enum class EventKind : std::uint8_t {
    OracleArrived,
    OracleSuperseded,
    EmissionStart,
    EmissionEnd,
    ForcedDelayEnd,
};

std::string_view event_kind_name(EventKind kind);
EventKind event_kind_from_name(std::string_view name);

struct TraceEvent {
    std::int64_t time_ms = 0;
    EventKind kind = EventKind::OracleArrived;
    std::optional<std::uint64_t> seq;

    bool operator==(const TraceEvent&) const = default;
};

// Emission state of the oracle stream. At most one message is being
// emitted; a newer arrival replaces it outright because it was generated
// from a longer user transcript. tokens holds [boundary] ++ message tokens;
// next_index marks how far emission has progressed.
struct OracleQueueState {
    struct Active {
        std::uint64_t seq = 0;
        std::vector<TokenId> tokens;
        std::size_t next_index = 0;

        bool begun() const { return next_index > 0; }
        std::size_t remaining() const { return tokens.size() - next_index; }
    };

    std::optional<Active> active;
    std::optional<std::uint64_t> latest_arrived_seq;
};

// Recency-priority merge. A newer seq discards whatever the old message had
// left to emit and queues [boundary] ++ tokenize(text); an older (stale,
// out-of-order) seq is dropped even when nothing is active. A repeat of the
// newest seq is a protocol error. Appends OracleArrived/OracleSuperseded to
// events, stamped now_ms.
OracleQueueState merge_oracle(OracleQueueState state, const OracleMessage& arrival,
                              Tokenizer& tokenizer, std::int64_t now_ms,
                              std::vector<TraceEvent>& events,
                              TokenId boundary_token = kBoundaryToken);

// Per-frame oracle slot emitter wrapping OracleQueueState. When a frame is
// not eligible (forced delay in effect) the slot stays pad and an
// interrupted emission is re-armed from its start, so the full message is
// re-announced once output is allowed again.
class OracleStreamEmitter {
public:
    OracleStreamEmitter(const TandemConfig& cfg, Tokenizer& tokenizer)
        : cfg_(cfg), tokenizer_(tokenizer) {}

    void on_arrival(const OracleMessage& message, std::int64_t now_ms,
                    std::vector<TraceEvent>& events);
    TokenId step(bool eligible, std::int64_t now_ms, std::vector<TraceEvent>& events);

    const OracleQueueState& state() const { return state_; }

private:
    TandemConfig cfg_;
    Tokenizer& tokenizer_;
    OracleQueueState state_;
};

struct StepOutput {
    TokenId monologue = kPadToken;
    TokenId output_audio = kSilenceToken;
};

// The pluggable front-end. step consumes this frame's input-audio and
// oracle tokens and yields this frame's monologue and output-audio tokens.
class FrontEndModel {
public:
    virtual ~FrontEndModel() = default;
    virtual StepOutput step(TokenId input_audio, TokenId oracle_slot) = 0;
    virtual void reset() = 0;
};

// Deterministic stand-in for the trained speech model. Stays quiet until an
// oracle boundary arrives, then repeats the incoming oracle tokens on the
// monologue stream one frame late while holding a fixed non-silence audio
// token. A fresh boundary drops whatever was pending, which makes
// supersession directly observable in the output streams.
class StubFrontEnd : public FrontEndModel {
public:
    explicit StubFrontEnd(const TandemConfig& cfg, TokenId speech_audio_token = kFirstWordToken,
                          TokenId filler_monologue_token = kPadToken)
        : cfg_(cfg), speech_audio_(speech_audio_token), filler_(filler_monologue_token) {}

    StepOutput step(TokenId input_audio, TokenId oracle_slot) override;
    void reset() override;

private:
    TandemConfig cfg_;
    TokenId speech_audio_;
    TokenId filler_;
    std::optional<TokenId> pending_;
    bool copying_ = false;
};

// Everything observable about one simulated session.
struct SessionTrace {
    std::string session_id;
    std::int64_t frame_period_ms = 80;
    std::vector<FrameRecord> frames;
    std::vector<TraceEvent> events;
    std::optional<std::string> abort_reason;

    bool operator==(const SessionTrace&) const = default;
};

// Drives the frame clock over the whole session span (extended far enough
// that the last message can finish emitting): drains oracle arrivals at
// each tick, fills the oracle slot with recency supersession, steps the
// model, and applies the forced-delay gate. With forced_delay_ms = d > 0,
// every frame from a question's start until d past its end is forced to
// silence/padding; d = 0 leaves the model unconstrained. A model failure
// aborts with the trace truncated at the failing frame.
SessionTrace run_session(const AlignedSession& session, const TandemConfig& cfg,
                         FrontEndModel& model, const std::vector<OracleMessage>& oracle_source,
                         Tokenizer& tokenizer);

// Arrival-time jitter for training robustness: each entry moves by an
// independent uniform offset in [0, jitter_max_ms] and the list is
// re-sorted by the jittered time (order inversions are intentional).
struct TimedText {
    std::int64_t emit_time_ms = 0;
    std::string text;

    bool operator==(const TimedText&) const = default;
};

std::vector<TimedText> apply_jitter(const std::vector<TimedText>& schedule,
                                    std::int64_t jitter_max_ms, std::uint64_t rng_seed);

// Trace files. JSONL: per session a header line, one line per frame, then
// one events line. Binary: fixed-width frame records for large sweeps
// (events omitted).
void write_traces_jsonl(const std::vector<SessionTrace>& traces, const std::string& path);
std::vector<SessionTrace> read_traces_jsonl(const std::string& path);
void write_traces_binary(const std::vector<SessionTrace>& traces, const std::string& path);
std::vector<SessionTrace> read_traces_binary(const std::string& path);
// Dispatches on the file's magic bytes.
std::vector<SessionTrace> read_traces(const std::string& path);

} // namespace tandem
