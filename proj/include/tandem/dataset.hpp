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
#include <string>
#include <vector>

#include "tandem/backend.hpp"
#include "tandem/config.hpp"
#include "tandem/frame.hpp"
#include "tandem/oracle_sim.hpp"
#include "tandem/session.hpp"
#include "tandem/tokens.hpp"

namespace tandem {

// Frame-indexed four-stream training sample for one session. The oracle and
// inner-monologue streams share one tokenizer; audio slots carry opaque
// placeholder ids that only preserve the stream shape.
struct TrainingSequence {
    std::string session_id;
    std::vector<FrameRecord> frames;
    struct Annotation {
        std::uint64_t frame_index = 0; // where the message's boundary token sits
        std::uint64_t seq = 0;
        HintLevel level = 0;

        bool operator==(const Annotation&) const = default;
    };
    std::vector<Annotation> oracle_annotations;

    bool operator==(const TrainingSequence&) const = default;
};

// Materializes a schedule as arriving messages: seq follows issue order,
// arrival times carry the training jitter, so a jitter inversion becomes an
// out-of-order delivery. Deterministic per seed.
std::vector<OracleMessage> schedule_to_messages(const std::vector<ScheduledOracle>& schedule,
                                                const TandemConfig& cfg, std::uint64_t seed);

// Lays one session plus its simulated-oracle schedule out on the frame
// grid: jitters the injection times (seeded per session), merges them with
// recency supersession into the oracle stream, places the recorded
// response words on the monologue stream at their aligned frames, and
// fills the audio slots with placeholders. Deterministic per seed.
TrainingSequence build_training_sequence(const AlignedSession& session,
                                         const std::vector<ScheduledOracle>& schedule,
                                         const TandemConfig& cfg, Tokenizer& tokenizer);

std::string training_sequence_to_json(const TrainingSequence& sequence);
TrainingSequence training_sequence_from_json(const std::string& line);
void write_training_file(const std::vector<TrainingSequence>& sequences, const std::string& path);
std::vector<TrainingSequence> read_training_file(const std::string& path);

// Corpus validation: per-session invariant checks with line numbers.
// Malformed JSON lines are reported and skipped; checking continues.
struct CorpusReport {
    struct Failure {
        std::size_t line = 0;
        std::string session_id; // empty when the line did not parse
        std::vector<std::string> problems;
    };
    std::size_t sessions_checked = 0;
    std::vector<Failure> failures;

    bool ok() const { return failures.empty(); }
};

CorpusReport validate_corpus(const std::string& path);
std::string corpus_report_text(const CorpusReport& report);

// Seeded synthetic Q&A sessions with word timings; the desk-scale stand-in
// for a recorded two-party corpus.
struct CorpusGenOptions {
    std::size_t count = 200;
    std::uint64_t seed = 42;
    std::size_t min_turn_pairs = 1;
    std::size_t max_turn_pairs = 3;
};

std::vector<AlignedSession> generate_corpus(const CorpusGenOptions& options);

} // namespace tandem
