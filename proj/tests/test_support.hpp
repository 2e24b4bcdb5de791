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
#include <vector>

#include "tandem/backend.hpp"
#include "tandem/oracle_sim.hpp"
#include "tandem/session.hpp"

namespace tandem::testing {

// Turn with evenly spaced words: word i spans
// [start + i*word_ms, start + i*word_ms + word_ms - gap_ms].
inline Turn spaced_turn(Speaker speaker, const std::vector<std::string>& words,
                        std::int64_t start_ms, std::int64_t word_ms, std::int64_t gap_ms = 0) {
    Turn turn;
    turn.speaker = speaker;
    std::int64_t clock = start_ms;
    for (const std::string& text : words) {
        turn.words.push_back({text, clock, clock + word_ms - gap_ms});
        clock += word_ms;
        if (!turn.transcript.empty()) turn.transcript += ' ';
        turn.transcript += text;
    }
    return turn;
}

inline AlignedSession qa_session(const std::string& id, const std::vector<std::string>& question,
                                 const std::vector<std::string>& answer,
                                 std::int64_t word_ms = 100, std::int64_t pause_ms = 300) {
    AlignedSession session;
    session.session_id = id;
    session.turns.push_back(spaced_turn(Speaker::User, question, 0, word_ms));
    std::int64_t answer_start = session.turns.back().end_ms() + pause_ms;
    session.turns.push_back(spaced_turn(Speaker::System, answer, answer_start, word_ms));
    return session;
}

inline OracleMessage message(std::uint64_t seq, const std::string& text, std::int64_t issued_ms,
                             std::int64_t arrived_ms, std::int64_t source_words = 0) {
    return {seq, text, issued_ms, arrived_ms, source_words};
}

// Simulator that must never be reached (passthrough paths, cache hits).
class UnreachableSimulator : public SimulatorClient {
public:
    SimulatorResponse complete(const SimulatorRequest&) override {
        throw std::logic_error("simulator must not be called");
    }
};

} // namespace tandem::testing
