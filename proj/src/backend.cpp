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

#include "tandem/backend.hpp"

#include <algorithm>
#include <sstream>

#include "tandem/errors.hpp"
#include "tandem/oracle_sim.hpp"
#include "tandem/rng.hpp"

namespace tandem {

std::vector<PartialTranscript> stream_partials(const Turn& turn, std::int64_t backend_cycle_ms) {
    if (turn.speaker != Speaker::User) throw StructuralError("stream_partials: not a User turn");
    if (turn.words.empty()) throw StructuralError("stream_partials: turn has no words");
    if (backend_cycle_ms <= 0) throw ValidationError("stream_partials: non-positive cycle");

    std::int64_t start = turn.start_ms();
    std::int64_t end = turn.end_ms();

    std::vector<std::int64_t> snapshots;
    for (std::int64_t at = start + backend_cycle_ms; at < end; at += backend_cycle_ms) {
        snapshots.push_back(at);
    }
    snapshots.push_back(end); // final complete partial

    std::vector<PartialTranscript> partials;
    partials.reserve(snapshots.size());
    for (std::int64_t at : snapshots) {
        PartialTranscript partial;
        partial.snapshot_time_ms = at;
        for (const TimedWord& word : turn.words) {
            if (word.end_ms > at) break;
            if (!partial.text.empty()) partial.text += ' ';
            partial.text += word.text;
            ++partial.words_observed;
        }
        partials.push_back(std::move(partial));
    }
    return partials;
}

void MockLLMClient::load_corpus(const std::vector<AlignedSession>& sessions) {
    for (const AlignedSession& session : sessions) {
        for (std::size_t t = 0; t + 1 < session.turns.size(); ++t) {
            if (session.turns[t].speaker == Speaker::User &&
                session.turns[t + 1].speaker == Speaker::System) {
                answers_.emplace(session.turns[t].transcript, session.turns[t + 1].transcript);
            }
        }
    }
}

std::string MockLLMClient::respond(const std::string& partial_text, const std::string& history) {
    ++calls_;
    auto it = answers_.find(partial_text);
    if (it != answers_.end()) return it->second;

    // Prefix of a question: a plausible but tentative guess.
    Rng rng(mix64(seed_ ^ fnv1a64(partial_text) ^ mix64(fnv1a64(history)) ^ seed_salt::kMockLlm));
    static const char* kGuesses[] = {"probably", "perhaps", "possibly", "likely"};
    std::vector<std::string> words;
    std::istringstream in(partial_text);
    std::string w;
    while (in >> w) words.push_back(w);

    std::string out = kGuesses[rng.below(std::size(kGuesses))];
    out += " you mean";
    std::size_t take = std::min<std::size_t>(2, words.size());
    for (std::size_t i = words.size() - take; i < words.size(); ++i) out += ' ' + words[i];
    out += " so let me think";
    return out;
}

std::string respond(const PartialTranscript& partial, const std::string& history,
                    LLMClient& client) {
    std::string text = client.respond(partial.text, history);
    if (text.empty()) throw ClientError("back-end returned an empty candidate");
    return text;
}

std::vector<Candidate> generate_candidates(const AlignedSession& session, const TandemConfig& cfg,
                                           LLMClient& client, StreamingTranscriber* transcriber) {
    validate_config(cfg);
    AlignmentTranscriber alignment;
    StreamingTranscriber& stt = transcriber ? *transcriber : alignment;
    std::vector<Candidate> candidates;
    std::string history;
    for (std::size_t t = 0; t < session.turns.size(); ++t) {
        const Turn& turn = session.turns[t];
        if (turn.speaker == Speaker::User) {
            std::string last_text;
            for (const PartialTranscript& partial : stt.transcribe(turn, cfg.backend_cycle_ms)) {
                if (partial.text == last_text) continue; // unchanged since last cycle
                last_text = partial.text;
                if (partial.text.empty()) continue;
                try {
                    candidates.push_back({partial.snapshot_time_ms,
                                          respond(partial, history, client),
                                          partial.words_observed, t});
                } catch (const ClientError&) {
                    // Cycle dropped; the next one compensates.
                }
            }
        }
        if (!history.empty()) history += ' ';
        history += turn.transcript;
    }
    return candidates;
}

std::vector<Candidate> candidates_from_schedule(const std::vector<ScheduledOracle>& schedule) {
    std::vector<Candidate> candidates;
    candidates.reserve(schedule.size());
    for (const ScheduledOracle& entry : schedule) {
        candidates.push_back({entry.emit_time_ms, entry.oracle.text,
                              entry.oracle.ratio.observed, entry.turn_index});
    }
    return candidates;
}

std::int64_t UniformLatencyModel::sample_ms(Rng& rng) {
    std::int64_t latency = base_ms_;
    if (jitter_max_ms_ > 0) latency += rng.range(0, jitter_max_ms_);
    return latency;
}

std::vector<OracleMessage> relay(const std::vector<Candidate>& candidates,
                                 LatencyModel& latency_model, std::uint64_t rng_seed) {
    Rng rng(mix64(rng_seed ^ seed_salt::kRelay));
    std::vector<OracleMessage> messages;
    messages.reserve(candidates.size());
    std::int64_t prev_issued = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Candidate& candidate = candidates[i];
        if (candidate.issued_at_ms <= prev_issued) {
            throw ValidationError("relay: issue times must be strictly increasing");
        }
        prev_issued = candidate.issued_at_ms;
        std::int64_t latency = latency_model.sample_ms(rng);
        if (latency < 0) throw ValidationError("relay: negative latency sampled");
        messages.push_back({static_cast<std::uint64_t>(i), candidate.text,
                            candidate.issued_at_ms, candidate.issued_at_ms + latency,
                            candidate.source_words});
    }
    std::stable_sort(messages.begin(), messages.end(),
                     [](const OracleMessage& a, const OracleMessage& b) {
                         if (a.arrived_at_ms != b.arrived_at_ms) return a.arrived_at_ms < b.arrived_at_ms;
                         return a.seq < b.seq;
                     });
    return messages;
}

} // namespace tandem
