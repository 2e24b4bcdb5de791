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
#include <iosfwd>
#include <string>
#include <vector>

namespace tandem {

enum class Speaker : std::uint8_t { User, System };

std::string_view speaker_name(Speaker s);
Speaker speaker_from_name(std::string_view name); // throws ValidationError

struct TimedWord {
    std::string text;
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;

    bool operator==(const TimedWord&) const = default;
};

struct Turn {
    Speaker speaker = Speaker::User;
    std::vector<TimedWord> words;
    std::string transcript; // space-joined word texts

    std::int64_t start_ms() const { return words.empty() ? 0 : words.front().start_ms; }
    std::int64_t end_ms() const { return words.empty() ? 0 : words.back().end_ms; }

    bool operator==(const Turn&) const = default;
};

// A two-party dialogue with per-word timestamps; the ground-truth substrate
// for oracle simulation and replay. Timestamps are on one session-wide
// clock; turns alternate speakers starting with the user.
struct AlignedSession {
    std::string session_id;
    std::vector<Turn> turns;

    std::int64_t end_ms() const;

    bool operator==(const AlignedSession&) const = default;
};

// Invariant check; returns human-readable problems, empty when valid.
std::vector<std::string> session_problems(const AlignedSession& session);

// Throws ValidationError listing the first problem.
void validate_session(const AlignedSession& session);

// JSONL corpus format: one session per line, times in integer milliseconds.
// This is the ingestion contract for every downstream module.
std::string session_to_json(const AlignedSession& session);
AlignedSession session_from_json(const std::string& line); // throws ValidationError

std::vector<AlignedSession> read_corpus(const std::string& path); // throws ValidationError
void write_corpus(const std::vector<AlignedSession>& sessions, const std::string& path);

} // namespace tandem
