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

#include "tandem/session.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"

namespace tandem {

using nlohmann::json;

std::string_view speaker_name(Speaker s) {
    return s == Speaker::User ? "User" : "System";
}

Speaker speaker_from_name(std::string_view name) {
    if (name == "User") return Speaker::User;
    if (name == "System") return Speaker::System;
    throw ValidationError("unknown speaker '" + std::string(name) + "'");
}

std::int64_t AlignedSession::end_ms() const {
    std::int64_t end = 0;
    for (const Turn& turn : turns) end = std::max(end, turn.end_ms());
    return end;
}

std::vector<std::string> session_problems(const AlignedSession& session) {
    std::vector<std::string> problems;
    if (session.session_id.empty()) problems.push_back("empty session_id");
    if (session.turns.empty()) problems.push_back("session has no turns");

    for (std::size_t t = 0; t < session.turns.size(); ++t) {
        const Turn& turn = session.turns[t];
        std::string where = "turn " + std::to_string(t);

        Speaker expected = (t % 2 == 0) ? Speaker::User : Speaker::System;
        if (turn.speaker != expected) {
            problems.push_back(where + ": expected speaker " + std::string(speaker_name(expected)) +
                               ", got " + std::string(speaker_name(turn.speaker)));
        }
        if (turn.words.empty()) {
            problems.push_back(where + ": no words");
            continue;
        }

        std::string joined;
        std::int64_t prev_end = -1;
        for (std::size_t w = 0; w < turn.words.size(); ++w) {
            const TimedWord& word = turn.words[w];
            if (word.text.empty()) problems.push_back(where + ": word " + std::to_string(w) + " is empty");
            if (word.start_ms < 0) problems.push_back(where + ": word " + std::to_string(w) + " has negative start");
            if (word.end_ms < word.start_ms) {
                problems.push_back(where + ": word " + std::to_string(w) + " ends before it starts");
            }
            if (prev_end >= 0 && word.start_ms < prev_end) {
                problems.push_back(where + ": word " + std::to_string(w) + " overlaps the previous word");
            }
            prev_end = word.end_ms;
            if (!joined.empty()) joined += ' ';
            joined += word.text;
        }
        if (joined != turn.transcript) {
            problems.push_back(where + ": transcript does not equal the space-joined words");
        }
    }
    return problems;
}

void validate_session(const AlignedSession& session) {
    auto problems = session_problems(session);
    if (!problems.empty()) {
        throw ValidationError("session '" + session.session_id + "': " + problems.front());
    }
}

std::string session_to_json(const AlignedSession& session) {
    json turns = json::array();
    for (const Turn& turn : session.turns) {
        json words = json::array();
        for (const TimedWord& word : turn.words) {
            words.push_back({{"text", word.text}, {"start_ms", word.start_ms}, {"end_ms", word.end_ms}});
        }
        turns.push_back({{"speaker", speaker_name(turn.speaker)},
                         {"words", std::move(words)},
                         {"transcript", turn.transcript}});
    }
    json j = {{"session_id", session.session_id}, {"turns", std::move(turns)}};
    return j.dump();
}

AlignedSession session_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad JSON: ") + e.what());
    }
    try {
        AlignedSession session;
        session.session_id = j.at("session_id").get<std::string>();
        for (const json& jt : j.at("turns")) {
            Turn turn;
            turn.speaker = speaker_from_name(jt.at("speaker").get<std::string>());
            turn.transcript = jt.at("transcript").get<std::string>();
            for (const json& jw : jt.at("words")) {
                turn.words.push_back({jw.at("text").get<std::string>(),
                                      jw.at("start_ms").get<std::int64_t>(),
                                      jw.at("end_ms").get<std::int64_t>()});
            }
            session.turns.push_back(std::move(turn));
        }
        return session;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad session schema: ") + e.what());
    }
}

std::vector<AlignedSession> read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file '" + path + "'");
    std::vector<AlignedSession> sessions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            sessions.push_back(session_from_json(line));
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return sessions;
}

void write_corpus(const std::vector<AlignedSession>& sessions, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write corpus file '" + path + "'");
    for (const AlignedSession& session : sessions) out << session_to_json(session) << '\n';
}

} // namespace tandem
