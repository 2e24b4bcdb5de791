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

#include "tandem/oracle_sim.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/frame.hpp"
#include "tandem/rng.hpp"

namespace tandem {

using nlohmann::json;

CompletenessRatio completeness(std::int64_t words_observed, std::int64_t total_words) {
    if (total_words < 1) throw ValidationError("completeness: total_words must be >= 1");
    if (words_observed < 0 || words_observed > total_words) {
        throw ValidationError("completeness: words_observed out of [0, total_words]");
    }
    return {words_observed, total_words};
}

HintLevel hint_level(const CompletenessRatio& r) {
    if (r.less_than(1, 2)) return 0;
    if (r.less_than(13, 20)) return 1;
    if (r.less_than(4, 5)) return 2;
    if (r.less_than(19, 20)) return 3;
    if (r.less_than(1, 1)) return 4;
    return 5;
}

std::string_view hint_instruction(HintLevel level) {
    switch (level) {
    case 1: return "Refer only to keywords from the hint string.";
    case 2: return "Include content different from the hint.";
    case 3: return "Don't copy the hint verbatim.";
    case 4: return "Use the hint.";
    default: throw ValidationError("no hint instruction for level " + std::to_string(level));
    }
}

namespace {

// All words of the session fully uttered by time_ms, in session order.
std::string history_until(const AlignedSession& session, std::int64_t time_ms) {
    std::string history;
    for (const Turn& turn : session.turns) {
        for (const TimedWord& word : turn.words) {
            if (word.end_ms > time_ms) continue;
            if (!history.empty()) history += ' ';
            history += word.text;
        }
    }
    return history;
}

const Turn& question_turn(const AlignedSession& session, std::size_t turn_index) {
    if (turn_index >= session.turns.size()) {
        throw StructuralError("turn index " + std::to_string(turn_index) + " out of range");
    }
    const Turn& turn = session.turns[turn_index];
    if (turn.speaker != Speaker::User) {
        throw StructuralError("turn " + std::to_string(turn_index) + " is not a User turn");
    }
    if (turn_index + 1 >= session.turns.size() ||
        session.turns[turn_index + 1].speaker != Speaker::System) {
        throw StructuralError("turn " + std::to_string(turn_index) +
                              " has no following System response");
    }
    return turn;
}

} // namespace

PromptBuild build_prompt(const AlignedSession& session, std::size_t turn_index,
                         std::int64_t time_ms) {
    const Turn& turn = question_turn(session, turn_index);
    const Turn& response = session.turns[turn_index + 1];

    std::int64_t observed = 0;
    for (const TimedWord& word : turn.words) {
        if (word.end_ms <= time_ms) ++observed;
    }
    CompletenessRatio ratio = completeness(observed, static_cast<std::int64_t>(turn.words.size()));
    HintLevel level = hint_level(ratio);

    PromptBuild build;
    build.level = level;
    build.ratio = ratio;
    if (level == 5) {
        build.request = Level5Passthrough{response.transcript};
        return build;
    }
    OraclePrompt prompt;
    prompt.history = history_until(session, time_ms);
    if (level >= 1) {
        prompt.hint = response.transcript;
        prompt.instruction = std::string(hint_instruction(level));
    }
    build.request = std::move(prompt);
    return build;
}

SimulatedOracle generate_oracle(const PromptBuild& build, SimulatorClient& simulator,
                                std::int64_t generated_at_ms, const RetryPolicy& retry) {
    SimulatedOracle oracle;
    oracle.generated_at_ms = generated_at_ms;
    oracle.level = build.level;
    oracle.ratio = build.ratio;

    if (const auto* passthrough = std::get_if<Level5Passthrough>(&build.request)) {
        oracle.text = passthrough->text;
        return oracle;
    }

    const auto& prompt = std::get<OraclePrompt>(build.request);
    SimulatorRequest request{prompt.history, prompt.hint, prompt.instruction, 256};
    std::int64_t backoff = retry.backoff_ms;
    for (int attempt = 0;; ++attempt) {
        try {
            oracle.text = simulator.complete(request).text;
            return oracle;
        } catch (const ClientError&) {
            if (attempt >= retry.retries) throw;
            if (backoff > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
        }
    }
}

std::vector<ScheduledOracle> schedule_oracles(const AlignedSession& session,
                                              const TandemConfig& cfg,
                                              SimulatorClient& simulator,
                                              const RetryPolicy& retry) {
    validate_config(cfg);
    validate_session(session);

    std::vector<ScheduledOracle> schedule;
    for (std::size_t t = 0; t < session.turns.size(); ++t) {
        if (session.turns[t].speaker != Speaker::User) continue;
        const Turn& turn = question_turn(session, t);
        std::int64_t start = turn.start_ms();
        std::int64_t end = turn.end_ms();

        // Fixed-interval snapshots through the question, inclusive of a
        // snapshot landing exactly on its end.
        for (std::int64_t at = start + cfg.backend_cycle_ms; at <= end; at += cfg.backend_cycle_ms) {
            PromptBuild build = build_prompt(session, t, at);
            try {
                schedule.push_back({at, t, generate_oracle(build, simulator, at, retry)});
            } catch (const ClientError&) {
                // Injection point skipped; the next cycle supersedes it.
            }
        }

        // Convergence entry: the recorded response, emitted at the frame
        // after the question's last word ends.
        std::int64_t final_at = (frame_of(end, cfg.frame_period_ms) + 1) * cfg.frame_period_ms;
        PromptBuild build = build_prompt(session, t, final_at);
        schedule.push_back({final_at, t, generate_oracle(build, simulator, final_at, retry)});
    }
    return schedule;
}

SimulatorResponse MockSimulatorClient::complete(const SimulatorRequest& request) {
    std::uint64_t key = seed_ ^ fnv1a64(request.history);
    if (request.hint) key = mix64(key ^ fnv1a64(*request.hint));
    if (request.instruction) key = mix64(key ^ fnv1a64(*request.instruction));
    Rng rng(mix64(key ^ seed_salt::kMockSimulator));

    auto split = [](const std::string& text) {
        std::vector<std::string> words;
        std::istringstream in(text);
        std::string w;
        while (in >> w) words.push_back(w);
        return words;
    };
    auto join = [&](const std::vector<std::string>& words) {
        std::string out;
        for (std::size_t i = 0; i < words.size() &&
                                i < static_cast<std::size_t>(request.max_tokens); ++i) {
            if (!out.empty()) out += ' ';
            out += words[i];
        }
        return out;
    };

    static const char* kFillers[] = {"topic", "question", "point", "matter", "subject"};
    static const char* kOpeners[] = {"well", "so", "right", "hmm", "okay"};

    std::vector<std::string> out;
    if (!request.hint) {
        // Unguided guess from the history alone.
        std::vector<std::string> history = split(request.history);
        out.push_back(kOpeners[rng.below(std::size(kOpeners))]);
        out.push_back("that");
        out.push_back("sounds");
        out.push_back("like");
        out.push_back("a");
        out.push_back(kFillers[rng.below(std::size(kFillers))]);
        out.push_back("about");
        std::size_t take = std::min<std::size_t>(3, history.size());
        for (std::size_t i = history.size() - take; i < history.size(); ++i) out.push_back(history[i]);
        return {join(out)};
    }

    std::vector<std::string> hint = split(*request.hint);
    const std::string& instruction = request.instruction.value_or("");
    if (instruction == hint_instruction(1)) {
        // Keywords only: every other hint word.
        out.push_back("something");
        out.push_back("about");
        for (std::size_t i = 0; i < hint.size(); i += 2) out.push_back(hint[i]);
    } else if (instruction == hint_instruction(2)) {
        // Diverge: first half of the hint plus extra material.
        for (std::size_t i = 0; i < (hint.size() + 1) / 2; ++i) out.push_back(hint[i]);
        out.push_back("plus");
        out.push_back("some");
        out.push_back(kFillers[rng.below(std::size(kFillers))]);
        out.push_back("context");
    } else if (instruction == hint_instruction(3)) {
        // Paraphrase: rotate the hint by one word.
        out.push_back("in");
        out.push_back("short");
        for (std::size_t i = 0; i < hint.size(); ++i) out.push_back(hint[(i + 1) % hint.size()]);
    } else {
        // "Use the hint."
        out = hint;
    }
    return {join(out)};
}

SimulatorResponse FlakySimulatorClient::complete(const SimulatorRequest& request) {
    ++calls_;
    if (remaining_failures_ > 0) {
        --remaining_failures_;
        throw ClientError("simulated transient failure");
    }
    return inner_.complete(request);
}

namespace {

std::string ratio_string(const CompletenessRatio& r) {
    return std::to_string(r.observed) + "/" + std::to_string(r.total);
}

CompletenessRatio ratio_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) throw ValidationError("bad ratio string '" + s + "'");
    return completeness(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

} // namespace

std::string scheduled_oracle_to_json(const std::string& session_id, const ScheduledOracle& entry) {
    json j = {
        {"session_id", session_id},
        {"turn_index", entry.turn_index},
        {"emit_time_ms", entry.emit_time_ms},
        {"level", entry.oracle.level},
        {"ratio", ratio_string(entry.oracle.ratio)},
        {"text", entry.oracle.text},
    };
    return j.dump();
}

OracleFileRecord scheduled_oracle_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad oracle JSON: ") + e.what());
    }
    try {
        OracleFileRecord record;
        record.session_id = j.at("session_id").get<std::string>();
        record.entry.turn_index = j.at("turn_index").get<std::size_t>();
        record.entry.emit_time_ms = j.at("emit_time_ms").get<std::int64_t>();
        record.entry.oracle.level = j.at("level").get<int>();
        record.entry.oracle.ratio = ratio_from_string(j.at("ratio").get<std::string>());
        record.entry.oracle.text = j.at("text").get<std::string>();
        record.entry.oracle.generated_at_ms = record.entry.emit_time_ms;
        return record;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad oracle schema: ") + e.what());
    }
}

void write_oracle_file(const std::string& path,
                       const std::vector<std::pair<std::string, std::vector<ScheduledOracle>>>& by_session) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write oracle file '" + path + "'");
    for (const auto& [session_id, schedule] : by_session) {
        for (const ScheduledOracle& entry : schedule) {
            out << scheduled_oracle_to_json(session_id, entry) << '\n';
        }
    }
}

std::vector<OracleFileRecord> read_oracle_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open oracle file '" + path + "'");
    std::vector<OracleFileRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(scheduled_oracle_from_json(line));
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

} // namespace tandem
