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

#include "tandem/dataset.hpp"
#include "tandem/errors.hpp"
#include "tandem/frame.hpp"
#include "tandem/oracle_sim.hpp"
#include "test_support.hpp"

using namespace tandem;

namespace {

// Independent interval classifier over exact rationals: compares 20*n
// against 10N / 13N / 16N / 19N / 20N.
int classify_by_cross_multiplication(std::int64_t n, std::int64_t N) {
    std::int64_t lhs = 20 * n;
    if (lhs < 10 * N) return 0;
    if (lhs < 13 * N) return 1;
    if (lhs < 16 * N) return 2;
    if (lhs < 19 * N) return 3;
    if (lhs < 20 * N) return 4;
    return 5;
}

} // namespace

TEST_CASE("completeness ratio basics") {
    CHECK(completeness(0, 10).value() == 0.0);
    CHECK(completeness(5, 10) == CompletenessRatio{5, 10});
    CHECK(completeness(5, 10).value() == doctest::Approx(0.5));
    CHECK(completeness(10, 10).complete());

    // 13/20 sits exactly on the level-1/level-2 boundary.
    CHECK(hint_level(completeness(13, 20)) == 2);

    CHECK_THROWS_AS(completeness(1, 0), ValidationError);
    CHECK_THROWS_AS(completeness(11, 10), ValidationError);
    CHECK_THROWS_AS(completeness(-1, 10), ValidationError);
}

TEST_CASE("hint level interval bounds") {
    CHECK(hint_level(completeness(3, 10)) == 0);  // r = 0.3
    CHECK(hint_level(completeness(1, 2)) == 1);   // r = 0.5 belongs to level 1
    CHECK(hint_level(completeness(13, 20)) == 2); // r = 0.65
    CHECK(hint_level(completeness(4, 5)) == 3);   // r = 0.8
    CHECK(hint_level(completeness(19, 20)) == 4); // r = 0.95
    CHECK(hint_level(completeness(1, 1)) == 5);   // r = 1 exactly
    CHECK(hint_level(completeness(0, 7)) == 0);
}

TEST_CASE("hint level matches the brute-force classifier on the full grid") {
    for (std::int64_t N = 1; N <= 40; ++N) {
        int prev = 0;
        for (std::int64_t n = 0; n <= N; ++n) {
            int level = hint_level(completeness(n, N));
            CHECK(level == classify_by_cross_multiplication(n, N));
            CHECK(level >= prev); // non-decreasing in r
            prev = level;
        }
        CHECK(prev == 5);
    }
}

TEST_CASE("hint instructions are the fixed strings") {
    CHECK(hint_instruction(1) == "Refer only to keywords from the hint string.");
    CHECK(hint_instruction(2) == "Include content different from the hint.");
    CHECK(hint_instruction(3) == "Don't copy the hint verbatim.");
    CHECK(hint_instruction(4) == "Use the hint.");
    CHECK_THROWS_AS(hint_instruction(0), ValidationError);
    CHECK_THROWS_AS(hint_instruction(5), ValidationError);
}

namespace {

// Two question/answer pairs; second question has 4 words at 100 ms each.
AlignedSession two_pair_session() {
    AlignedSession session;
    session.session_id = "s2";
    session.turns.push_back(testing::spaced_turn(Speaker::User, {"first", "question"}, 0, 100));
    session.turns.push_back(testing::spaced_turn(Speaker::System, {"first", "answer"}, 500, 100));
    session.turns.push_back(
        testing::spaced_turn(Speaker::User, {"what", "about", "the", "second"}, 1000, 100));
    session.turns.push_back(
        testing::spaced_turn(Speaker::System, {"it", "is", "the", "better", "one"}, 1700, 100));
    return session;
}

} // namespace

TEST_CASE("build_prompt levels, history and hint") {
    AlignedSession session = two_pair_session();

    SUBCASE("before any word of the question: level 0, prior turns only") {
        PromptBuild build = build_prompt(session, 2, 1000);
        CHECK(build.level == 0);
        CHECK(build.ratio == CompletenessRatio{0, 4});
        const auto& prompt = std::get<OraclePrompt>(build.request);
        CHECK(prompt.history == "first question first answer");
        CHECK(!prompt.hint);
        CHECK(!prompt.instruction);
    }
    SUBCASE("3 of 4 words heard: level 2 with the exact instruction") {
        PromptBuild build = build_prompt(session, 2, 1300);
        CHECK(build.level == 2);
        CHECK(build.ratio == CompletenessRatio{3, 4});
        const auto& prompt = std::get<OraclePrompt>(build.request);
        CHECK(prompt.history == "first question first answer what about the");
        REQUIRE(prompt.hint);
        CHECK(*prompt.hint == "it is the better one");
        REQUIRE(prompt.instruction);
        CHECK(*prompt.instruction == "Include content different from the hint.");
    }
    SUBCASE("past the question's last word: level 5 passthrough") {
        PromptBuild build = build_prompt(session, 2, 1400);
        CHECK(build.level == 5);
        CHECK(std::get<Level5Passthrough>(build.request).text == "it is the better one");
    }
    SUBCASE("structural errors") {
        CHECK_THROWS_AS(build_prompt(session, 1, 500), StructuralError);  // System turn
        CHECK_THROWS_AS(build_prompt(session, 9, 500), StructuralError);  // out of range
        AlignedSession trailing = session;
        trailing.turns.push_back(
            testing::spaced_turn(Speaker::User, {"unanswered"}, 2400, 100));
        CHECK_THROWS_AS(build_prompt(trailing, 4, 2500), StructuralError);
    }
}

TEST_CASE("history is a prefix function of time") {
    CorpusGenOptions options;
    options.count = 20;
    options.seed = 11;
    for (const AlignedSession& session : generate_corpus(options)) {
        std::int64_t end = session.turns[0].end_ms();
        std::string prev;
        for (std::int64_t t = 0; t < end; t += 130) {
            PromptBuild build = build_prompt(session, 0, t);
            if (build.level == 5) break;
            const std::string& history = std::get<OraclePrompt>(build.request).history;
            CHECK(history.substr(0, prev.size()) == prev);
            prev = history;
        }
    }
}

TEST_CASE("generate_oracle passthrough skips the simulator") {
    testing::UnreachableSimulator unreachable;
    PromptBuild build;
    build.level = 5;
    build.ratio = completeness(4, 4);
    build.request = Level5Passthrough{"The aqueduct was finished in the spring of 1604."};
    SimulatedOracle oracle = generate_oracle(build, unreachable, 1234);
    CHECK(oracle.text == "The aqueduct was finished in the spring of 1604.");
    CHECK(oracle.level == 5);
    CHECK(oracle.generated_at_ms == 1234);
}

TEST_CASE("mock simulator is deterministic and level-aware") {
    MockSimulatorClient mock(99);
    SimulatorRequest request{"what about the", std::nullopt, std::nullopt, 64};
    std::string first = mock.complete(request).text;
    CHECK(first == mock.complete(request).text);
    CHECK(!first.empty());

    SimulatorRequest hinted{"what about the", "it is the better one",
                            std::string(hint_instruction(4)), 64};
    CHECK(mock.complete(hinted).text == "it is the better one");

    SimulatorRequest keywords = hinted;
    keywords.instruction = std::string(hint_instruction(1));
    CHECK(mock.complete(keywords).text != mock.complete(hinted).text);
}

TEST_CASE("generate_oracle retries transient failures then gives up") {
    MockSimulatorClient mock(1);
    PromptBuild build;
    build.level = 0;
    build.ratio = completeness(1, 4);
    build.request = OraclePrompt{"partial words", std::nullopt, std::nullopt};
    RetryPolicy fast{2, 0};

    SUBCASE("two failures then success") {
        FlakySimulatorClient flaky(mock, 2);
        SimulatedOracle oracle = generate_oracle(build, flaky, 0, fast);
        CHECK(!oracle.text.empty());
        CHECK(flaky.calls() == 3);
    }
    SUBCASE("three failures exhaust the retries") {
        FlakySimulatorClient flaky(mock, 3);
        CHECK_THROWS_AS(generate_oracle(build, flaky, 0, fast), ClientError);
        CHECK(flaky.calls() == 3);
    }
}

TEST_CASE("schedule_oracles fixed intervals plus convergence entry") {
    TandemConfig cfg; // frame 80, cycle 200
    MockSimulatorClient mock(5);

    SUBCASE("400 ms question, cycle 200: snapshots at 200 and 400 plus final") {
        AlignedSession session;
        session.session_id = "sched";
        session.turns.push_back(
            testing::spaced_turn(Speaker::User, {"w1", "w2", "w3", "w4"}, 0, 100));
        session.turns.push_back(
            testing::spaced_turn(Speaker::System, {"the", "recorded", "answer"}, 900, 100));

        auto schedule = schedule_oracles(session, cfg, mock, {2, 0});
        REQUIRE(schedule.size() == 3);
        CHECK(schedule[0].emit_time_ms == 200);
        CHECK(schedule[0].oracle.level == 1); // 2/4 = 0.5
        CHECK(schedule[1].emit_time_ms == 400);
        CHECK(schedule[1].oracle.level == 5);
        CHECK(schedule[1].oracle.text == "the recorded answer");
        // frame after the last word end: frame_of(400) + 1 = 6 -> 480 ms
        CHECK(schedule[2].emit_time_ms == 480);
        CHECK(schedule[2].oracle.level == 5);
        CHECK(schedule[2].oracle.text == "the recorded answer");
    }

    SUBCASE("question shorter than one cycle: exactly one entry, level 5") {
        AlignedSession session = testing::qa_session("short", {"hi"}, {"hello", "there"}, 90);
        auto schedule = schedule_oracles(session, cfg, mock, {2, 0});
        REQUIRE(schedule.size() == 1);
        CHECK(schedule[0].oracle.level == 5);
        CHECK(schedule[0].oracle.text == "hello there");
        CHECK(schedule[0].emit_time_ms == (frame_of(90, 80) + 1) * 80);
    }

    SUBCASE("trailing unpaired question is a structural error") {
        AlignedSession session = testing::qa_session("odd", {"one", "two", "three"}, {"four"});
        session.turns.push_back(testing::spaced_turn(Speaker::User, {"dangling"}, 5000, 100));
        CHECK_THROWS_AS(schedule_oracles(session, cfg, mock, {2, 0}), StructuralError);
    }
}

TEST_CASE("schedules over random sessions: monotone levels, convergence, periodicity") {
    TandemConfig cfg;
    MockSimulatorClient mock(3);
    CorpusGenOptions options;
    options.count = 200;
    options.seed = 17;

    for (const AlignedSession& session : generate_corpus(options)) {
        auto schedule = schedule_oracles(session, cfg, mock, {2, 0});
        REQUIRE(!schedule.empty());

        std::int64_t prev_time = -1;
        for (const ScheduledOracle& entry : schedule) {
            CHECK(entry.emit_time_ms > prev_time);
            prev_time = entry.emit_time_ms;
        }

        // Per turn: levels non-decreasing, periodic snapshots exactly one
        // cycle apart starting at turn start + cycle, final entry level 5
        // with the recorded response.
        for (std::size_t t = 0; t < session.turns.size(); t += 2) {
            const Turn& turn = session.turns[t];
            std::vector<const ScheduledOracle*> entries;
            for (const ScheduledOracle& entry : schedule) {
                if (entry.turn_index == t) entries.push_back(&entry);
            }
            REQUIRE(!entries.empty());
            int prev_level = 0;
            for (const ScheduledOracle* entry : entries) {
                CHECK(entry->oracle.level >= prev_level);
                prev_level = entry->oracle.level;
            }
            for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
                CHECK(entries[i]->emit_time_ms ==
                      turn.start_ms() + static_cast<std::int64_t>(i + 1) * cfg.backend_cycle_ms);
            }
            const ScheduledOracle* final_entry = entries.back();
            CHECK(final_entry->oracle.level == 5);
            CHECK(final_entry->oracle.text == session.turns[t + 1].transcript);
            CHECK(final_entry->emit_time_ms ==
                  (frame_of(turn.end_ms(), cfg.frame_period_ms) + 1) * cfg.frame_period_ms);
        }
    }
}

TEST_CASE("every passthrough byte-equals its recorded response") {
    testing::UnreachableSimulator unreachable;
    CorpusGenOptions options;
    options.count = 100;
    options.seed = 23;
    for (const AlignedSession& session : generate_corpus(options)) {
        for (std::size_t t = 0; t < session.turns.size(); t += 2) {
            std::int64_t at = session.turns[t].end_ms() + 1;
            PromptBuild build = build_prompt(session, t, at);
            REQUIRE(build.level == 5);
            SimulatedOracle oracle = generate_oracle(build, unreachable, at);
            CHECK(oracle.text == session.turns[t + 1].transcript);
        }
    }
}

TEST_CASE("a failing injection point is skipped, not fatal") {
    TandemConfig cfg;
    MockSimulatorClient mock(5);
    // Fails 3 times: the first snapshot's retries (1 try + 2 retries) are
    // exhausted, every later injection point succeeds.
    FlakySimulatorClient flaky(mock, 3);
    AlignedSession session;
    session.session_id = "skip";
    session.turns.push_back(
        testing::spaced_turn(Speaker::User, {"a", "b", "c", "d", "e", "f"}, 0, 100));
    session.turns.push_back(testing::spaced_turn(Speaker::System, {"done"}, 1000, 100));

    auto schedule = schedule_oracles(session, cfg, flaky, {2, 0});
    // Snapshots at 200 (dropped), 400, 600 plus the final entry.
    REQUIRE(schedule.size() == 3);
    CHECK(schedule[0].emit_time_ms == 400);
    CHECK(schedule.back().oracle.level == 5);
}

TEST_CASE("oracle JSONL round trip") {
    ScheduledOracle entry;
    entry.emit_time_ms = 480;
    entry.turn_index = 2;
    entry.oracle = {"the recorded answer", 480, 5, completeness(13, 20)};
    std::string line = scheduled_oracle_to_json("sess-000001", entry);
    CHECK(line.find("\"13/20\"") != std::string::npos);

    OracleFileRecord record = scheduled_oracle_from_json(line);
    CHECK(record.session_id == "sess-000001");
    CHECK(record.entry.emit_time_ms == 480);
    CHECK(record.entry.turn_index == 2);
    CHECK(record.entry.oracle.level == 5);
    CHECK(record.entry.oracle.ratio == completeness(13, 20));
    CHECK(record.entry.oracle.text == "the recorded answer");

    CHECK_THROWS_AS(scheduled_oracle_from_json("{}"), ValidationError);
}
