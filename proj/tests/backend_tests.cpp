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

#include <map>
#include <set>

#include "tandem/backend.hpp"
#include "tandem/dataset.hpp"
#include "tandem/errors.hpp"
#include "tandem/rng.hpp"
#include "test_support.hpp"

using namespace tandem;

namespace {

class FixedSequenceLatency : public LatencyModel {
public:
    explicit FixedSequenceLatency(std::vector<std::int64_t> latencies)
        : latencies_(std::move(latencies)) {}
    std::int64_t sample_ms(Rng&) override { return latencies_.at(next_++); }

private:
    std::vector<std::int64_t> latencies_;
    std::size_t next_ = 0;
};

class EmptyLLMClient : public LLMClient {
public:
    std::string respond(const std::string&, const std::string&) override { return ""; }
};

class CountingLLMClient : public LLMClient {
public:
    std::string respond(const std::string& partial, const std::string&) override {
        ++calls_;
        return "re: " + partial;
    }
    int calls_ = 0;
};

} // namespace

TEST_CASE("stream_partials snapshots and final complete partial") {
    Turn turn = testing::spaced_turn(Speaker::User, {"w1", "w2", "w3", "w4"}, 0, 100);

    SUBCASE("cycle 200: partials at 200 and 400") {
        auto partials = stream_partials(turn, 200);
        REQUIRE(partials.size() == 2);
        CHECK(partials[0] == PartialTranscript{"w1 w2", 200, 2});
        CHECK(partials[1] == PartialTranscript{"w1 w2 w3 w4", 400, 4});
    }
    SUBCASE("cycle 150: empty ticks included, final at the turn end") {
        auto partials = stream_partials(turn, 150);
        REQUIRE(partials.size() == 3);
        CHECK(partials[0] == PartialTranscript{"w1", 150, 1});
        CHECK(partials[1] == PartialTranscript{"w1 w2 w3", 300, 3});
        CHECK(partials[2] == PartialTranscript{"w1 w2 w3 w4", 400, 4});
    }
    SUBCASE("no new word on a tick still emits, with unchanged text") {
        Turn sparse;
        sparse.speaker = Speaker::User;
        sparse.words = {{"w1", 0, 100}, {"w2", 350, 450}};
        sparse.transcript = "w1 w2";
        auto partials = stream_partials(sparse, 150);
        REQUIRE(partials.size() == 3);
        CHECK(partials[0].text == "w1");
        CHECK(partials[1].text == "w1"); // tick at 300, nothing new finished
        CHECK(partials[2] == PartialTranscript{"w1 w2", 450, 2});
    }
    SUBCASE("errors") {
        Turn system = testing::spaced_turn(Speaker::System, {"x"}, 0, 100);
        CHECK_THROWS_AS(stream_partials(system, 200), StructuralError);
        CHECK_THROWS_AS(stream_partials(turn, 0), ValidationError);
    }
}

TEST_CASE("the alignment transcriber is the stream_partials adapter") {
    Turn turn = testing::spaced_turn(Speaker::User, {"w1", "w2", "w3", "w4"}, 0, 100);
    AlignmentTranscriber transcriber;
    CHECK(transcriber.transcribe(turn, 200) == stream_partials(turn, 200));
}

TEST_CASE("partials are word-wise prefixes and end at the full transcript") {
    CorpusGenOptions options;
    options.count = 50;
    options.seed = 31;
    for (const AlignedSession& session : generate_corpus(options)) {
        for (const Turn& turn : session.turns) {
            if (turn.speaker != Speaker::User) continue;
            auto partials = stream_partials(turn, 200);
            REQUIRE(!partials.empty());
            std::int64_t prev_words = 0;
            for (const PartialTranscript& partial : partials) {
                CHECK(partial.words_observed >= prev_words);
                prev_words = partial.words_observed;
                CHECK(turn.transcript.substr(0, partial.text.size()) == partial.text);
            }
            CHECK(partials.back().text == turn.transcript);
        }
    }
}

TEST_CASE("respond: canned answers, tentative prefixes, empty is an error") {
    AlignedSession session =
        testing::qa_session("canned", {"who", "won", "the", "decisive", "battle"},
                            {"it", "was", "a", "tiebreak"});
    MockLLMClient mock(7);
    mock.load_corpus({session});

    PartialTranscript complete{"who won the decisive battle", 500, 5};
    CHECK(respond(complete, "", mock) == "it was a tiebreak");

    PartialTranscript prefix{"who won", 200, 2};
    std::string guess = respond(prefix, "", mock);
    CHECK(!guess.empty());
    CHECK(guess != "it was a tiebreak");
    CHECK(respond(prefix, "", mock) == guess); // deterministic

    EmptyLLMClient empty;
    CHECK_THROWS_AS(respond(prefix, "", empty), ClientError);
}

TEST_CASE("generate_candidates deduplicates unchanged partials") {
    TandemConfig cfg; // cycle 200
    AlignedSession session;
    session.session_id = "dedup";
    Turn turn;
    turn.speaker = Speaker::User;
    // Ticks at 200 and 400 both see only w1; dedup keeps one call for them.
    turn.words = {{"w1", 0, 150}, {"w2", 450, 560}};
    turn.transcript = "w1 w2";
    session.turns.push_back(turn);
    session.turns.push_back(testing::spaced_turn(Speaker::System, {"fine"}, 900, 100));

    CountingLLMClient counting;
    auto candidates = generate_candidates(session, cfg, counting);
    // Distinct partials: "w1" (200), "w1 w2" (560 final).
    CHECK(counting.calls_ == 2);
    REQUIRE(candidates.size() == 2);
    CHECK(candidates[0].issued_at_ms == 200);
    CHECK(candidates[1].issued_at_ms == 560);
    CHECK(candidates[1].text == "re: w1 w2");
}

TEST_CASE("relay: identity with zero latency, reordering with mixed latency") {
    std::vector<Candidate> candidates = {{100, "first", 1, 0}, {200, "second", 2, 0}};

    SUBCASE("zero latency preserves order") {
        UniformLatencyModel zero(0, 0);
        auto messages = relay(candidates, zero, 1);
        REQUIRE(messages.size() == 2);
        CHECK(messages[0].seq == 0);
        CHECK(messages[0].arrived_at_ms == 100);
        CHECK(messages[1].seq == 1);
        CHECK(messages[1].arrived_at_ms == 200);
    }
    SUBCASE("latencies 300 then 50 invert the arrival order") {
        FixedSequenceLatency fixed({300, 50});
        auto messages = relay(candidates, fixed, 1);
        REQUIRE(messages.size() == 2);
        CHECK(messages[0].seq == 1); // second issued, first to arrive
        CHECK(messages[0].arrived_at_ms == 250);
        CHECK(messages[1].seq == 0);
        CHECK(messages[1].arrived_at_ms == 400);
    }
    SUBCASE("non-increasing issue times are rejected") {
        std::vector<Candidate> bad = {{200, "a", 1, 0}, {200, "b", 2, 0}};
        UniformLatencyModel zero(0, 0);
        CHECK_THROWS_AS(relay(bad, zero, 1), ValidationError);
    }
}

TEST_CASE("relay conserves every candidate across 10k random schedules") {
    Rng rng(40);
    for (int i = 0; i < 10000; ++i) {
        std::size_t n = rng.below(7);
        std::vector<Candidate> candidates;
        std::int64_t t = 0;
        for (std::size_t k = 0; k < n; ++k) {
            t += 1 + static_cast<std::int64_t>(rng.below(400));
            candidates.push_back({t, "m" + std::to_string(k), static_cast<std::int64_t>(k), 0});
        }
        UniformLatencyModel model(static_cast<std::int64_t>(rng.below(300)),
                                  static_cast<std::int64_t>(rng.below(500)));
        auto messages = relay(candidates, model, rng.next());

        REQUIRE(messages.size() == candidates.size());
        std::set<std::uint64_t> seqs;
        std::int64_t prev_arrival = -1;
        for (const OracleMessage& m : messages) {
            CHECK(seqs.insert(m.seq).second);
            CHECK(m.arrived_at_ms >= m.issued_at_ms);
            CHECK(m.arrived_at_ms >= prev_arrival);
            prev_arrival = m.arrived_at_ms;
            CHECK(m.text == candidates[m.seq].text);
            CHECK(m.issued_at_ms == candidates[m.seq].issued_at_ms);
        }
    }
}

TEST_CASE("relay is deterministic per seed") {
    std::vector<Candidate> candidates;
    for (int k = 0; k < 20; ++k) candidates.push_back({k * 97 + 13, "c" + std::to_string(k), k, 0});
    UniformLatencyModel model(120, 200);
    auto a = relay(candidates, model, 777);
    UniformLatencyModel model2(120, 200);
    auto b = relay(candidates, model2, 777);
    CHECK(a == b);
    UniformLatencyModel model3(120, 200);
    auto c = relay(candidates, model3, 778);
    CHECK(a != c);
}

TEST_CASE("candidates_from_schedule carries texts and issue times verbatim") {
    std::vector<ScheduledOracle> schedule;
    schedule.push_back({200, 0, {"early guess", 200, 1, completeness(2, 4)}});
    schedule.push_back({480, 0, {"the recorded answer", 480, 5, completeness(4, 4)}});
    auto candidates = candidates_from_schedule(schedule);
    REQUIRE(candidates.size() == 2);
    CHECK(candidates[0].issued_at_ms == 200);
    CHECK(candidates[0].text == "early guess");
    CHECK(candidates[0].source_words == 2);
    CHECK(candidates[1].text == "the recorded answer");
}
