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

#include "tandem/config.hpp"
#include "tandem/errors.hpp"
#include "tandem/frame.hpp"
#include "tandem/rng.hpp"
#include "tandem/session.hpp"
#include "tandem/tokens.hpp"
#include "test_support.hpp"

using namespace tandem;

namespace {

// Division-free reference: count how many whole periods fit below time.
std::int64_t frame_of_by_counting(std::int64_t time_ms, std::int64_t period_ms) {
    std::int64_t k = 0;
    while ((k + 1) * period_ms <= time_ms) ++k;
    return k;
}

} // namespace

TEST_CASE("frame_of basics") {
    CHECK(frame_of(0, 80) == 0);
    CHECK(frame_of(80, 80) == 1); // exact boundary belongs to the next frame
    CHECK(frame_of(799, 80) == 9);
    CHECK_THROWS_AS(frame_of(-1, 80), ValidationError);
    CHECK_THROWS_AS(frame_of(0, 0), ValidationError);
}

TEST_CASE("frame_of matches counting over a grid and is monotone") {
    for (std::int64_t period : {20, 80, 100}) {
        std::int64_t prev = 0;
        for (std::int64_t t = 0; t < 10000; ++t) {
            std::int64_t f = frame_of(t, period);
            CHECK(f == frame_of_by_counting(t, period));
            CHECK(f >= prev);
            CHECK(f * period <= t);
            CHECK(t < (f + 1) * period);
            prev = f;
        }
    }
}

TEST_CASE("tokenize empty and round trip") {
    Tokenizer tokenizer;
    CHECK(tokenizer.tokenize("").empty());

    auto tokens = tokenizer.tokenize("hello world");
    CHECK(tokens.size() == 2);
    CHECK(tokenizer.detokenize(tokens) == "hello world");

    auto messy = tokenizer.tokenize("  hello \t world\n");
    CHECK(messy == tokens); // whitespace normalization
    CHECK(tokenizer.tokenize("hello")[0] == tokens[0]); // interning is stable
}

TEST_CASE("reserved ids never come out of tokenization") {
    Tokenizer tokenizer;
    // The reserved surface forms are ordinary words to the tokenizer.
    for (TokenId id : tokenizer.tokenize("<pad> <boundary> <silence>")) {
        CHECK(!Tokenizer::is_reserved(id));
    }

    // Fuzz printable ASCII strings up to length 8.
    Rng rng(20260810);
    for (int i = 0; i < 20000; ++i) {
        std::string text;
        std::size_t len = rng.below(9);
        for (std::size_t c = 0; c < len; ++c) {
            text += static_cast<char>(0x20 + rng.below(0x7f - 0x20));
        }
        for (TokenId id : tokenizer.tokenize(text)) CHECK(!Tokenizer::is_reserved(id));
    }
}

TEST_CASE("tokenize round-trips random word strings") {
    Tokenizer tokenizer;
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        std::string text;
        std::size_t words = 1 + rng.below(6);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) text += ' ';
            std::size_t len = 1 + rng.below(7);
            for (std::size_t c = 0; c < len; ++c) text += static_cast<char>('a' + rng.below(26));
        }
        CHECK(tokenizer.detokenize(tokenizer.tokenize(text)) == text);
    }
}

TEST_CASE("unencodable bytes raise EncodingError with the position") {
    Tokenizer tokenizer;
    try {
        tokenizer.tokenize("caf\xc3\xa9");
        FAIL("expected EncodingError");
    } catch (const EncodingError& e) {
        CHECK(e.position() == 3);
        CHECK(std::string(e.what()).find("position 3") != std::string::npos);
    }
}

TEST_CASE("detokenize rejects ids outside the vocabulary") {
    Tokenizer tokenizer;
    tokenizer.tokenize("one two");
    CHECK(tokenizer.token_text(kPadToken) == "<pad>");
    std::vector<TokenId> bad = {static_cast<TokenId>(tokenizer.vocab_size())};
    CHECK_THROWS_AS(tokenizer.detokenize(bad), ValidationError);
}

TEST_CASE("two tokenizers fed the same text agree on ids") {
    Tokenizer a, b;
    std::string text = "the quick brown fox jumps over the lazy dog";
    CHECK(a.tokenize(text) == b.tokenize(text));
}

TEST_CASE("config validation") {
    TandemConfig cfg;
    CHECK_NOTHROW(validate_config(cfg));

    TandemConfig bad = cfg;
    bad.backend_cycle_ms = 99;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
    bad.backend_cycle_ms = 501;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);

    bad = cfg;
    bad.frame_period_ms = 300;
    bad.backend_cycle_ms = 200;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);

    bad = cfg;
    bad.pad_token = bad.silence_token;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);

    bad = cfg;
    bad.boundary_token = 7; // not reserved
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
}

TEST_CASE("config JSON round trip") {
    TandemConfig cfg;
    cfg.backend_cycle_ms = 240;
    cfg.jitter_max_ms = 60;
    cfg.rng_seed = 9001;
    CHECK(config_from_json(config_to_json(cfg)) == cfg);

    CHECK_THROWS_AS(config_from_json("{not json"), ValidationError);
    CHECK_THROWS_AS(config_from_json(R"({"frame_period_ms": "eighty"})"), ValidationError);
    CHECK_THROWS_AS(read_config("no_such_config.json"), ValidationError);
    CHECK_THROWS_AS(read_corpus("no_such_corpus.jsonl"), ValidationError);
}

TEST_CASE("session invariants") {
    AlignedSession session = testing::qa_session("s1", {"who", "won"}, {"nobody", "knows", "yet"});
    CHECK(session_problems(session).empty());

    SUBCASE("overlapping words") {
        session.turns[0].words[1].start_ms = session.turns[0].words[0].end_ms - 10;
        auto problems = session_problems(session);
        REQUIRE(problems.size() == 1);
        CHECK(problems[0].find("overlaps") != std::string::npos);
    }
    SUBCASE("transcript mismatch") {
        session.turns[1].transcript = "nobody knows";
        auto problems = session_problems(session);
        REQUIRE(problems.size() == 1);
        CHECK(problems[0].find("transcript") != std::string::npos);
    }
    SUBCASE("alternation broken") {
        session.turns[1].speaker = Speaker::User;
        CHECK(!session_problems(session).empty());
    }
    SUBCASE("validate_session throws") {
        session.turns[0].words[0].end_ms = -5;
        CHECK_THROWS_AS(validate_session(session), ValidationError);
    }
}

TEST_CASE("session JSONL round trip") {
    AlignedSession session =
        testing::qa_session("round-trip", {"how", "far", "away"}, {"pretty", "far"});
    std::string line = session_to_json(session);
    CHECK(session_from_json(line) == session);
    CHECK(session_to_json(session_from_json(line)) == line);
    CHECK_THROWS_AS(session_from_json("{not json"), ValidationError);
}

TEST_CASE("frame record slots and stream names") {
    FrameRecord frame;
    frame.slot(StreamKind::Oracle) = 9;
    CHECK(frame.slot(StreamKind::Oracle) == 9);
    CHECK(frame.slot(StreamKind::InnerMonologue) == kPadToken);
    CHECK(frame.slot(StreamKind::InputAudio) == kSilenceToken);
    for (StreamKind kind : kAllStreams) {
        CHECK(stream_kind_from_name(stream_kind_name(kind)) == kind);
    }
    CHECK_THROWS_AS(stream_kind_from_name("sideband"), ValidationError);
}
