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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tandem/rng.hpp"

namespace tandem {

using TokenId = std::uint32_t;

// Reserved token ids, shared by every stream. Text tokenization never
// produces them.
inline constexpr TokenId kPadToken = 0;
inline constexpr TokenId kBoundaryToken = 1;
inline constexpr TokenId kSilenceToken = 2;
inline constexpr TokenId kFirstWordToken = 3;

// The four streams carried by every frame. Oracle is the stream that feeds
// back-end candidate responses into the front-end context; the other three
// are the classic full-duplex trio.
enum class StreamKind : std::uint8_t {
    InputAudio = 0,
    OutputAudio = 1,
    InnerMonologue = 2,
    Oracle = 3,
};

inline constexpr std::array<StreamKind, 4> kAllStreams = {
    StreamKind::InputAudio,
    StreamKind::OutputAudio,
    StreamKind::InnerMonologue,
    StreamKind::Oracle,
};

std::string_view stream_kind_name(StreamKind kind);
StreamKind stream_kind_from_name(std::string_view name); // throws ValidationError

// Word-level tokenizer with a growable interned vocabulary. Ids 0..2 are
// reserved; words get ids from 3 up, in first-seen order, so a fixed corpus
// processed in a fixed order yields a fixed vocabulary. One instance is
// shared by the inner-monologue and oracle streams. Not thread-safe; the
// pipeline tokenizes from a single thread.
class Tokenizer {
public:
    Tokenizer() = default;

    // Splits on ASCII whitespace, interning unseen words. Only printable
    // ASCII is encodable; anything else raises EncodingError with the byte
    // offset of the offender.
    std::vector<TokenId> tokenize(std::string_view text);

    // Inverse of tokenize modulo whitespace normalization (single spaces).
    std::string detokenize(std::span<const TokenId> tokens) const;

    std::string token_text(TokenId id) const; // throws ValidationError on out-of-range id
    TokenId intern(std::string_view word);

    std::size_t vocab_size() const { return kFirstWordToken + words_.size(); }

    static bool is_reserved(TokenId id) { return id < kFirstWordToken; }

private:
    std::vector<std::string> words_;  // id - kFirstWordToken -> word
    std::unordered_map<std::string, TokenId> index_;
};

// Opaque stand-in for an audio token at a given frame. Real acoustic
// tokenization is out of scope; these ids only preserve the stream shape.
// Never collides with the reserved ids.
inline TokenId placeholder_audio_token(std::uint64_t session_hash, std::uint64_t frame_index,
                                       std::uint64_t stream_salt) {
    std::uint64_t h = mix64(session_hash ^ (frame_index * 0x9e3779b97f4a7c15ULL) ^ stream_salt);
    return kFirstWordToken + static_cast<TokenId>(h % 4096);
}

} // namespace tandem
