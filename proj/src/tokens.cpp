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

#include "tandem/tokens.hpp"

#include <cctype>

#include "tandem/errors.hpp"

namespace tandem {

namespace {

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_encodable(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return (u >= 0x20 && u <= 0x7e) || is_ascii_space(c);
}

} // namespace

std::string_view stream_kind_name(StreamKind kind) {
    switch (kind) {
    case StreamKind::InputAudio: return "input_audio";
    case StreamKind::OutputAudio: return "output_audio";
    case StreamKind::InnerMonologue: return "inner_monologue";
    case StreamKind::Oracle: return "oracle";
    }
    throw ValidationError("unknown StreamKind");
}

StreamKind stream_kind_from_name(std::string_view name) {
    for (StreamKind kind : kAllStreams) {
        if (stream_kind_name(kind) == name) return kind;
    }
    throw ValidationError("unknown stream name '" + std::string(name) + "'");
}

std::vector<TokenId> Tokenizer::tokenize(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_encodable(text[i])) {
            throw EncodingError("unencodable byte 0x" +
                                    [&] {
                                        char buf[3];
                                        std::snprintf(buf, sizeof buf, "%02x",
                                                      static_cast<unsigned char>(text[i]));
                                        return std::string(buf);
                                    }() +
                                    " at position " + std::to_string(i),
                                i);
        }
    }
    std::vector<TokenId> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_ascii_space(text[i])) ++i;
        if (i > start) out.push_back(intern(text.substr(start, i - start)));
    }
    return out;
}

std::string Tokenizer::detokenize(std::span<const TokenId> tokens) const {
    std::string out;
    for (TokenId id : tokens) {
        if (!out.empty()) out += ' ';
        out += token_text(id);
    }
    return out;
}

std::string Tokenizer::token_text(TokenId id) const {
    switch (id) {
    case kPadToken: return "<pad>";
    case kBoundaryToken: return "<boundary>";
    case kSilenceToken: return "<silence>";
    default: break;
    }
    std::size_t slot = id - kFirstWordToken;
    if (slot >= words_.size()) {
        throw ValidationError("token id " + std::to_string(id) + " outside vocabulary of size " +
                              std::to_string(vocab_size()));
    }
    return words_[slot];
}

TokenId Tokenizer::intern(std::string_view word) {
    auto it = index_.find(std::string(word));
    if (it != index_.end()) return it->second;
    TokenId id = static_cast<TokenId>(kFirstWordToken + words_.size());
    words_.emplace_back(word);
    index_.emplace(words_.back(), id);
    return id;
}

} // namespace tandem
