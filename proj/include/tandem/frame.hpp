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

#include "tandem/errors.hpp"
#include "tandem/tokens.hpp"

namespace tandem {

// Quantizes wall time onto the frame clock. A time exactly on a boundary
// belongs to the later frame (floor semantics).
inline std::int64_t frame_of(std::int64_t time_ms, std::int64_t frame_period_ms) {
    if (time_ms < 0) throw ValidationError("frame_of: negative time");
    if (frame_period_ms <= 0) throw ValidationError("frame_of: non-positive frame period");
    return time_ms / frame_period_ms;
}

// One front-end clock tick: one token per stream. Absent speech is padded
// (pad for text streams, silence for audio streams) so all four slots are
// always present.
struct FrameRecord {
    std::uint64_t frame_index = 0;
    std::int64_t wall_time_ms = 0;
    std::array<TokenId, 4> slots = {kSilenceToken, kSilenceToken, kPadToken, kPadToken};

    TokenId& slot(StreamKind kind) { return slots[static_cast<std::size_t>(kind)]; }
    TokenId slot(StreamKind kind) const { return slots[static_cast<std::size_t>(kind)]; }

    bool operator==(const FrameRecord&) const = default;
};

} // namespace tandem
