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
#include <string_view>

namespace tandem {

// Deterministic, platform-stable RNG (splitmix64). std::uniform_int_distribution
// is implementation-defined, which would break byte-identical reruns of the
// pipeline across toolchains, so all sampling goes through this.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
    Rng r(x);
    return r.next();
}

// Salts that keep independent sampling streams from colliding when they are
// all derived from one config seed.
namespace seed_salt {
inline constexpr std::uint64_t kRelay = 0x72656c6179ULL;
inline constexpr std::uint64_t kScheduleJitter = 0x6a697474ULL;
inline constexpr std::uint64_t kMockLlm = 0x6c6c6dULL;
inline constexpr std::uint64_t kMockSimulator = 0x73696dULL;
inline constexpr std::uint64_t kCorpusGen = 0x636f7270ULL;
} // namespace seed_salt

// Per-session seed derivation; keeps per-session streams independent of the
// order sessions are processed in.
inline std::uint64_t session_seed(std::uint64_t global_seed, std::string_view session_id,
                                  std::uint64_t salt) {
    return mix64(global_seed ^ fnv1a64(session_id) ^ salt);
}

} // namespace tandem
