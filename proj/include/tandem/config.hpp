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
#include <string>

#include "tandem/tokens.hpp"

namespace tandem {

// Every timing parameter of the tandem loop. The front-end clock ticks at
// frame_period_ms; the back-end is polled every backend_cycle_ms (a slower
// cycle, 100-500 ms). forced_delay_ms > 0 suppresses the system's output
// until that long after each question ends; 0 leaves it unconstrained.
struct TandemConfig {
    std::int64_t frame_period_ms = 80;
    std::int64_t backend_cycle_ms = 200;
    std::int64_t jitter_max_ms = 120;
    std::int64_t forced_delay_ms = 0;
    TokenId boundary_token = kBoundaryToken;
    TokenId pad_token = kPadToken;
    TokenId silence_token = kSilenceToken;
    std::uint64_t rng_seed = 42;

    bool operator==(const TandemConfig&) const = default;
};

// Throws ValidationError on any broken invariant.
void validate_config(const TandemConfig& cfg);

std::string config_to_json(const TandemConfig& cfg);
TandemConfig config_from_json(const std::string& text); // throws ValidationError
TandemConfig read_config(const std::string& path);      // throws ValidationError

} // namespace tandem
