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

#include "tandem/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"

namespace tandem {

using nlohmann::json;

void validate_config(const TandemConfig& cfg) {
    if (cfg.frame_period_ms <= 0) throw ValidationError("frame_period_ms must be positive");
    if (cfg.backend_cycle_ms < 100 || cfg.backend_cycle_ms > 500) {
        throw ValidationError("backend_cycle_ms must be in [100, 500]");
    }
    if (cfg.backend_cycle_ms < cfg.frame_period_ms) {
        throw ValidationError("backend_cycle_ms must be >= frame_period_ms");
    }
    if (cfg.jitter_max_ms < 0) throw ValidationError("jitter_max_ms must be non-negative");
    if (cfg.forced_delay_ms < 0) throw ValidationError("forced_delay_ms must be non-negative");
    if (cfg.boundary_token == cfg.pad_token || cfg.boundary_token == cfg.silence_token ||
        cfg.pad_token == cfg.silence_token) {
        throw ValidationError("boundary, pad and silence tokens must be pairwise distinct");
    }
    if (cfg.boundary_token >= kFirstWordToken || cfg.pad_token >= kFirstWordToken ||
        cfg.silence_token >= kFirstWordToken) {
        throw ValidationError("boundary, pad and silence tokens must be reserved ids");
    }
}

std::string config_to_json(const TandemConfig& cfg) {
    json j = {
        {"frame_period_ms", cfg.frame_period_ms},
        {"backend_cycle_ms", cfg.backend_cycle_ms},
        {"jitter_max_ms", cfg.jitter_max_ms},
        {"forced_delay_ms", cfg.forced_delay_ms},
        {"boundary_token", cfg.boundary_token},
        {"pad_token", cfg.pad_token},
        {"silence_token", cfg.silence_token},
        {"rng_seed", cfg.rng_seed},
    };
    return j.dump(2);
}

TandemConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config JSON: ") + e.what());
    }
    TandemConfig cfg;
    try {
        if (j.contains("frame_period_ms")) cfg.frame_period_ms = j["frame_period_ms"].get<std::int64_t>();
        if (j.contains("backend_cycle_ms")) cfg.backend_cycle_ms = j["backend_cycle_ms"].get<std::int64_t>();
        if (j.contains("jitter_max_ms")) cfg.jitter_max_ms = j["jitter_max_ms"].get<std::int64_t>();
        if (j.contains("forced_delay_ms")) cfg.forced_delay_ms = j["forced_delay_ms"].get<std::int64_t>();
        if (j.contains("boundary_token")) cfg.boundary_token = j["boundary_token"].get<TokenId>();
        if (j.contains("pad_token")) cfg.pad_token = j["pad_token"].get<TokenId>();
        if (j.contains("silence_token")) cfg.silence_token = j["silence_token"].get<TokenId>();
        if (j.contains("rng_seed")) cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config field: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

TandemConfig read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

} // namespace tandem
