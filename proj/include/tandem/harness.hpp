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
#include <optional>
#include <string>
#include <vector>

#include "tandem/config.hpp"
#include "tandem/orchestrator.hpp"
#include "tandem/session.hpp"

namespace tandem {

// Response latency for one question turn: time from the end of the
// question to the first non-silence output-audio frame. Negative exactly
// when the system starts answering before the question ends.
struct LatencyRecord {
    std::string session_id;
    std::size_t turn_index = 0;
    std::int64_t user_end_ms = 0;
    std::int64_t response_start_ms = 0;
    std::int64_t latency_ms = 0;

    bool operator==(const LatencyRecord&) const = default;
};

// One record per answered question turn; a turn whose window holds only
// silence yields no record (unanswered). Throws ValidationError when trace
// and session do not belong together.
std::vector<LatencyRecord> measure_latency(const SessionTrace& trace,
                                           const AlignedSession& session,
                                           TokenId silence_token = kSilenceToken);

// Question turns that have a recorded response (the denominator for the
// unanswered count).
std::size_t count_question_turns(const AlignedSession& session);

double median_ms(std::vector<std::int64_t> values); // throws on empty

// Answer-quality judge. The mock is a deterministic token-overlap score in
// [0, 1] between the final oracle text and what the system actually said;
// an HTTP judge can replace it outside the test path.
struct JudgeRequest {
    std::string question;
    std::string reference; // final oracle text
    std::string answer;    // detokenized monologue
};

class JudgeClient {
public:
    virtual ~JudgeClient() = default;
    // Throws ClientError on failure.
    virtual double score(const JudgeRequest& request) = 0;
};

// Word-multiset overlap |reference ∩ answer| / max(|reference|, |answer|).
// Equals the fraction of final-oracle words present when the answer is
// short, and penalizes unrelated speech when it is long.
class MockJudgeClient : public JudgeClient {
public:
    double score(const JudgeRequest& request) override;
};

struct SweepPoint {
    std::int64_t forced_delay_ms = 0;
    double median_latency_s = 0.0;
    double median_latency_clamped_s = 0.0; // reporting convention: medians clamp at 0.0
    std::optional<double> quality_score;
    std::size_t sessions = 0;
    std::size_t answered_turns = 0;
    std::size_t unanswered_turns = 0;
};

struct SweepReport {
    TandemConfig config;
    std::uint64_t seed = 0;
    std::int64_t backend_latency_ms = 0;
    std::vector<SweepPoint> points; // sorted by forced_delay_ms
    std::vector<std::string> warnings;
};

struct SweepOptions {
    std::vector<std::int64_t> delays_ms;
    std::int64_t backend_latency_ms = 250;
    JudgeClient* judge = nullptr;   // optional
    LLMClient* llm = nullptr;       // optional; defaults to the corpus-backed mock
};

// Runs every session at every forced delay with identical seeds, so only
// the delay varies between points. Judge failures drop the point's quality
// score and add a warning instead of failing the sweep.
SweepReport run_sweep(const std::vector<AlignedSession>& corpus, const TandemConfig& cfg,
                      const SweepOptions& options);

std::string sweep_report_to_json(const SweepReport& report);
SweepReport sweep_report_from_json(const std::string& text);
void write_sweep_report(const SweepReport& report, const std::string& path);
SweepReport read_sweep_report(const std::string& path);

// latencies.csv, one answered turn per row:
// session_id,turn_index,user_end_ms,response_start_ms,latency_ms
std::string latency_records_to_csv(const std::vector<LatencyRecord>& records);

// plot-data series: forced_delay_ms,median_latency_s,median_latency_clamped_s,quality_score
std::string sweep_plot_data_csv(const SweepReport& report);

} // namespace tandem
