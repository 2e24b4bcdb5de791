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

#include "tandem/harness.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/rng.hpp"

namespace tandem {

using nlohmann::json;

std::size_t count_question_turns(const AlignedSession& session) {
    std::size_t count = 0;
    for (std::size_t t = 0; t + 1 < session.turns.size(); ++t) {
        if (session.turns[t].speaker == Speaker::User &&
            session.turns[t + 1].speaker == Speaker::System) {
            ++count;
        }
    }
    return count;
}

std::vector<LatencyRecord> measure_latency(const SessionTrace& trace,
                                           const AlignedSession& session,
                                           TokenId silence_token) {
    if (trace.session_id != session.session_id) {
        throw ValidationError("trace is for session '" + trace.session_id +
                              "', not '" + session.session_id + "'");
    }
    std::vector<LatencyRecord> records;
    for (std::size_t t = 0; t + 1 < session.turns.size(); ++t) {
        const Turn& turn = session.turns[t];
        if (turn.speaker != Speaker::User || session.turns[t + 1].speaker != Speaker::System) {
            continue;
        }
        // The turn's response window runs from the question's own start (the
        // system may begin mid-question) to the next question.
        std::int64_t open = turn.start_ms();
        std::int64_t close = std::numeric_limits<std::int64_t>::max();
        for (std::size_t u = t + 2; u < session.turns.size(); ++u) {
            if (session.turns[u].speaker == Speaker::User) {
                close = session.turns[u].start_ms();
                break;
            }
        }
        std::optional<std::int64_t> response_start;
        for (const FrameRecord& frame : trace.frames) {
            if (frame.wall_time_ms < open) continue;
            if (frame.wall_time_ms >= close) break;
            if (frame.slot(StreamKind::OutputAudio) != silence_token) {
                response_start = frame.wall_time_ms;
                break;
            }
        }
        if (!response_start) continue; // unanswered turn
        LatencyRecord record;
        record.session_id = session.session_id;
        record.turn_index = t;
        record.user_end_ms = turn.end_ms();
        record.response_start_ms = *response_start;
        record.latency_ms = record.response_start_ms - record.user_end_ms;
        records.push_back(std::move(record));
    }
    return records;
}

double median_ms(std::vector<std::int64_t> values) {
    if (values.empty()) throw ValidationError("median of empty set");
    std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double upper = static_cast<double>(values[mid]);
    if (values.size() % 2 == 1) return upper;
    std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
    return (static_cast<double>(values[mid - 1]) + upper) / 2.0;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

} // namespace

double MockJudgeClient::score(const JudgeRequest& request) {
    std::vector<std::string> reference = split_words(request.reference);
    std::vector<std::string> answer = split_words(request.answer);
    if (reference.empty() && answer.empty()) return 1.0;
    if (reference.empty() || answer.empty()) return 0.0;
    std::map<std::string, std::int64_t> counts;
    for (const std::string& w : reference) ++counts[w];
    std::int64_t overlap = 0;
    for (const std::string& w : answer) {
        auto it = counts.find(w);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    return static_cast<double>(overlap) /
           static_cast<double>(std::max(reference.size(), answer.size()));
}

SweepReport run_sweep(const std::vector<AlignedSession>& corpus, const TandemConfig& cfg,
                      const SweepOptions& options) {
    validate_config(cfg);
    if (options.delays_ms.empty()) throw ValidationError("run_sweep: no delays given");
    if (corpus.empty()) throw ValidationError("run_sweep: empty corpus");

    std::vector<std::int64_t> delays = options.delays_ms;
    std::sort(delays.begin(), delays.end());
    delays.erase(std::unique(delays.begin(), delays.end()), delays.end());

    MockLLMClient mock_llm(cfg.rng_seed);
    LLMClient* llm = options.llm;
    if (!llm) {
        mock_llm.load_corpus(corpus);
        llm = &mock_llm;
    }

    SweepReport report;
    report.config = cfg;
    report.seed = cfg.rng_seed;
    report.backend_latency_ms = options.backend_latency_ms;

    // Candidates and arrivals depend only on (corpus, cfg, seed); compute
    // them once so every point sees the identical oracle stream.
    struct SessionPlan {
        const AlignedSession* session;
        std::vector<OracleMessage> messages;
        std::string final_text;
    };
    std::vector<SessionPlan> plans;
    plans.reserve(corpus.size());
    for (const AlignedSession& session : corpus) {
        validate_session(session);
        SessionPlan plan;
        plan.session = &session;
        std::vector<Candidate> candidates = generate_candidates(session, cfg, *llm);
        UniformLatencyModel latency(options.backend_latency_ms, cfg.jitter_max_ms);
        plan.messages = relay(candidates, latency,
                              session_seed(cfg.rng_seed, session.session_id, seed_salt::kRelay));
        if (!candidates.empty()) plan.final_text = candidates.back().text;
        plans.push_back(std::move(plan));
    }

    for (std::int64_t delay : delays) {
        TandemConfig point_cfg = cfg;
        point_cfg.forced_delay_ms = delay;

        SweepPoint point;
        point.forced_delay_ms = delay;
        point.sessions = plans.size();

        std::vector<std::int64_t> latencies;
        std::vector<double> scores;
        bool judge_ok = options.judge != nullptr;

        for (const SessionPlan& plan : plans) {
            Tokenizer tokenizer;
            StubFrontEnd model(point_cfg);
            SessionTrace trace =
                run_session(*plan.session, point_cfg, model, plan.messages, tokenizer);

            std::vector<LatencyRecord> records =
                measure_latency(trace, *plan.session, point_cfg.silence_token);
            for (const LatencyRecord& record : records) latencies.push_back(record.latency_ms);
            point.answered_turns += records.size();
            point.unanswered_turns += count_question_turns(*plan.session) - records.size();

            if (judge_ok) {
                JudgeRequest request;
                for (const Turn& turn : plan.session->turns) {
                    if (turn.speaker != Speaker::User) continue;
                    if (!request.question.empty()) request.question += ' ';
                    request.question += turn.transcript;
                }
                request.reference = plan.final_text;
                std::vector<TokenId> spoken;
                for (const FrameRecord& frame : trace.frames) {
                    TokenId id = frame.slot(StreamKind::InnerMonologue);
                    if (id != point_cfg.pad_token) spoken.push_back(id);
                }
                request.answer = tokenizer.detokenize(spoken);
                try {
                    scores.push_back(options.judge->score(request));
                } catch (const ClientError& e) {
                    judge_ok = false;
                    report.warnings.push_back("judge failed at delay " + std::to_string(delay) +
                                              " ms: " + e.what());
                }
            }
        }

        if (!latencies.empty()) {
            point.median_latency_s = median_ms(latencies) / 1000.0;
            point.median_latency_clamped_s = std::max(0.0, point.median_latency_s);
        }
        if (judge_ok && !scores.empty()) {
            double total = 0.0;
            for (double s : scores) total += s;
            point.quality_score = total / static_cast<double>(scores.size());
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

std::string sweep_report_to_json(const SweepReport& report) {
    json points = json::array();
    for (const SweepPoint& point : report.points) {
        json jp = {
            {"forced_delay_ms", point.forced_delay_ms},
            {"median_latency_s", point.median_latency_s},
            {"median_latency_clamped_s", point.median_latency_clamped_s},
            {"sessions", point.sessions},
            {"answered_turns", point.answered_turns},
            {"unanswered_turns", point.unanswered_turns},
        };
        if (point.quality_score) jp["quality_score"] = *point.quality_score;
        points.push_back(std::move(jp));
    }
    json j = {
        {"config", json::parse(config_to_json(report.config))},
        {"seed", report.seed},
        {"backend_latency_ms", report.backend_latency_ms},
        {"points", std::move(points)},
        {"warnings", report.warnings},
    };
    return j.dump(2) + "\n";
}

SweepReport sweep_report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad report JSON: ") + e.what());
    }
    try {
        SweepReport report;
        report.config = config_from_json(j.at("config").dump());
        report.seed = j.at("seed").get<std::uint64_t>();
        report.backend_latency_ms = j.at("backend_latency_ms").get<std::int64_t>();
        for (const json& jp : j.at("points")) {
            SweepPoint point;
            point.forced_delay_ms = jp.at("forced_delay_ms").get<std::int64_t>();
            point.median_latency_s = jp.at("median_latency_s").get<double>();
            point.median_latency_clamped_s = jp.at("median_latency_clamped_s").get<double>();
            point.sessions = jp.at("sessions").get<std::size_t>();
            point.answered_turns = jp.at("answered_turns").get<std::size_t>();
            point.unanswered_turns = jp.at("unanswered_turns").get<std::size_t>();
            if (jp.contains("quality_score")) point.quality_score = jp["quality_score"].get<double>();
            report.points.push_back(point);
        }
        for (const json& jw : j.at("warnings")) report.warnings.push_back(jw.get<std::string>());
        return report;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad report schema: ") + e.what());
    }
}

void write_sweep_report(const SweepReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write report file '" + path + "'");
    out << sweep_report_to_json(report);
}

SweepReport read_sweep_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sweep_report_from_json(buf.str());
}

std::string latency_records_to_csv(const std::vector<LatencyRecord>& records) {
    std::string out = "session_id,turn_index,user_end_ms,response_start_ms,latency_ms\n";
    for (const LatencyRecord& record : records) {
        out += record.session_id;
        out += ',' + std::to_string(record.turn_index);
        out += ',' + std::to_string(record.user_end_ms);
        out += ',' + std::to_string(record.response_start_ms);
        out += ',' + std::to_string(record.latency_ms);
        out += '\n';
    }
    return out;
}

std::string sweep_plot_data_csv(const SweepReport& report) {
    std::string out = "forced_delay_ms,median_latency_s,median_latency_clamped_s,quality_score\n";
    for (const SweepPoint& point : report.points) {
        std::ostringstream row;
        row << point.forced_delay_ms << ',' << point.median_latency_s << ','
            << point.median_latency_clamped_s << ',';
        if (point.quality_score) row << *point.quality_score;
        row << '\n';
        out += row.str();
    }
    return out;
}

} // namespace tandem
