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

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tandem/dataset.hpp"
#include "tandem/harness.hpp"
#include "tandem/http_clients.hpp"
#include "tandem/orchestrator.hpp"

namespace {

using namespace tandem;

TandemConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                         std::optional<std::int64_t> forced_delay) {
    TandemConfig cfg = path.empty() ? TandemConfig{} : read_config(path);
    if (seed) cfg.rng_seed = *seed;
    if (forced_delay) cfg.forced_delay_ms = *forced_delay;
    validate_config(cfg);
    return cfg;
}

std::map<std::string, std::vector<ScheduledOracle>> group_oracles(const std::string& path) {
    std::map<std::string, std::vector<ScheduledOracle>> by_session;
    for (OracleFileRecord& record : read_oracle_file(path)) {
        by_session[record.session_id].push_back(std::move(record.entry));
    }
    return by_session;
}

int cmd_gen_corpus(const std::string& out, std::size_t count, std::uint64_t seed,
                   std::size_t min_turns, std::size_t max_turns) {
    CorpusGenOptions options;
    options.count = count;
    options.seed = seed;
    options.min_turn_pairs = min_turns;
    options.max_turn_pairs = max_turns;
    std::vector<AlignedSession> sessions = generate_corpus(options);
    write_corpus(sessions, out);
    std::cout << "wrote " << sessions.size() << " sessions to " << out << "\n";
    return 0;
}

int cmd_validate(const std::string& corpus) {
    CorpusReport report = validate_corpus(corpus);
    std::cout << corpus_report_text(report);
    return report.ok() ? 0 : 1;
}

int cmd_gen_oracles(const std::string& corpus_path, const std::string& config_path,
                    const std::string& out, std::optional<std::uint64_t> seed,
                    const std::string& simulator_kind, const ChatEndpoint& endpoint) {
    TandemConfig cfg = load_config(config_path, seed, std::nullopt);
    std::vector<AlignedSession> corpus = read_corpus(corpus_path);

    MockSimulatorClient mock(cfg.rng_seed);
    HttpSimulatorClient http(endpoint);
    SimulatorClient& simulator =
        simulator_kind == "http" ? static_cast<SimulatorClient&>(http) : mock;

    std::vector<std::pair<std::string, std::vector<ScheduledOracle>>> by_session;
    std::size_t entries = 0;
    for (const AlignedSession& session : corpus) {
        std::vector<ScheduledOracle> schedule = schedule_oracles(session, cfg, simulator);
        entries += schedule.size();
        by_session.emplace_back(session.session_id, std::move(schedule));
    }
    write_oracle_file(out, by_session);
    std::cout << "wrote " << entries << " oracle entries for " << corpus.size()
              << " sessions to " << out << "\n";
    return 0;
}

int cmd_augment(const std::string& corpus_path, const std::string& oracles_path,
                const std::string& config_path, const std::string& out,
                std::optional<std::uint64_t> seed) {
    TandemConfig cfg = load_config(config_path, seed, std::nullopt);
    std::vector<AlignedSession> corpus = read_corpus(corpus_path);
    auto by_session = group_oracles(oracles_path);

    Tokenizer tokenizer;
    std::vector<TrainingSequence> sequences;
    for (const AlignedSession& session : corpus) {
        auto it = by_session.find(session.session_id);
        if (it == by_session.end()) {
            throw ValidationError("no oracle schedule for session '" + session.session_id + "'");
        }
        sequences.push_back(build_training_sequence(session, it->second, cfg, tokenizer));
    }
    write_training_file(sequences, out);
    std::cout << "wrote " << sequences.size() << " training sequences to " << out << "\n";
    return 0;
}

int cmd_simulate(const std::string& corpus_path, const std::string& config_path,
                 const std::string& trace_out, const std::string& binary_trace_out,
                 std::optional<std::uint64_t> seed, std::optional<std::int64_t> forced_delay,
                 const std::string& oracles_path, const std::string& llm_kind,
                 std::int64_t backend_latency_ms, const ChatEndpoint& endpoint) {
    TandemConfig cfg = load_config(config_path, seed, forced_delay);
    std::vector<AlignedSession> corpus = read_corpus(corpus_path);

    MockLLMClient mock(cfg.rng_seed);
    mock.load_corpus(corpus);
    HttpLLMClient http(endpoint);
    LLMClient& llm = llm_kind == "http" ? static_cast<LLMClient&>(http) : mock;

    std::map<std::string, std::vector<ScheduledOracle>> replay;
    if (!oracles_path.empty()) replay = group_oracles(oracles_path);

    std::vector<SessionTrace> traces;
    for (const AlignedSession& session : corpus) {
        std::vector<OracleMessage> messages;
        if (!oracles_path.empty()) {
            auto it = replay.find(session.session_id);
            if (it == replay.end()) {
                throw ValidationError("no oracle schedule for session '" + session.session_id + "'");
            }
            messages = schedule_to_messages(it->second, cfg,
                                            session_seed(cfg.rng_seed, session.session_id, 0));
        } else {
            std::vector<Candidate> candidates = generate_candidates(session, cfg, llm);
            UniformLatencyModel latency(backend_latency_ms, cfg.jitter_max_ms);
            messages = relay(candidates, latency,
                             session_seed(cfg.rng_seed, session.session_id, seed_salt::kRelay));
        }
        Tokenizer tokenizer;
        StubFrontEnd model(cfg);
        traces.push_back(run_session(session, cfg, model, messages, tokenizer));
    }
    if (!trace_out.empty()) write_traces_jsonl(traces, trace_out);
    if (!binary_trace_out.empty()) write_traces_binary(traces, binary_trace_out);
    std::cout << "simulated " << traces.size() << " sessions\n";
    return 0;
}

int cmd_latency(const std::string& trace_path, const std::string& corpus_path,
                const std::string& out) {
    std::vector<SessionTrace> traces = read_traces(trace_path);
    std::vector<AlignedSession> corpus = read_corpus(corpus_path);
    std::map<std::string, const AlignedSession*> by_id;
    for (const AlignedSession& session : corpus) by_id[session.session_id] = &session;

    std::vector<LatencyRecord> records;
    std::size_t unanswered = 0;
    for (const SessionTrace& trace : traces) {
        auto it = by_id.find(trace.session_id);
        if (it == by_id.end()) {
            throw ValidationError("trace session '" + trace.session_id + "' not in corpus");
        }
        std::vector<LatencyRecord> session_records = measure_latency(trace, *it->second);
        unanswered += count_question_turns(*it->second) - session_records.size();
        for (LatencyRecord& record : session_records) records.push_back(std::move(record));
    }

    std::string csv = latency_records_to_csv(records);
    if (out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream file(out);
        if (!file) throw ValidationError("cannot write '" + out + "'");
        file << csv;
    }
    std::cerr << records.size() << " answered turns, " << unanswered << " unanswered\n";
    if (!records.empty()) {
        std::vector<std::int64_t> latencies;
        for (const LatencyRecord& record : records) latencies.push_back(record.latency_ms);
        double median = median_ms(latencies) / 1000.0;
        std::cerr << "median latency " << median << " s (clamped " << std::max(0.0, median)
                  << " s)\n";
    }
    return 0;
}

int cmd_sweep(const std::string& corpus_path, const std::string& config_path,
              const std::string& delays_arg, const std::string& out,
              const std::string& judge_kind, std::optional<std::uint64_t> seed,
              std::int64_t backend_latency_ms, const ChatEndpoint& endpoint) {
    TandemConfig cfg = load_config(config_path, seed, std::nullopt);
    std::vector<AlignedSession> corpus = read_corpus(corpus_path);

    SweepOptions options;
    options.backend_latency_ms = backend_latency_ms;
    std::stringstream ss(delays_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) options.delays_ms.push_back(std::stoll(item));
    }

    MockJudgeClient mock_judge;
    HttpJudgeClient http_judge(endpoint);
    if (judge_kind == "mock") options.judge = &mock_judge;
    else if (judge_kind == "http") options.judge = &http_judge;
    else if (!judge_kind.empty()) throw ValidationError("unknown judge '" + judge_kind + "'");

    SweepReport report = run_sweep(corpus, cfg, options);
    write_sweep_report(report, out);
    for (const std::string& warning : report.warnings) std::cerr << "warning: " << warning << "\n";
    std::cout << "wrote sweep report with " << report.points.size() << " points to " << out << "\n";
    return 0;
}

int cmd_plot_data(const std::string& report_path, const std::string& out) {
    SweepReport report = read_sweep_report(report_path);
    std::string csv = sweep_plot_data_csv(report);
    if (out.empty()) {
        std::cout << csv;
    } else {
        std::ofstream file(out);
        if (!file) throw ValidationError("cannot write '" + out + "'");
        file << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tandem: frame-clocked conversational front-end with an asynchronous "
                 "back-end relay, plus its data pipeline and latency harness"};
    app.require_subcommand(1);

    std::string corpus, config, out, oracles, trace, report, delays = "0,250,500,1000,2000";
    std::string trace_out, binary_trace_out, judge_kind, simulator_kind = "mock", llm_kind = "mock";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> forced_delay;
    std::int64_t backend_latency_ms = 250;
    std::size_t count = 200, min_turns = 1, max_turns = 3;
    ChatEndpoint endpoint;

    auto add_endpoint_flags = [&](CLI::App* cmd) {
        cmd->add_option("--endpoint", endpoint.base_url, "chat-completions base URL");
        cmd->add_option("--endpoint-path", endpoint.path, "chat-completions path");
        cmd->add_option("--model", endpoint.model, "model name sent to the endpoint");
    };

    CLI::App* gen_corpus = app.add_subcommand("gen-corpus", "generate a synthetic aligned corpus");
    gen_corpus->add_option("--count", count, "number of sessions")->capture_default_str();
    gen_corpus->add_option("--out", out, "output corpus JSONL")->required();
    gen_corpus->add_option("--seed", seed, "RNG seed");
    gen_corpus->add_option("--min-turns", min_turns, "min question/answer pairs per session");
    gen_corpus->add_option("--max-turns", max_turns, "max question/answer pairs per session");

    CLI::App* validate = app.add_subcommand("validate", "validate an aligned corpus file");
    validate->add_option("--corpus", corpus, "corpus JSONL")->required();

    CLI::App* gen_oracles =
        app.add_subcommand("gen-oracles", "generate simulated-oracle schedules for a corpus");
    gen_oracles->add_option("--corpus", corpus, "corpus JSONL")->required();
    gen_oracles->add_option("--config", config, "config JSON");
    gen_oracles->add_option("--out", out, "output oracle JSONL")->required();
    gen_oracles->add_option("--seed", seed, "RNG seed (overrides config)");
    gen_oracles->add_option("--simulator", simulator_kind, "mock|http")->capture_default_str();
    add_endpoint_flags(gen_oracles);

    CLI::App* augment =
        app.add_subcommand("augment", "build four-stream training sequences from a corpus");
    augment->add_option("--corpus", corpus, "corpus JSONL")->required();
    augment->add_option("--oracles", oracles, "oracle JSONL from gen-oracles")->required();
    augment->add_option("--config", config, "config JSON");
    augment->add_option("--out", out, "output training JSONL")->required();
    augment->add_option("--seed", seed, "RNG seed (overrides config)");

    CLI::App* simulate = app.add_subcommand("simulate", "run the tandem loop over a corpus");
    simulate->add_option("--corpus", corpus, "corpus JSONL")->required();
    simulate->add_option("--config", config, "config JSON");
    simulate->add_option("--trace-out", trace_out, "output trace JSONL")->required();
    simulate->add_option("--binary-trace-out", binary_trace_out, "output compact binary trace");
    simulate->add_option("--forced-delay-ms", forced_delay, "forced delay (overrides config)");
    simulate->add_option("--seed", seed, "RNG seed (overrides config)");
    simulate->add_option("--oracles", oracles, "replay a simulated-oracle schedule file");
    simulate->add_option("--llm", llm_kind, "mock|http back-end")->capture_default_str();
    simulate->add_option("--backend-latency-ms", backend_latency_ms, "relay base latency")
        ->capture_default_str();
    add_endpoint_flags(simulate);

    CLI::App* latency = app.add_subcommand("latency", "measure per-turn response latency");
    latency->add_option("--trace", trace, "trace file (JSONL or binary)")->required();
    latency->add_option("--corpus", corpus, "corpus JSONL")->required();
    latency->add_option("--out", out, "output CSV (stdout when omitted)");

    CLI::App* sweep = app.add_subcommand("sweep", "forced-delay sweep with latency and quality");
    sweep->add_option("--corpus", corpus, "corpus JSONL")->required();
    sweep->add_option("--config", config, "config JSON");
    sweep->add_option("--delays", delays, "comma-separated delays in ms")->capture_default_str();
    sweep->add_option("--out", out, "output report JSON")->required();
    sweep->add_option("--judge", judge_kind, "mock|http quality judge");
    sweep->add_option("--seed", seed, "RNG seed (overrides config)");
    sweep->add_option("--backend-latency-ms", backend_latency_ms, "relay base latency")
        ->capture_default_str();
    add_endpoint_flags(sweep);

    CLI::App* plot_data = app.add_subcommand("plot-data", "emit plot series from a sweep report");
    plot_data->add_option("--report", report, "sweep report JSON")->required();
    plot_data->add_option("--out", out, "output CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_corpus->parsed()) {
            return cmd_gen_corpus(out, count, seed.value_or(TandemConfig{}.rng_seed), min_turns,
                                  max_turns);
        }
        if (validate->parsed()) return cmd_validate(corpus);
        if (gen_oracles->parsed()) {
            return cmd_gen_oracles(corpus, config, out, seed, simulator_kind, endpoint);
        }
        if (augment->parsed()) return cmd_augment(corpus, oracles, config, out, seed);
        if (simulate->parsed()) {
            return cmd_simulate(corpus, config, trace_out, binary_trace_out, seed, forced_delay,
                                oracles, llm_kind, backend_latency_ms, endpoint);
        }
        if (latency->parsed()) return cmd_latency(trace, corpus, out);
        if (sweep->parsed()) {
            return cmd_sweep(corpus, config, delays, out, judge_kind, seed, backend_latency_ms,
                             endpoint);
        }
        if (plot_data->parsed()) return cmd_plot_data(report, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
