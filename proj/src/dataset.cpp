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

#include "tandem/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/orchestrator.hpp"
#include "tandem/rng.hpp"

namespace tandem {

using nlohmann::json;

std::vector<OracleMessage> schedule_to_messages(const std::vector<ScheduledOracle>& schedule,
                                                const TandemConfig& cfg, std::uint64_t seed) {
    // Jitter the injection times, keyed by issue index so identical texts
    // cannot be confused, then rebuild messages in jittered-arrival order.
    // A jitter inversion shows up as an out-of-order arrival downstream.
    std::vector<TimedText> keyed;
    keyed.reserve(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        keyed.push_back({schedule[i].emit_time_ms, std::to_string(i)});
    }
    std::vector<TimedText> jittered = apply_jitter(keyed, cfg.jitter_max_ms, seed);

    std::vector<OracleMessage> messages;
    messages.reserve(jittered.size());
    for (const TimedText& entry : jittered) {
        std::size_t source = std::stoul(entry.text);
        OracleMessage message;
        message.seq = source;
        message.text = schedule[source].oracle.text;
        message.issued_at_ms = schedule[source].emit_time_ms;
        message.arrived_at_ms = entry.emit_time_ms;
        message.source_words = schedule[source].oracle.ratio.observed;
        messages.push_back(std::move(message));
    }
    return messages;
}

TrainingSequence build_training_sequence(const AlignedSession& session,
                                         const std::vector<ScheduledOracle>& schedule,
                                         const TandemConfig& cfg, Tokenizer& tokenizer) {
    validate_config(cfg);
    validate_session(session);
    for (const ScheduledOracle& entry : schedule) {
        if (entry.turn_index >= session.turns.size() ||
            session.turns[entry.turn_index].speaker != Speaker::User) {
            throw ValidationError("schedule does not match session '" + session.session_id + "'");
        }
    }

    const std::uint64_t seed = session_seed(cfg.rng_seed, session.session_id, 0);
    std::vector<OracleMessage> messages = schedule_to_messages(schedule, cfg, seed);
    std::vector<HintLevel> level_of_seq(schedule.size(), 0);
    for (std::size_t i = 0; i < schedule.size(); ++i) level_of_seq[i] = schedule[i].oracle.level;

    // Span: session plus tail for the last message to finish emitting.
    std::size_t longest = 0;
    std::int64_t last_activity = session.end_ms();
    for (const OracleMessage& m : messages) {
        std::istringstream in(m.text);
        std::string w;
        std::size_t n = 0;
        while (in >> w) ++n;
        longest = std::max(longest, n);
        last_activity = std::max(last_activity, m.arrived_at_ms);
    }
    std::int64_t span_end =
        last_activity + static_cast<std::int64_t>(longest + 3) * cfg.frame_period_ms;
    std::int64_t frame_count = frame_of(span_end, cfg.frame_period_ms) + 1;

    const std::uint64_t session_hash = fnv1a64(session.session_id);

    // Monologue layout: the recorded response words at their aligned start
    // frames, spilling forward when a frame is already taken.
    std::vector<TokenId> monologue(static_cast<std::size_t>(frame_count), cfg.pad_token);
    std::int64_t cursor = 0;
    for (const Turn& turn : session.turns) {
        if (turn.speaker != Speaker::System) continue;
        for (const TimedWord& word : turn.words) {
            for (TokenId id : tokenizer.tokenize(word.text)) {
                std::int64_t at = std::max(frame_of(word.start_ms, cfg.frame_period_ms), cursor);
                if (at >= frame_count) break;
                monologue[static_cast<std::size_t>(at)] = id;
                cursor = at + 1;
            }
        }
    }

    TrainingSequence sequence;
    sequence.session_id = session.session_id;
    sequence.frames.reserve(static_cast<std::size_t>(frame_count));

    std::vector<TraceEvent> events;
    OracleStreamEmitter emitter(cfg, tokenizer);
    std::size_t next_arrival = 0;
    std::optional<std::uint64_t> emitting_seq;

    for (std::int64_t f = 0; f < frame_count; ++f) {
        std::int64_t now = f * cfg.frame_period_ms;
        while (next_arrival < messages.size() && messages[next_arrival].arrived_at_ms <= now) {
            emitter.on_arrival(messages[next_arrival], now, events);
            ++next_arrival;
        }
        bool fresh = emitter.state().active && !emitter.state().active->begun();
        if (fresh) emitting_seq = emitter.state().active->seq;
        TokenId oracle_token = emitter.step(true, now, events);
        if (fresh && oracle_token == cfg.boundary_token && emitting_seq) {
            sequence.oracle_annotations.push_back({static_cast<std::uint64_t>(f), *emitting_seq,
                                                   level_of_seq[*emitting_seq]});
        }

        FrameRecord frame;
        frame.frame_index = static_cast<std::uint64_t>(f);
        frame.wall_time_ms = now;

        TokenId input_token = cfg.silence_token;
        TokenId output_token = cfg.silence_token;
        for (const Turn& turn : session.turns) {
            if (now < turn.start_ms() || now >= turn.end_ms()) continue;
            if (turn.speaker == Speaker::User) {
                input_token = placeholder_audio_token(session_hash, static_cast<std::uint64_t>(f),
                                                      seed_salt::kCorpusGen);
            } else {
                output_token = placeholder_audio_token(session_hash, static_cast<std::uint64_t>(f),
                                                       seed_salt::kRelay);
            }
        }
        frame.slot(StreamKind::InputAudio) = input_token;
        frame.slot(StreamKind::OutputAudio) = output_token;
        frame.slot(StreamKind::InnerMonologue) = monologue[static_cast<std::size_t>(f)];
        frame.slot(StreamKind::Oracle) = oracle_token;
        sequence.frames.push_back(frame);
    }
    return sequence;
}

std::string training_sequence_to_json(const TrainingSequence& sequence) {
    json frames = json::array();
    for (const FrameRecord& frame : sequence.frames) {
        json slots;
        for (StreamKind kind : kAllStreams) {
            slots[std::string(stream_kind_name(kind))] = frame.slot(kind);
        }
        frames.push_back({{"frame_index", frame.frame_index},
                          {"wall_time_ms", frame.wall_time_ms},
                          {"slots", std::move(slots)}});
    }
    json annotations = json::array();
    for (const TrainingSequence::Annotation& a : sequence.oracle_annotations) {
        annotations.push_back({{"frame_index", a.frame_index}, {"seq", a.seq}, {"level", a.level}});
    }
    json j = {{"session_id", sequence.session_id},
              {"frames", std::move(frames)},
              {"oracle_annotations", std::move(annotations)}};
    return j.dump();
}

TrainingSequence training_sequence_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad training JSON: ") + e.what());
    }
    try {
        TrainingSequence sequence;
        sequence.session_id = j.at("session_id").get<std::string>();
        for (const json& jf : j.at("frames")) {
            FrameRecord frame;
            frame.frame_index = jf.at("frame_index").get<std::uint64_t>();
            frame.wall_time_ms = jf.at("wall_time_ms").get<std::int64_t>();
            for (StreamKind kind : kAllStreams) {
                frame.slot(kind) = jf.at("slots").at(std::string(stream_kind_name(kind))).get<TokenId>();
            }
            sequence.frames.push_back(frame);
        }
        for (const json& ja : j.at("oracle_annotations")) {
            sequence.oracle_annotations.push_back({ja.at("frame_index").get<std::uint64_t>(),
                                                   ja.at("seq").get<std::uint64_t>(),
                                                   ja.at("level").get<int>()});
        }
        return sequence;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad training schema: ") + e.what());
    }
}

void write_training_file(const std::vector<TrainingSequence>& sequences, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write training file '" + path + "'");
    for (const TrainingSequence& sequence : sequences) {
        out << training_sequence_to_json(sequence) << '\n';
    }
}

std::vector<TrainingSequence> read_training_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open training file '" + path + "'");
    std::vector<TrainingSequence> sequences;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) sequences.push_back(training_sequence_from_json(line));
    }
    return sequences;
}

CorpusReport validate_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open corpus file '" + path + "'");
    CorpusReport report;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        AlignedSession session;
        try {
            session = session_from_json(line);
        } catch (const ValidationError& e) {
            report.failures.push_back({line_no, "", {e.what()}});
            continue;
        }
        ++report.sessions_checked;
        auto problems = session_problems(session);
        if (!problems.empty()) {
            report.failures.push_back({line_no, session.session_id, std::move(problems)});
        }
    }
    return report;
}

std::string corpus_report_text(const CorpusReport& report) {
    std::ostringstream out;
    out << report.sessions_checked << " sessions checked, " << report.failures.size()
        << " failures\n";
    for (const CorpusReport::Failure& failure : report.failures) {
        out << "line " << failure.line;
        if (!failure.session_id.empty()) out << " (session " << failure.session_id << ")";
        out << ":\n";
        for (const std::string& problem : failure.problems) out << "  " << problem << '\n';
    }
    return out.str();
}

namespace {

struct Template {
    std::vector<const char*> question;
    std::vector<const char*> answer;
};

// {T} expands to the topic, {A}/{B} to aspects. Answers are long enough
// that recorded responses dominate the inter-question gaps.
const Template kTemplates[] = {
    {{"could", "you", "tell", "me", "how", "{T}", "first", "came", "about"},
     {"well", "the", "short", "answer", "is", "that", "{T}", "grew", "out", "of", "{A}",
      "and", "a", "lot", "of", "{B}", "over", "many", "years"}},
    {{"what", "is", "the", "most", "surprising", "thing", "about", "{T}"},
     {"most", "people", "are", "surprised", "that", "{T}", "depends", "mainly", "on", "{A}",
      "rather", "than", "{B}", "which", "is", "the", "common", "guess"}},
    {{"why", "do", "people", "say", "that", "{T}", "matters", "so", "much"},
     {"people", "say", "that", "because", "{T}", "quietly", "shapes", "{A}", "and", "without",
      "it", "much", "of", "{B}", "would", "simply", "not", "work"}},
    {{"how", "would", "you", "explain", "{T}", "to", "a", "complete", "beginner"},
     {"i", "would", "start", "with", "{A}", "because", "once", "you", "see", "that", "part",
      "the", "rest", "of", "{T}", "follows", "from", "{B}", "quite", "naturally"}},
    {{"what", "should", "i", "know", "before", "i", "start", "studying", "{T}"},
     {"before", "studying", "{T}", "you", "should", "get", "comfortable", "with", "{A}",
      "and", "expect", "to", "spend", "real", "time", "on", "{B}", "as", "well"}},
};

const char* kTopics[] = {"volcanoes", "honeybees",  "glaciers",  "typography", "jazz",
                         "sailing",   "chess",      "meteors",   "reefs",      "fermentation",
                         "bridges",   "clockwork",  "origami",   "lighthouses", "cartography",
                         "windmills", "fossils",    "ciphers",   "kites",      "orchards"};

const char* kAspects[] = {"patience", "pressure", "timing",      "balance",  "observation",
                          "tradition", "practice", "measurement", "materials", "weather"};

void append_words(std::vector<std::string>& out, const std::vector<const char*>& pattern,
                  const std::string& topic, const std::string& a, const std::string& b) {
    for (const char* word : pattern) {
        std::string w = word;
        if (w == "{T}") w = topic;
        else if (w == "{A}") w = a;
        else if (w == "{B}") w = b;
        out.push_back(std::move(w));
    }
}

Turn make_turn(Speaker speaker, const std::vector<std::string>& words, std::int64_t& clock,
               Rng& rng) {
    Turn turn;
    turn.speaker = speaker;
    for (const std::string& text : words) {
        TimedWord word;
        word.text = text;
        word.start_ms = clock;
        word.end_ms = clock + rng.range(240, 420);
        clock = word.end_ms + rng.range(0, 30);
        turn.words.push_back(std::move(word));
        if (!turn.transcript.empty()) turn.transcript += ' ';
        turn.transcript += text;
    }
    return turn;
}

} // namespace

std::vector<AlignedSession> generate_corpus(const CorpusGenOptions& options) {
    if (options.min_turn_pairs < 1 || options.max_turn_pairs < options.min_turn_pairs) {
        throw ValidationError("generate_corpus: bad turn pair bounds");
    }
    std::vector<AlignedSession> sessions;
    sessions.reserve(options.count);
    for (std::size_t i = 0; i < options.count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "sess-%06zu", i);
        AlignedSession session;
        session.session_id = id;

        Rng rng(session_seed(options.seed, session.session_id, seed_salt::kCorpusGen));
        std::int64_t clock = rng.range(0, 400);
        std::size_t pairs = static_cast<std::size_t>(
            rng.range(static_cast<std::int64_t>(options.min_turn_pairs),
                      static_cast<std::int64_t>(options.max_turn_pairs)));
        for (std::size_t p = 0; p < pairs; ++p) {
            const Template& tpl = kTemplates[rng.below(std::size(kTemplates))];
            std::string topic = kTopics[rng.below(std::size(kTopics))];
            std::size_t ai = rng.below(std::size(kAspects));
            std::size_t bi = rng.below(std::size(kAspects));
            if (bi == ai) bi = (bi + 1) % std::size(kAspects);
            std::string a = kAspects[ai];
            std::string b = kAspects[bi];

            std::vector<std::string> question_words;
            append_words(question_words, tpl.question, topic, a, b);
            session.turns.push_back(make_turn(Speaker::User, question_words, clock, rng));
            clock += rng.range(400, 900);

            std::vector<std::string> answer_words;
            append_words(answer_words, tpl.answer, topic, a, b);
            session.turns.push_back(make_turn(Speaker::System, answer_words, clock, rng));
            clock += rng.range(400, 900);
        }
        sessions.push_back(std::move(session));
    }
    return sessions;
}

} // namespace tandem
