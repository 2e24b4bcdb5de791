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

#include "tandem/orchestrator.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tandem/errors.hpp"
#include "tandem/rng.hpp"

namespace tandem {

using nlohmann::json;

std::string_view event_kind_name(EventKind kind) {
    switch (kind) {
    case EventKind::OracleArrived: return "OracleArrived";
    case EventKind::OracleSuperseded: return "OracleSuperseded";
    case EventKind::EmissionStart: return "EmissionStart";
    case EventKind::EmissionEnd: return "EmissionEnd";
    case EventKind::ForcedDelayEnd: return "ForcedDelayEnd";
    }
    throw ValidationError("unknown EventKind");
}

EventKind event_kind_from_name(std::string_view name) {
    for (EventKind kind : {EventKind::OracleArrived, EventKind::OracleSuperseded,
                           EventKind::EmissionStart, EventKind::EmissionEnd,
                           EventKind::ForcedDelayEnd}) {
        if (event_kind_name(kind) == name) return kind;
    }
    throw ValidationError("unknown event kind '" + std::string(name) + "'");
}

OracleQueueState merge_oracle(OracleQueueState state, const OracleMessage& arrival,
                              Tokenizer& tokenizer, std::int64_t now_ms,
                              std::vector<TraceEvent>& events, TokenId boundary_token) {
    events.push_back({now_ms, EventKind::OracleArrived, arrival.seq});

    if (state.latest_arrived_seq) {
        if (arrival.seq == *state.latest_arrived_seq) {
            throw ProtocolError("duplicate oracle seq " + std::to_string(arrival.seq));
        }
        if (arrival.seq < *state.latest_arrived_seq) {
            // Stale out-of-order arrival: a newer candidate already exists,
            // so this one carries strictly less information.
            events.push_back({now_ms, EventKind::OracleSuperseded, arrival.seq});
            return state;
        }
    }

    if (state.active && state.active->remaining() > 0) {
        events.push_back({now_ms, EventKind::OracleSuperseded, state.active->seq});
    }

    OracleQueueState::Active active;
    active.seq = arrival.seq;
    active.tokens.push_back(boundary_token);
    for (TokenId id : tokenizer.tokenize(arrival.text)) active.tokens.push_back(id);
    active.next_index = 0;
    state.active = std::move(active);
    state.latest_arrived_seq = arrival.seq;
    return state;
}

void OracleStreamEmitter::on_arrival(const OracleMessage& message, std::int64_t now_ms,
                                     std::vector<TraceEvent>& events) {
    state_ = merge_oracle(std::move(state_), message, tokenizer_, now_ms, events,
                          cfg_.boundary_token);
}

TokenId OracleStreamEmitter::step(bool eligible, std::int64_t now_ms,
                                  std::vector<TraceEvent>& events) {
    if (!state_.active) return cfg_.pad_token;
    auto& active = *state_.active;

    if (!eligible) {
        // The forced-delay gate interrupted this emission; re-announce the
        // whole message once output is allowed again.
        if (active.begun()) active.next_index = 0;
        return cfg_.pad_token;
    }

    if (!active.begun()) events.push_back({now_ms, EventKind::EmissionStart, active.seq});
    TokenId token = active.tokens[active.next_index++];
    if (active.remaining() == 0) {
        events.push_back({now_ms, EventKind::EmissionEnd, active.seq});
        state_.active.reset();
    }
    return token;
}

StepOutput StubFrontEnd::step(TokenId, TokenId oracle_slot) {
    StepOutput out{filler_, cfg_.silence_token};
    if (oracle_slot == cfg_.boundary_token) {
        pending_.reset(); // a newer message supersedes whatever was queued
        copying_ = true;
    } else if (oracle_slot == cfg_.pad_token) {
        if (pending_) {
            out.monologue = *pending_;
            pending_.reset();
        } else {
            copying_ = false;
        }
    } else {
        if (pending_) out.monologue = *pending_;
        pending_ = oracle_slot;
    }
    if (copying_) out.output_audio = speech_audio_;
    return out;
}

void StubFrontEnd::reset() {
    pending_.reset();
    copying_ = false;
}

namespace {

struct MaskWindow {
    std::int64_t begin_ms = 0;
    std::int64_t end_ms = 0; // half-open
};

std::vector<MaskWindow> forced_delay_windows(const AlignedSession& session,
                                             const TandemConfig& cfg) {
    std::vector<MaskWindow> windows;
    if (cfg.forced_delay_ms <= 0) return windows;
    for (const Turn& turn : session.turns) {
        if (turn.speaker != Speaker::User || turn.words.empty()) continue;
        windows.push_back({turn.start_ms(), turn.end_ms() + cfg.forced_delay_ms});
    }
    return windows;
}

bool masked_at(const std::vector<MaskWindow>& windows, std::int64_t time_ms) {
    for (const MaskWindow& w : windows) {
        if (time_ms >= w.begin_ms && time_ms < w.end_ms) return true;
    }
    return false;
}

std::size_t word_count(const std::string& text) {
    std::istringstream in(text);
    std::string w;
    std::size_t n = 0;
    while (in >> w) ++n;
    return n;
}

} // namespace

SessionTrace run_session(const AlignedSession& session, const TandemConfig& cfg,
                         FrontEndModel& model, const std::vector<OracleMessage>& oracle_source,
                         Tokenizer& tokenizer) {
    validate_config(cfg);
    validate_session(session);
    model.reset();

    std::vector<OracleMessage> arrivals = oracle_source;
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const OracleMessage& a, const OracleMessage& b) {
                         if (a.arrived_at_ms != b.arrived_at_ms) return a.arrived_at_ms < b.arrived_at_ms;
                         return a.seq < b.seq;
                     });
    for (const OracleMessage& m : arrivals) {
        if (m.arrived_at_ms < m.issued_at_ms) {
            throw ValidationError("oracle message arrives before it is issued");
        }
    }

    std::vector<MaskWindow> windows = forced_delay_windows(session, cfg);

    // Span: the recorded session plus enough tail for the longest message
    // to emit fully after the last arrival or delay gate.
    std::size_t longest_message = 0;
    std::int64_t last_activity = session.end_ms();
    for (const OracleMessage& m : arrivals) {
        longest_message = std::max(longest_message, word_count(m.text));
        last_activity = std::max(last_activity, m.arrived_at_ms);
    }
    for (const MaskWindow& w : windows) last_activity = std::max(last_activity, w.end_ms);
    std::int64_t span_end =
        last_activity + static_cast<std::int64_t>(longest_message + 3) * cfg.frame_period_ms;
    std::int64_t frame_count = frame_of(span_end, cfg.frame_period_ms) + 1;

    const std::uint64_t session_hash = fnv1a64(session.session_id);

    SessionTrace trace;
    trace.session_id = session.session_id;
    trace.frame_period_ms = cfg.frame_period_ms;
    trace.frames.reserve(static_cast<std::size_t>(frame_count));

    OracleStreamEmitter emitter(cfg, tokenizer);
    std::size_t next_arrival = 0;
    std::size_t next_window = 0;

    for (std::int64_t f = 0; f < frame_count; ++f) {
        std::int64_t now = f * cfg.frame_period_ms;

        while (next_arrival < arrivals.size() && arrivals[next_arrival].arrived_at_ms <= now) {
            emitter.on_arrival(arrivals[next_arrival], now, trace.events);
            ++next_arrival;
        }
        while (next_window < windows.size() && now >= windows[next_window].end_ms) {
            trace.events.push_back({now, EventKind::ForcedDelayEnd, std::nullopt});
            ++next_window;
        }

        bool masked = masked_at(windows, now);
        TokenId oracle_token = emitter.step(!masked, now, trace.events);

        TokenId input_token = cfg.silence_token;
        for (const Turn& turn : session.turns) {
            if (turn.speaker == Speaker::User && now >= turn.start_ms() && now < turn.end_ms()) {
                input_token = placeholder_audio_token(session_hash, static_cast<std::uint64_t>(f),
                                                      seed_salt::kCorpusGen);
                break;
            }
        }

        StepOutput out;
        try {
            out = model.step(input_token, oracle_token);
        } catch (const std::exception& e) {
            trace.abort_reason = e.what();
            break;
        }
        if (masked) {
            out.monologue = cfg.pad_token;
            out.output_audio = cfg.silence_token;
        }

        FrameRecord frame;
        frame.frame_index = static_cast<std::uint64_t>(f);
        frame.wall_time_ms = now;
        frame.slot(StreamKind::InputAudio) = input_token;
        frame.slot(StreamKind::OutputAudio) = out.output_audio;
        frame.slot(StreamKind::InnerMonologue) = out.monologue;
        frame.slot(StreamKind::Oracle) = oracle_token;
        trace.frames.push_back(frame);
    }
    return trace;
}

std::vector<TimedText> apply_jitter(const std::vector<TimedText>& schedule,
                                    std::int64_t jitter_max_ms, std::uint64_t rng_seed) {
    if (jitter_max_ms < 0) throw ValidationError("apply_jitter: negative jitter_max_ms");
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (schedule[i].emit_time_ms <= schedule[i - 1].emit_time_ms) {
            throw ValidationError("apply_jitter: schedule times must be increasing");
        }
    }
    Rng rng(mix64(rng_seed ^ seed_salt::kScheduleJitter));
    std::vector<TimedText> out = schedule;
    for (TimedText& entry : out) {
        if (jitter_max_ms > 0) entry.emit_time_ms += rng.range(0, jitter_max_ms);
    }
    std::stable_sort(out.begin(), out.end(), [](const TimedText& a, const TimedText& b) {
        return a.emit_time_ms < b.emit_time_ms;
    });
    return out;
}

namespace {

json frame_to_json(const FrameRecord& frame) {
    json slots;
    for (StreamKind kind : kAllStreams) {
        slots[std::string(stream_kind_name(kind))] = frame.slot(kind);
    }
    return {{"frame_index", frame.frame_index},
            {"wall_time_ms", frame.wall_time_ms},
            {"slots", std::move(slots)}};
}

FrameRecord frame_from_json(const json& j) {
    FrameRecord frame;
    frame.frame_index = j.at("frame_index").get<std::uint64_t>();
    frame.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
    const json& slots = j.at("slots");
    for (StreamKind kind : kAllStreams) {
        frame.slot(kind) = slots.at(std::string(stream_kind_name(kind))).get<TokenId>();
    }
    return frame;
}

json events_to_json(const SessionTrace& trace) {
    json events = json::array();
    for (const TraceEvent& event : trace.events) {
        json je = {{"time_ms", event.time_ms}, {"kind", event_kind_name(event.kind)}};
        if (event.seq) je["seq"] = *event.seq;
        events.push_back(std::move(je));
    }
    json j = {{"events", std::move(events)}};
    if (trace.abort_reason) j["abort_reason"] = *trace.abort_reason;
    return j;
}

constexpr char kTraceMagic[8] = {'T', 'N', 'D', 'T', 'R', 'C', '0', '1'};

} // namespace

void write_traces_jsonl(const std::vector<SessionTrace>& traces, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write trace file '" + path + "'");
    for (const SessionTrace& trace : traces) {
        json header = {{"session_id", trace.session_id},
                       {"frame_period_ms", trace.frame_period_ms},
                       {"frame_count", trace.frames.size()}};
        out << header.dump() << '\n';
        for (const FrameRecord& frame : trace.frames) out << frame_to_json(frame).dump() << '\n';
        out << events_to_json(trace).dump() << '\n';
    }
}

std::vector<SessionTrace> read_traces_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open trace file '" + path + "'");
    std::vector<SessionTrace> traces;
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](std::string& into) {
        if (!std::getline(in, into)) return false;
        ++line_no;
        return true;
    };
    while (next_line(line)) {
        if (line.empty()) continue;
        try {
            json header = json::parse(line);
            SessionTrace trace;
            trace.session_id = header.at("session_id").get<std::string>();
            trace.frame_period_ms = header.at("frame_period_ms").get<std::int64_t>();
            std::size_t frame_count = header.at("frame_count").get<std::size_t>();
            for (std::size_t i = 0; i < frame_count; ++i) {
                if (!next_line(line)) throw ValidationError("truncated trace");
                trace.frames.push_back(frame_from_json(json::parse(line)));
            }
            if (!next_line(line)) throw ValidationError("missing events line");
            json tail = json::parse(line);
            for (const json& je : tail.at("events")) {
                TraceEvent event;
                event.time_ms = je.at("time_ms").get<std::int64_t>();
                event.kind = event_kind_from_name(je.at("kind").get<std::string>());
                if (je.contains("seq")) event.seq = je["seq"].get<std::uint64_t>();
                trace.events.push_back(event);
            }
            if (tail.contains("abort_reason")) {
                trace.abort_reason = tail["abort_reason"].get<std::string>();
            }
            traces.push_back(std::move(trace));
        } catch (const json::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return traces;
}

void write_traces_binary(const std::vector<SessionTrace>& traces, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write trace file '" + path + "'");
    out.write(kTraceMagic, sizeof kTraceMagic);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    auto put_u64 = [&](std::uint64_t v) {
        put_u32(static_cast<std::uint32_t>(v));
        put_u32(static_cast<std::uint32_t>(v >> 32));
    };
    put_u64(traces.size());
    for (const SessionTrace& trace : traces) {
        put_u32(static_cast<std::uint32_t>(trace.session_id.size()));
        out.write(trace.session_id.data(), static_cast<std::streamsize>(trace.session_id.size()));
        put_u32(static_cast<std::uint32_t>(trace.frame_period_ms));
        put_u64(trace.frames.size());
        for (const FrameRecord& frame : trace.frames) {
            for (StreamKind kind : kAllStreams) put_u32(frame.slot(kind));
        }
    }
}

std::vector<SessionTrace> read_traces_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open trace file '" + path + "'");
    char magic[8];
    in.read(magic, sizeof magic);
    if (in.gcount() != sizeof magic || std::memcmp(magic, kTraceMagic, sizeof magic) != 0) {
        throw ValidationError("'" + path + "' is not a binary trace file");
    }
    auto get_u32 = [&]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (in.gcount() != 4) throw ValidationError("truncated binary trace");
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    auto get_u64 = [&]() {
        std::uint64_t lo = get_u32();
        std::uint64_t hi = get_u32();
        return lo | (hi << 32);
    };
    std::vector<SessionTrace> traces;
    std::uint64_t count = get_u64();
    for (std::uint64_t s = 0; s < count; ++s) {
        SessionTrace trace;
        std::uint32_t id_len = get_u32();
        trace.session_id.resize(id_len);
        in.read(trace.session_id.data(), id_len);
        if (in.gcount() != id_len) throw ValidationError("truncated binary trace");
        trace.frame_period_ms = get_u32();
        std::uint64_t frames = get_u64();
        for (std::uint64_t f = 0; f < frames; ++f) {
            FrameRecord frame;
            frame.frame_index = f;
            frame.wall_time_ms = static_cast<std::int64_t>(f) * trace.frame_period_ms;
            for (StreamKind kind : kAllStreams) frame.slot(kind) = get_u32();
            trace.frames.push_back(frame);
        }
        traces.push_back(std::move(trace));
    }
    return traces;
}

std::vector<SessionTrace> read_traces(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open trace file '" + path + "'");
    char magic[8] = {};
    in.read(magic, sizeof magic);
    in.close();
    if (std::memcmp(magic, kTraceMagic, sizeof magic) == 0) return read_traces_binary(path);
    return read_traces_jsonl(path);
}

} // namespace tandem
