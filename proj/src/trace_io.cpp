#include "hd/trace_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hd {

namespace {

const char* db_key(int d) {
    static const char* names[] = {"c", "m", "s"};
    return names[d];
}

DbKind kind_from_key(const std::string& s) {
    if (s == "c") return DbKind::context;
    if (s == "m") return DbKind::model;
    if (s == "s") return DbKind::stats;
    throw std::runtime_error("bad database tag in trace: " + s);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const StepRecord& step, JsonOptions opts) {
    Json j;
    j["type"] = "step";
    j["context_tail"] = step.context_tail;
    Json access = Json::object();
    for (int d = 0; d < kNumDbs; ++d) {
        const auto& a = step.access.db[static_cast<std::size_t>(d)];
        Json ja;
        ja["attempted"] = a.attempted;
        ja["set_size_before"] = a.set_size_before;
        ja["returned"] = a.returned_count;
        ja["admitted"] = a.admitted_count;
        if (opts.include_timing) ja["ns"] = a.elapsed_ns;
        access[db_key(d)] = std::move(ja);
    }
    j["access"] = std::move(access);
    if (opts.include_timing) j["draft_ns"] = step.access.total_ns;
    Json cands = Json::array();
    const auto& o = step.outcome;
    for (std::size_t i = 0; i < o.accepted_len.size(); ++i) {
        Json c;
        c["source"] = db_key(db_index(o.sources[i]));
        c["len"] = o.candidate_len[i];
        c["accepted"] = o.accepted_len[i];
        cands.push_back(std::move(c));
    }
    j["candidates"] = std::move(cands);
    j["winner"] = o.winner ? Json(*o.winner) : Json(nullptr);
    j["emitted"] = o.emitted;
    j["kept"] = step.kept;
    j["recycled"] = o.recycled;
    j["drafted_total"] = o.drafted_total;
    if (opts.include_timing) j["verify_ns"] = o.verify_ns;
    j["context_db_size"] = step.context_db_size;
    return j;
}

StepRecord step_from_json(const Json& j) {
    StepRecord s;
    s.context_tail = j.at("context_tail").get<TokenSeq>();
    const auto& access = j.at("access");
    for (int d = 0; d < kNumDbs; ++d) {
        const auto& ja = access.at(db_key(d));
        auto& a = s.access.db[static_cast<std::size_t>(d)];
        a.attempted = ja.at("attempted").get<bool>();
        a.set_size_before = ja.at("set_size_before").get<std::size_t>();
        a.returned_count = ja.at("returned").get<std::size_t>();
        a.admitted_count = ja.at("admitted").get<std::size_t>();
        a.elapsed_ns = ja.value("ns", std::int64_t{0});
    }
    s.access.total_ns = j.value("draft_ns", std::int64_t{0});
    auto& o = s.outcome;
    for (const auto& c : j.at("candidates")) {
        o.sources.push_back(kind_from_key(c.at("source").get<std::string>()));
        o.candidate_len.push_back(c.at("len").get<std::size_t>());
        o.accepted_len.push_back(c.at("accepted").get<std::size_t>());
    }
    if (!j.at("winner").is_null()) o.winner = j.at("winner").get<std::size_t>();
    o.emitted = j.at("emitted").get<TokenSeq>();
    s.kept = j.at("kept").get<std::size_t>();
    o.recycled = j.at("recycled").get<TokenSeq>();
    o.drafted_total = j.at("drafted_total").get<std::size_t>();
    o.verify_ns = j.value("verify_ns", std::int64_t{0});
    s.context_db_size = j.at("context_db_size").get<std::size_t>();
    return s;
}

Json to_json(const DecodeMetrics& m, JsonOptions opts) {
    Json j;
    j["steps"] = m.steps;
    j["tokens_generated"] = m.tokens_generated;
    j["alpha"] = optional_number(m.alpha);
    j["alpha_all"] = optional_number(m.alpha_all);
    j["tau"] = m.tau;
    j["accepted_tokens"] = m.accepted_tokens;
    j["winner_drafted_tokens"] = m.winner_drafted_tokens;
    Json probes = Json::object();
    for (int d = 0; d < kNumDbs; ++d) probes[db_key(d)] = m.per_db[static_cast<std::size_t>(d)].probes;
    j["probes"] = std::move(probes);
    if (opts.include_timing) {
        Json lat;
        lat["mean"] = m.draft_latency.mean_ns;
        lat["stddev"] = m.draft_latency.stddev_ns;
        Json per = Json::object();
        for (int d = 0; d < kNumDbs; ++d) per[db_key(d)] = m.per_db[static_cast<std::size_t>(d)].mean_ns;
        lat["per_db"] = std::move(per);
        j["draft_latency_ns"] = std::move(lat);
        j["verify_latency_ns"] = m.verify_mean_ns;
        j["wall_ns"] = m.wall_ns;
    }
    Json tallies = Json::object();
    for (int d = 0; d < kNumDbs; ++d) {
        const auto& t = m.tallies[static_cast<std::size_t>(d)];
        tallies[db_key(d)] = {{"draft_failure", t.draft_failure}, {"draft_success", t.draft_success},
                              {"verify_success", t.verify_success}};
    }
    j["tallies"] = std::move(tallies);
    return j;
}

std::string trace_to_jsonl(const DecodeTrace& trace, const Json& meta, JsonOptions opts) {
    Json header;
    header["type"] = "header";
    for (auto it = meta.begin(); it != meta.end(); ++it) header[it.key()] = it.value();
    header["prompt"] = trace.prompt;
    if (opts.include_timing) header["wall_ns"] = trace.wall_ns;
    std::string out = header.dump();
    out += '\n';
    for (const auto& s : trace.steps) {
        out += to_json(s, opts).dump();
        out += '\n';
    }
    return out;
}

TraceFile trace_from_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    TraceFile file;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = Json::parse(line);
        const auto type = j.at("type").get<std::string>();
        if (type == "header") {
            if (have_header) throw std::runtime_error("trace has two headers");
            have_header = true;
            file.trace.prompt = j.at("prompt").get<TokenSeq>();
            file.trace.wall_ns = j.value("wall_ns", std::int64_t{0});
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (it.key() != "type" && it.key() != "prompt" && it.key() != "wall_ns") file.meta[it.key()] = it.value();
            }
        } else if (type == "step") {
            if (!have_header) throw std::runtime_error("trace step before header");
            file.trace.steps.push_back(step_from_json(j));
        } else {
            throw std::runtime_error("unknown trace record type: " + type);
        }
    }
    if (!have_header) throw std::runtime_error("trace has no header");
    if (file.meta.is_null()) file.meta = Json::object();
    return file;
}

void write_trace(const std::string& path, const DecodeTrace& trace, const Json& meta, JsonOptions opts) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << trace_to_jsonl(trace, meta, opts);
    if (!out) throw std::runtime_error("write failed: " + path);
}

TraceFile read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return trace_from_jsonl(ss.str());
}

}  // namespace hd
