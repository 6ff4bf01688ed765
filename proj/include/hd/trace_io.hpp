#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hd/engine.hpp"

namespace hd {

using Json = nlohmann::ordered_json;

// Wall-clock fields are dropped when include_timing is false, which makes the
// output a deterministic function of seed and config.
struct JsonOptions {
    bool include_timing = true;
};

Json to_json(const StepRecord& step, JsonOptions opts = {});
StepRecord step_from_json(const Json& j);

Json to_json(const DecodeMetrics& metrics, JsonOptions opts = {});

// Trace file: a header object ({"type":"header", "prompt":[...], "wall_ns", plus
// caller metadata}) followed by one {"type":"step", ...} object per line.
std::string trace_to_jsonl(const DecodeTrace& trace, const Json& meta = Json::object(), JsonOptions opts = {});

struct TraceFile {
    DecodeTrace trace;
    Json meta;  // header fields other than type/prompt/wall_ns
};
TraceFile trace_from_jsonl(const std::string& text);

void write_trace(const std::string& path, const DecodeTrace& trace, const Json& meta = Json::object(),
                 JsonOptions opts = {});
TraceFile read_trace(const std::string& path);

}  // namespace hd
