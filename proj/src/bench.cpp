#include "hd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hd {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string temperature_tag(double t) {
    std::ostringstream ss;
    ss << t;
    return ss.str();
}

struct RunOutcome {
    std::vector<DecodeTrace> traces;
    std::vector<TokenSeq> outputs;
    std::uint64_t tokens = 0;
    std::int64_t wall_ns = 0;
};

RunOutcome run_once(const BenchInputs& in, const RunConfig& rc) {
    RunOutcome out;
    DecodeConfig cfg = rc.decode;
    cfg.trace = true;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < in.prompts.size(); ++i) {
        DecodeConfig per = cfg;
        per.seed = cfg.seed + i;
        DecodeResult r;
        if (rc.autoregressive) {
            r = autoregressive_decode(*in.model, in.prompts[i], per);
        } else {
            DecodeSession s(*in.model, in.dbs, per);
            r = s.decode(in.prompts[i]);
        }
        out.tokens += r.metrics.tokens_generated;
        out.outputs.push_back(std::move(r.output));
        out.traces.push_back(std::move(*r.trace));
    }
    out.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

void check_inputs(const BenchInputs& in, const std::vector<RunConfig>& configs) {
    if (in.model == nullptr) throw std::invalid_argument("bench needs a target model");
    if (in.prompts.empty()) throw std::invalid_argument("bench needs at least one prompt");
    for (const auto& rc : configs) {
        rc.decode.validate();
        if (rc.autoregressive) continue;
        const auto& h = rc.decode.hierarchy;
        if (h.is_enabled(DbKind::model) && in.dbs.model == nullptr) {
            throw std::invalid_argument("config '" + rc.name + "' enables the model db but no model-db file was given");
        }
        if (h.is_enabled(DbKind::stats) && in.dbs.stats == nullptr) {
            throw std::invalid_argument("config '" + rc.name + "' enables the stats db but no stats-db file was given");
        }
    }
}

Json config_json(const RunConfig& rc) {
    Json j;
    j["name"] = rc.name;
    j["method"] = rc.autoregressive ? "ar" : "hd";
    const auto& d = rc.decode;
    if (!rc.autoregressive) {
        j["order"] = order_name(d.hierarchy.order);
        j["databases"] = databases_name(d.hierarchy.enabled);
        j["N"] = d.hierarchy.N;
        j["l"] = d.hierarchy.l;
        j["m"] = d.hierarchy.m;
        j["recycle"] = d.recycle;
    }
    j["temperature"] = d.temperature;
    j["max_tokens"] = d.max_tokens;
    j["seed"] = d.seed;
    return j;
}

RunConfig hd_config(std::string name, const DecodeConfig& base) {
    RunConfig rc;
    rc.name = std::move(name);
    rc.decode = base;
    return rc;
}

}  // namespace

std::vector<RunConfig> parse_run_configs(const Json& j, const DecodeConfig& base) {
    const Json& list = j.is_object() ? j.at("configs") : j;
    if (!list.is_array()) throw std::invalid_argument("configs must be a JSON array");
    std::vector<RunConfig> out;
    for (const auto& c : list) {
        RunConfig rc;
        rc.decode = base;
        rc.name = c.value("name", "hd");
        rc.autoregressive = c.value("method", std::string("hd")) == "ar";
        auto& d = rc.decode;
        auto& h = d.hierarchy;
        if (c.contains("order")) h.order = parse_order(c.at("order").get<std::string>());
        if (c.contains("databases")) h.enabled = parse_databases(c.at("databases").get<std::string>());
        h.N = c.value("N", h.N);
        h.l = c.value("l", h.l);
        h.m = c.value("m", h.m);
        d.temperature = c.value("temperature", d.temperature);
        d.max_tokens = c.value("max_tokens", d.max_tokens);
        d.recycle = c.value("recycle", d.recycle);
        d.seed = c.value("seed", d.seed);
        d.validate();
        out.push_back(std::move(rc));
    }
    return out;
}

const BenchRow& BenchReport::row(const std::string& name) const {
    for (const auto& r : rows) {
        if (r.config.name == name) return r;
    }
    throw std::out_of_range("no bench row named " + name);
}

BenchReport run_bench(const BenchInputs& inputs, std::vector<RunConfig> configs, const BenchOptions& options) {
    if (options.runs < 1) throw std::invalid_argument("runs must be >= 1");
    check_inputs(inputs, configs);

    // AR baselines first, one per temperature in use.
    std::vector<RunConfig> all;
    std::set<double> temps;
    for (const auto& rc : configs) temps.insert(rc.decode.temperature);
    if (temps.empty()) temps.insert(0.0);
    std::map<double, std::string> ar_name;
    for (double t : temps) {
        auto existing = std::find_if(configs.begin(), configs.end(),
                                     [&](const RunConfig& rc) { return rc.autoregressive && rc.decode.temperature == t; });
        if (existing != configs.end()) {
            ar_name[t] = existing->name;
            continue;
        }
        RunConfig ar;
        ar.autoregressive = true;
        ar.name = t == 0.0 ? "ar" : "ar@T=" + temperature_tag(t);
        ar.decode = configs.empty() ? DecodeConfig{} : configs.front().decode;
        ar.decode.temperature = t;
        ar_name[t] = ar.name;
        all.push_back(std::move(ar));
    }
    for (auto& rc : configs) all.push_back(std::move(rc));

    BenchReport report;
    for (const auto& rc : all) {
        BenchRow row;
        row.config = rc;
        if (options.warmup) (void)run_once(inputs, rc);
        for (std::size_t k = 0; k < options.runs; ++k) {
            RunOutcome run = run_once(inputs, rc);
            const double secs = static_cast<double>(std::max<std::int64_t>(run.wall_ns, 1)) * 1e-9;
            row.tokens_per_sec_runs.push_back(static_cast<double>(run.tokens) / secs);
            if (k == 0) {
                row.metrics = aggregate_metrics(run.traces);
                row.traces = std::move(run.traces);
                row.outputs = std::move(run.outputs);
            }
        }
        row.tokens_per_sec = median(row.tokens_per_sec_runs);
        double mean = 0.0;
        for (double v : row.tokens_per_sec_runs) mean += v;
        mean /= static_cast<double>(row.tokens_per_sec_runs.size());
        double var = 0.0;
        for (double v : row.tokens_per_sec_runs) var += (v - mean) * (v - mean);
        row.tokens_per_sec_mean = mean;
        row.tokens_per_sec_stddev = std::sqrt(var / static_cast<double>(row.tokens_per_sec_runs.size()));
        report.rows.push_back(std::move(row));
    }

    for (auto& row : report.rows) {
        const auto& base = report.row(ar_name.at(row.config.decode.temperature));
        row.speedup = row.config.autoregressive && row.config.name == base.config.name
                          ? 1.0
                          : row.tokens_per_sec / base.tokens_per_sec;
        if (!options.keep_traces) row.traces.clear();
    }

    Json env;
    env["runs"] = options.runs;
    env["warmup"] = options.warmup;
    env["timing"] = "median of runs, steady clock";
    env["prompts"] = inputs.prompts.size();
    env["fingerprints"] = Json::object();
    for (const auto& [k, v] : inputs.fingerprints) env["fingerprints"][k] = v;
    env["configs"] = Json::array();
    for (const auto& row : report.rows) env["configs"].push_back(config_json(row.config));
    report.env = std::move(env);
    return report;
}

BenchReport ablate_order(const BenchInputs& inputs, const DecodeConfig& base, const BenchOptions& options) {
    std::vector<RunConfig> configs;
    std::string perm = "cms";
    std::sort(perm.begin(), perm.end());
    do {
        RunConfig rc = hd_config("order:" + perm, base);
        rc.decode.hierarchy.order = parse_order(perm);
        rc.decode.hierarchy.enabled = {true, true, true};
        configs.push_back(std::move(rc));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return run_bench(inputs, std::move(configs), options);
}

BenchReport ablate_dbs(const BenchInputs& inputs, const DecodeConfig& base, const BenchOptions& options) {
    std::vector<RunConfig> configs;
    for (unsigned mask = 1; mask < 8; ++mask) {
        std::array<bool, kNumDbs> enabled{(mask & 1u) != 0, (mask & 2u) != 0, (mask & 4u) != 0};
        RunConfig rc = hd_config("dbs:" + databases_name(enabled), base);
        rc.decode.hierarchy.enabled = enabled;
        configs.push_back(std::move(rc));
    }
    return run_bench(inputs, std::move(configs), options);
}

Json to_json(const BenchReport& report, JsonOptions opts) {
    Json j;
    j["env"] = report.env;
    j["rows"] = Json::array();
    for (const auto& row : report.rows) {
        Json r;
        r["name"] = row.config.name;
        r["method"] = row.config.autoregressive ? "ar" : "hd";
        if (opts.include_timing) {
            r["tokens_per_sec"] = row.tokens_per_sec;
            r["tokens_per_sec_mean"] = row.tokens_per_sec_mean;
            r["tokens_per_sec_stddev"] = row.tokens_per_sec_stddev;
            r["tokens_per_sec_runs"] = row.tokens_per_sec_runs;
            r["speedup"] = row.speedup;
        }
        const Json m = to_json(row.metrics, opts);
        for (auto it = m.begin(); it != m.end(); ++it) r[it.key()] = it.value();
        j["rows"].push_back(std::move(r));
    }
    return j;
}

void write_traces(const BenchReport& report, const std::string& dir, JsonOptions opts) {
    std::filesystem::create_directories(dir);
    for (const auto& row : report.rows) {
        std::string stem = row.config.name;
        std::replace(stem.begin(), stem.end(), ':', '_');
        std::replace(stem.begin(), stem.end(), ',', '-');
        std::replace(stem.begin(), stem.end(), '@', '_');
        std::replace(stem.begin(), stem.end(), '=', '_');
        for (std::size_t i = 0; i < row.traces.size(); ++i) {
            Json meta = config_json(row.config);
            meta["prompt_index"] = i;
            write_trace((std::filesystem::path(dir) / (stem + "__p" + std::to_string(i) + ".jsonl")).string(), row.traces[i],
                        meta, opts);
        }
    }
}

// ---------------------------------------------------------------------------

std::vector<AcceptedEvent> accepted_events(std::span<const DecodeTrace> traces) {
    std::vector<AcceptedEvent> events;
    for (std::size_t p = 0; p < traces.size(); ++p) {
        std::size_t pos = 0;
        for (const auto& s : traces[p].steps) {
            const std::size_t take = std::min(s.outcome.winner_accepted(), s.kept);
            for (std::size_t i = 0; i < take; ++i) events.push_back(AcceptedEvent{p, pos + i, s.outcome.emitted[i]});
            pos += s.kept;
        }
    }
    return events;
}

CoverageReport coverage_report(std::span<const DecodeTrace> c_runs, std::span<const DecodeTrace> m_runs,
                               std::span<const DecodeTrace> s_runs) {
    if (c_runs.size() != m_runs.size() || c_runs.size() != s_runs.size()) {
        throw std::invalid_argument("coverage traces cover different prompt counts");
    }
    for (std::size_t i = 0; i < c_runs.size(); ++i) {
        if (c_runs[i].prompt != m_runs[i].prompt || c_runs[i].prompt != s_runs[i].prompt) {
            throw std::invalid_argument("coverage traces have mismatched prompts");
        }
    }
    std::map<AcceptedEvent, unsigned> membership;
    const std::span<const DecodeTrace> runs[] = {c_runs, m_runs, s_runs};
    for (unsigned d = 0; d < 3; ++d) {
        for (const auto& e : accepted_events(runs[d])) membership[e] |= 1u << d;
    }
    CoverageReport r;
    for (const auto& [e, mask] : membership) {
        switch (mask) {
            case 1: ++r.c_only; break;
            case 2: ++r.m_only; break;
            case 4: ++r.s_only; break;
            case 3: ++r.cm; break;
            case 5: ++r.cs; break;
            case 6: ++r.ms; break;
            case 7: ++r.cms; break;
            default: break;
        }
    }
    r.union_size = membership.size();
    return r;
}

Json to_json(const CoverageReport& r) {
    Json j;
    j["c_only"] = r.c_only;
    j["m_only"] = r.m_only;
    j["s_only"] = r.s_only;
    j["c_and_m"] = r.cm;
    j["c_and_s"] = r.cs;
    j["m_and_s"] = r.ms;
    j["c_m_and_s"] = r.cms;
    j["union"] = r.union_size;
    return j;
}

// ---------------------------------------------------------------------------

namespace {
struct GramHash {
    std::size_t operator()(const TokenSeq& s) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (TokenId t : s) {
            h ^= t;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};
}  // namespace

LocalityStats locality_stats(std::span<const TokenSeq> docs, std::size_t n) {
    if (n < 1) throw std::invalid_argument("n-gram length must be >= 1");
    LocalityStats stats;
    struct Seen {
        std::size_t id;
        std::size_t last_doc;
    };
    std::unordered_map<TokenSeq, Seen, GramHash> seen;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto& doc = docs[d];
        for (std::size_t i = 0; i + n <= doc.size(); ++i) {
            TokenSeq gram(doc.begin() + static_cast<std::ptrdiff_t>(i), doc.begin() + static_cast<std::ptrdiff_t>(i + n));
            auto it = seen.find(gram);
            LocalityClass cls;
            std::size_t id;
            if (it == seen.end()) {
                id = stats.summary.size();
                stats.summary.push_back(NgramSummary{id, gram});
                seen.emplace(std::move(gram), Seen{id, d});
                cls = LocalityClass::first;
                stats.summary[id].docs = 1;
            } else {
                id = it->second.id;
                cls = it->second.last_doc == d ? LocalityClass::within : LocalityClass::across;
                if (it->second.last_doc != d) ++stats.summary[id].docs;
                it->second.last_doc = d;
            }
            auto& sum = stats.summary[id];
            ++sum.occurrences;
            if (cls == LocalityClass::within) ++sum.within;
            if (cls == LocalityClass::across) ++sum.across;
            ++stats.class_counts[static_cast<std::size_t>(cls)];
            stats.occurrences.push_back(NgramOccurrence{id, d, i, cls});
        }
    }
    return stats;
}

std::string_view locality_class_name(LocalityClass cls) {
    switch (cls) {
        case LocalityClass::first: return "first";
        case LocalityClass::within: return "within";
        case LocalityClass::across: return "across";
    }
    return "?";
}

std::string occurrences_csv(const LocalityStats& stats) {
    std::string out = "ngram_id,doc_index,position,class\n";
    for (const auto& o : stats.occurrences) {
        out += std::to_string(o.ngram_id) + ',' + std::to_string(o.doc) + ',' + std::to_string(o.position) + ',';
        out += locality_class_name(o.cls);
        out += '\n';
    }
    return out;
}

std::string summary_csv(const LocalityStats& stats) {
    std::string out = "ngram_id,tokens,occurrences,docs,within,across\n";
    for (const auto& s : stats.summary) {
        out += std::to_string(s.ngram_id) + ',';
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(s.tokens[i]);
        }
        out += ',' + std::to_string(s.occurrences) + ',' + std::to_string(s.docs) + ',' + std::to_string(s.within) + ',' +
               std::to_string(s.across) + '\n';
    }
    return out;
}

}  // namespace hd
