// hd: build draft databases, decode with hierarchy drafting, benchmark and analyze.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hd/bench.hpp"
#include "hd/engine.hpp"
#include "hd/model_db.hpp"
#include "hd/simd.hpp"
#include "hd/stats_db.hpp"
#include "hd/target_model.hpp"
#include "hd/tokenizer.hpp"
#include "hd/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

using hd::Json;

std::vector<fs::path> as_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

hd::DocSplit split_of(bool per_line) { return per_line ? hd::DocSplit::per_line : hd::DocSplit::per_file; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string fingerprint(const std::string& path) {
    // FNV-1a over the file bytes.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : read_text(path)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Loads --vocab if given, otherwise builds one from `fallback` documents and
// writes it to `save_to` (when non-empty).
hd::Vocab resolve_vocab(const std::string& vocab_path, const std::vector<std::string>& fallback_docs,
                        const std::string& save_to) {
    if (!vocab_path.empty()) return hd::Vocab::load(vocab_path);
    if (fallback_docs.empty()) throw std::runtime_error("--vocab is required here");
    auto vocab = hd::Vocab::build(fallback_docs);
    if (!save_to.empty()) {
        vocab.save(save_to);
        std::cerr << "wrote vocabulary (" << vocab.size() << " ids) to " << save_to << "\n";
    }
    return vocab;
}

struct EngineOptions {
    std::string vocab;
    std::string model;
    std::vector<std::string> fit_corpus;
    bool doc_per_line = false;
    int k = 3;
    double alpha = 0.01;
    std::string stats_db;
    std::string model_db;
    std::string order = "cms";
    std::string databases = "c,m,s";
    double temperature = 0.0;
    std::size_t max_tokens = 1024;
    std::uint64_t seed = 7;
    std::size_t N = 7, l = 2, m = 4;
    bool no_recycle = false;
    double call_cost_us = 0.0;

    void add_to(CLI::App* app, bool with_run_knobs) {
        app->add_option("--vocab", vocab, "Vocabulary file (one word per line)");
        app->add_option("--model", model, "Fitted k-gram model (HDKG)");
        app->add_option("--fit-corpus", fit_corpus, "Fit the k-gram model on these files instead of --model");
        app->add_flag("--doc-per-line", doc_per_line, "One document per line in --fit-corpus files");
        app->add_option("--k", k, "k-gram order when fitting")->check(CLI::PositiveNumber);
        app->add_option("--alpha", alpha, "Add-alpha smoothing when fitting");
        app->add_option("--stats-db", stats_db, "Statistics DB (HDSA)");
        app->add_option("--model-db", model_db, "Model DB (HDMD JSON lines)");
        app->add_option("--call-cost-us", call_cost_us, "Busy-wait per model call, microseconds");
        app->add_option("--max-tokens", max_tokens, "Token budget T")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "Base seed");
        app->add_option("--temperature", temperature, "0 = greedy");
        app->add_option("--N", N, "Draft set size");
        app->add_option("--l", l, "Previous tokens used for stats retrieval");
        app->add_option("--m", m, "Draft length");
        if (with_run_knobs) {
            app->add_option("--order", order, "Access order, a permutation of cms");
            app->add_option("--databases", databases, "Enabled DBs, e.g. c,m,s or none");
            app->add_flag("--no-recycle", no_recycle, "Do not feed verification tokens back into the context DB");
        }
    }

    hd::DecodeConfig decode_config() const {
        hd::DecodeConfig c;
        c.max_tokens = max_tokens;
        c.temperature = temperature;
        c.seed = seed;
        c.recycle = !no_recycle;
        c.hierarchy.order = hd::parse_order(order);
        c.hierarchy.enabled = hd::parse_databases(databases);
        c.hierarchy.N = N;
        c.hierarchy.l = l;
        c.hierarchy.m = m;
        c.validate();
        return c;
    }
};

struct LoadedEngine {
    hd::Vocab vocab;
    std::unique_ptr<hd::KGramModel> model;
    std::optional<hd::ModelDB> model_db;
    std::optional<hd::StatsDB> stats_db;
    std::map<std::string, std::string> fingerprints;

    hd::StaticDatabases dbs() const { return {model_db ? &*model_db : nullptr, stats_db ? &*stats_db : nullptr}; }
};

LoadedEngine load_engine(const EngineOptions& o) {
    LoadedEngine e;
    std::vector<std::string> fit_docs;
    if (!o.fit_corpus.empty()) fit_docs = hd::read_documents(as_paths(o.fit_corpus), split_of(o.doc_per_line));
    e.vocab = resolve_vocab(o.vocab, fit_docs, "");
    if (!o.vocab.empty()) e.fingerprints["vocab"] = fingerprint(o.vocab);

    if (!o.model.empty()) {
        e.model = std::make_unique<hd::KGramModel>(hd::KGramModel::load(o.model));
        e.fingerprints["model"] = fingerprint(o.model);
    } else if (!fit_docs.empty()) {
        auto corpus = hd::make_corpus(fit_docs, e.vocab);
        e.model = std::make_unique<hd::KGramModel>(hd::KGramModel::fit(corpus.docs, e.vocab.size(), o.k, o.alpha));
        for (const auto& p : o.fit_corpus) e.fingerprints["fit:" + p] = fingerprint(p);
    } else {
        throw std::runtime_error("either --model or --fit-corpus is required");
    }
    if (e.model->vocab_size() != e.vocab.size()) throw std::runtime_error("model vocabulary size does not match --vocab");
    e.model->set_call_cost(std::chrono::nanoseconds(static_cast<std::int64_t>(o.call_cost_us * 1000.0)));

    if (!o.model_db.empty()) {
        e.model_db = hd::ModelDB::load(o.model_db);
        e.fingerprints["model_db"] = fingerprint(o.model_db);
    }
    if (!o.stats_db.empty()) {
        e.stats_db = hd::StatsDB::load(o.stats_db);
        if (e.stats_db->vocab_size() > e.vocab.size()) throw std::runtime_error("stats db was built with a larger vocabulary");
        e.fingerprints["stats_db"] = fingerprint(o.stats_db);
    }
    return e;
}

std::vector<hd::TokenSeq> load_prompts(const std::string& path, const hd::Vocab& vocab) {
    std::vector<hd::TokenSeq> prompts;
    for (const auto& line : hd::read_documents(std::vector<fs::path>{path}, hd::DocSplit::per_line)) {
        auto p = vocab.tokenize(line);
        if (!p.empty()) prompts.push_back(std::move(p));
    }
    if (prompts.empty()) throw std::runtime_error("no prompts in " + path);
    return prompts;
}

void print_row_summary(const hd::BenchReport& report) {
    for (const auto& r : report.rows) {
        std::fprintf(stderr, "%-16s tok/s %10.1f  speedup %5.2fx  tau %5.3f  alpha %s\n", r.config.name.c_str(),
                     r.tokens_per_sec, r.speedup, r.metrics.tau,
                     r.metrics.alpha ? std::to_string(*r.metrics.alpha).c_str() : "-");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchy drafting for speculative decoding"};
    app.require_subcommand(1);

    // build-vocab
    auto* bv = app.add_subcommand("build-vocab", "Build a vocabulary from text files");
    std::vector<std::string> bv_corpus;
    std::string bv_out;
    bool bv_per_line = false;
    bv->add_option("--corpus", bv_corpus, "Text files")->required();
    bv->add_flag("--doc-per-line", bv_per_line, "One document per line");
    bv->add_option("--out", bv_out, "Output vocab file")->required();

    // fit-model
    auto* fm = app.add_subcommand("fit-model", "Fit and save the k-gram target model");
    std::vector<std::string> fm_corpus;
    std::string fm_vocab, fm_out;
    bool fm_per_line = false;
    int fm_k = 3;
    double fm_alpha = 0.01;
    fm->add_option("--corpus", fm_corpus, "Text files")->required();
    fm->add_flag("--doc-per-line", fm_per_line, "One document per line");
    fm->add_option("--vocab", fm_vocab, "Vocabulary file (built from --corpus if absent)");
    fm->add_option("--k", fm_k, "Order")->check(CLI::PositiveNumber);
    fm->add_option("--alpha", fm_alpha, "Add-alpha smoothing");
    fm->add_option("--out", fm_out, "Output model file")->required();

    // build-model-db
    auto* bm = app.add_subcommand("build-model-db", "Build the model DB from generated texts");
    std::vector<std::string> bm_gen;
    std::string bm_vocab, bm_out;
    bool bm_per_line = false;
    std::size_t bm_topk = 100000, bm_m = 4, bm_n = 7;
    bm->add_option("--generations", bm_gen, "Generated text files")->required();
    bm->add_flag("--doc-per-line", bm_per_line, "One document per line");
    bm->add_option("--vocab", bm_vocab, "Vocabulary file (built from the input if absent)");
    bm->add_option("--top-k", bm_topk, "Global sequence budget");
    bm->add_option("--m", bm_m, "Value length")->check(CLI::PositiveNumber);
    bm->add_option("--N", bm_n, "Values kept per key")->check(CLI::PositiveNumber);
    bm->add_option("--out", bm_out, "Output file")->required();

    // build-stats-db
    auto* bs = app.add_subcommand("build-stats-db", "Build the suffix-array statistics DB");
    std::vector<std::string> bs_corpus;
    std::string bs_vocab, bs_out;
    bool bs_per_line = false, bs_verify = false;
    bs->add_option("--corpus", bs_corpus, "Text files")->required();
    bs->add_flag("--doc-per-line", bs_per_line, "One document per line");
    bs->add_option("--vocab", bs_vocab, "Vocabulary file (built from the input if absent)");
    bs->add_option("--out", bs_out, "Output file")->required();
    bs->add_flag("--verify", bs_verify, "Reload and check suffix order after writing");

    // inspect-stats-db
    auto* is = app.add_subcommand("inspect-stats-db", "Load a statistics DB and print its header");
    std::string is_db;
    bool is_verify = false;
    is->add_option("--db", is_db, "Stats DB file")->required();
    is->add_flag("--verify", is_verify, "Full suffix order check");

    // run
    auto* run = app.add_subcommand("run", "Decode one prompt");
    EngineOptions run_opts;
    run_opts.add_to(run, true);
    std::string run_prompt, run_prompt_file, run_trace;
    bool run_ar = false;
    auto* p_opt = run->add_option("--prompt", run_prompt, "Prompt text");
    auto* pf_opt = run->add_option("--prompt-file", run_prompt_file, "File holding the prompt");
    p_opt->excludes(pf_opt);
    run->add_option("--trace", run_trace, "Write a JSON-lines step trace");
    run->add_flag("--autoregressive", run_ar, "Plain autoregressive decoding");

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmark configs against autoregressive decoding");
    EngineOptions bench_opts;
    bench_opts.add_to(bench, false);
    std::string bench_prompts, bench_configs, bench_out, bench_traces;
    std::size_t bench_runs = 5;
    bench->add_option("--prompts", bench_prompts, "One prompt per line")->required();
    bench->add_option("--configs", bench_configs, "JSON config list")->required();
    bench->add_option("--runs", bench_runs, "Timed repetitions")->check(CLI::PositiveNumber);
    bench->add_option("--out", bench_out, "Report JSON")->required();
    bench->add_option("--trace-dir", bench_traces, "Write per-run traces here");

    // ablate order|dbs
    auto* ablate = app.add_subcommand("ablate", "Access-order or database-subset ablation");
    ablate->require_subcommand(1);
    struct AblateArgs {
        EngineOptions eng;
        std::string prompts, out, traces, coverage_out;
        std::size_t runs = 5;
    };
    AblateArgs ab_order, ab_dbs;
    auto setup_ablate = [](CLI::App* sub, AblateArgs& a) {
        a.eng.add_to(sub, false);
        sub->add_option("--prompts", a.prompts, "One prompt per line")->required();
        sub->add_option("--runs", a.runs, "Timed repetitions")->check(CLI::PositiveNumber);
        sub->add_option("--out", a.out, "Report JSON")->required();
        sub->add_option("--trace-dir", a.traces, "Write per-run traces here");
    };
    auto* ab_o = ablate->add_subcommand("order", "All six access orders");
    setup_ablate(ab_o, ab_order);
    auto* ab_d = ablate->add_subcommand("dbs", "All seven non-empty DB subsets");
    setup_ablate(ab_d, ab_dbs);
    ab_d->add_option("--coverage-out", ab_dbs.coverage_out, "Accepted-token Venn counts of the single-DB runs");

    // analyze locality|coverage
    auto* analyze = app.add_subcommand("analyze", "Offline analyses");
    analyze->require_subcommand(1);
    auto* loc = analyze->add_subcommand("locality", "n-gram temporal locality over generations");
    std::vector<std::string> loc_gen;
    std::string loc_vocab, loc_out, loc_summary;
    std::size_t loc_n = 4;
    bool loc_per_line = false;
    loc->add_option("--generations", loc_gen, "Generated text files")->required();
    loc->add_flag("--doc-per-line", loc_per_line, "One generation per line");
    loc->add_option("--vocab", loc_vocab, "Vocabulary file (built from the input if absent)");
    loc->add_option("--n", loc_n, "n-gram length");
    loc->add_option("--out", loc_out, "Occurrence CSV")->required();
    loc->add_option("--summary-out", loc_summary, "Per n-gram summary CSV (default <out>.summary.csv)");
    auto* cov = analyze->add_subcommand("coverage", "Venn counts of accepted tokens from single-DB traces");
    std::string cov_traces, cov_out;
    cov->add_option("--traces", cov_traces, "Trace directory written by ablate dbs --trace-dir")->required();
    cov->add_option("--out", cov_out, "Output JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (bv->parsed()) {
            auto docs = hd::read_documents(as_paths(bv_corpus), split_of(bv_per_line));
            auto vocab = hd::Vocab::build(docs);
            vocab.save(bv_out);
            std::cerr << "vocabulary: " << vocab.size() << " ids\n";
        } else if (fm->parsed()) {
            auto docs = hd::read_documents(as_paths(fm_corpus), split_of(fm_per_line));
            auto vocab = resolve_vocab(fm_vocab, docs, fm_out + ".vocab");
            auto corpus = hd::make_corpus(docs, std::move(vocab));
            auto model = hd::KGramModel::fit(corpus.docs, corpus.vocab.size(), fm_k, fm_alpha);
            model.save(fm_out);
            std::cerr << "k-gram model: order " << fm_k << ", " << corpus.token_count() << " tokens\n";
        } else if (bm->parsed()) {
            auto docs = hd::read_documents(as_paths(bm_gen), split_of(bm_per_line));
            auto vocab = resolve_vocab(bm_vocab, docs, bm_out + ".vocab");
            auto corpus = hd::make_corpus(docs, std::move(vocab));
            auto db = hd::ModelDB::build(corpus.docs, {bm_topk, bm_m, bm_n});
            db.save(bm_out);
            std::cerr << "model db: " << db.key_count() << " keys, " << db.sequence_count() << " sequences\n";
        } else if (bs->parsed()) {
            auto docs = hd::read_documents(as_paths(bs_corpus), split_of(bs_per_line));
            auto vocab = resolve_vocab(bs_vocab, docs, bs_out + ".vocab");
            auto corpus = hd::make_corpus(docs, std::move(vocab));
            auto db = hd::StatsDB::build(corpus.docs, corpus.vocab.size());
            db.save(bs_out);
            if (bs_verify) (void)hd::StatsDB::load(bs_out, true);
            std::cerr << "stats db: " << db.size() << " tokens, " << db.doc_count() << " docs"
                      << (bs_verify ? ", verified" : "") << "\n";
        } else if (is->parsed()) {
            auto db = hd::StatsDB::load(is_db, is_verify);
            std::cout << "format HDSA v1\ntokens " << db.size() << "\nvocab_size " << db.vocab_size() << "\ndocs " << db.doc_count()
                      << "\nsorted " << (is_verify ? "yes" : "unchecked") << "\n";
        } else if (run->parsed()) {
            if (run_prompt.empty() && run_prompt_file.empty()) throw std::runtime_error("--prompt or --prompt-file is required");
            auto eng = load_engine(run_opts);
            const std::string text = run_prompt_file.empty() ? run_prompt : read_text(run_prompt_file);
            auto prompt = eng.vocab.tokenize(text);
            auto cfg = run_opts.decode_config();
            cfg.trace = !run_trace.empty();
            auto result = run_ar ? hd::autoregressive_decode(*eng.model, prompt, cfg)
                                 : hd::decode(*eng.model, prompt, eng.dbs(), cfg);
            std::cout << eng.vocab.detokenize(result.output) << "\n";
            std::cerr << hd::to_json(result.metrics).dump() << "\n";
            if (result.trace) {
                Json meta;
                meta["method"] = run_ar ? "ar" : "hd";
                meta["order"] = run_opts.order;
                meta["databases"] = hd::databases_name(cfg.hierarchy.enabled);
                hd::write_trace(run_trace, *result.trace, meta);
            }
        } else if (bench->parsed()) {
            auto eng = load_engine(bench_opts);
            hd::BenchInputs in{eng.model.get(), eng.dbs(), load_prompts(bench_prompts, eng.vocab), eng.fingerprints};
            in.fingerprints["prompts"] = fingerprint(bench_prompts);
            auto configs = hd::parse_run_configs(Json::parse(read_text(bench_configs)), bench_opts.decode_config());
            auto report = hd::run_bench(in, std::move(configs), {bench_runs, true, !bench_traces.empty()});
            report.env["seed"] = bench_opts.seed;
            report.env["simd"] = std::string(hd::simd::isa_name(hd::simd::active_isa()));
            write_text(bench_out, hd::to_json(report).dump(2) + "\n");
            if (!bench_traces.empty()) hd::write_traces(report, bench_traces);
            print_row_summary(report);
        } else if (ab_o->parsed() || ab_d->parsed()) {
            const bool order = ab_o->parsed();
            AblateArgs& a = order ? ab_order : ab_dbs;
            auto eng = load_engine(a.eng);
            hd::BenchInputs in{eng.model.get(), eng.dbs(), load_prompts(a.prompts, eng.vocab), eng.fingerprints};
            in.fingerprints["prompts"] = fingerprint(a.prompts);
            const hd::BenchOptions opts{a.runs, true, true};
            auto report = order ? hd::ablate_order(in, a.eng.decode_config(), opts) : hd::ablate_dbs(in, a.eng.decode_config(), opts);
            report.env["seed"] = a.eng.seed;
            report.env["simd"] = std::string(hd::simd::isa_name(hd::simd::active_isa()));
            write_text(a.out, hd::to_json(report).dump(2) + "\n");
            if (!a.traces.empty()) hd::write_traces(report, a.traces);
            if (!order && !a.coverage_out.empty()) {
                auto cov_json = hd::to_json(hd::coverage_report(report.row("dbs:c").traces, report.row("dbs:m").traces,
                                                                report.row("dbs:s").traces));
                write_text(a.coverage_out, cov_json.dump(2) + "\n");
            }
            print_row_summary(report);
        } else if (loc->parsed()) {
            auto docs = hd::read_documents(as_paths(loc_gen), split_of(loc_per_line));
            auto vocab = resolve_vocab(loc_vocab, docs, "");
            auto corpus = hd::make_corpus(docs, std::move(vocab));
            if (corpus.docs.size() < 2) throw std::runtime_error("locality analysis needs at least two generations");
            auto stats = hd::locality_stats(corpus.docs, loc_n);
            write_text(loc_out, hd::occurrences_csv(stats));
            write_text(loc_summary.empty() ? loc_out + ".summary.csv" : loc_summary, hd::summary_csv(stats));
            std::cerr << "occurrences: first " << stats.class_counts[0] << ", within " << stats.class_counts[1]
                      << ", across " << stats.class_counts[2] << "\n";
        } else if (cov->parsed()) {
            std::map<std::string, std::map<std::size_t, hd::DecodeTrace>> by_db;
            for (const auto& entry : fs::directory_iterator(cov_traces)) {
                if (entry.path().extension() != ".jsonl") continue;
                auto tf = hd::read_trace(entry.path().string());
                const auto dbs = tf.meta.value("databases", std::string());
                if (dbs != "c" && dbs != "m" && dbs != "s") continue;
                by_db[dbs][tf.meta.at("prompt_index").get<std::size_t>()] = std::move(tf.trace);
            }
            auto collect = [&](const std::string& k) {
                std::vector<hd::DecodeTrace> v;
                for (auto& [i, t] : by_db[k]) v.push_back(t);
                return v;
            };
            auto c = collect("c"), m = collect("m"), s = collect("s");
            if (c.empty()) throw std::runtime_error("no single-DB traces found in " + cov_traces);
            write_text(cov_out, hd::to_json(hd::coverage_report(c, m, s)).dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
