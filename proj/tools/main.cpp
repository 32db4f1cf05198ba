#include "coderag/engine.hpp"
#include "coderag/errors.hpp"
#include "coderag/eval.hpp"
#include "coderag/prompt.hpp"
#include "coderag/retrieval.hpp"
#include "coderag/server.hpp"
#include "coderag/snapshot.hpp"

#include "../src/json_codec.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace coderag;
using nlohmann::json;

namespace {

// Optional ingest-side configuration file. Any key may be omitted.
void apply_config_file(const std::string& path, BuildConfig& build, EmbedderConfig& embed) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ConfigError("config file must be a JSON object: " + path);

    if (doc.contains("include_extensions")) {
        build.ingest.include_extensions.clear();
        for (const auto& e : doc["include_extensions"])
            build.ingest.include_extensions.insert(e.get<std::string>());
    }
    if (doc.contains("exclude_globs")) {
        build.ingest.exclude_globs.clear();
        for (const auto& g : doc["exclude_globs"])
            build.ingest.exclude_globs.push_back(g.get<std::string>());
    }
    if (doc.contains("max_file_bytes"))
        build.ingest.max_file_bytes = doc["max_file_bytes"].get<std::size_t>();
    if (doc.contains("chunk_policy"))
        build.chunk_policy = chunk_policy_from_json(doc["chunk_policy"]);
    if (doc.contains("bm25")) {
        build.bm25_k1 = doc["bm25"].value("k1", build.bm25_k1);
        build.bm25_b = doc["bm25"].value("b", build.bm25_b);
    }
    if (doc.contains("retrieval")) {
        const auto& r = doc["retrieval"];
        auto& defaults = build.retrieval_defaults;
        defaults.k = r.value("k", defaults.k);
        defaults.candidate_n = r.value("candidate_N", defaults.candidate_n);
        defaults.lambda = r.value("lambda", defaults.lambda);
        defaults.alpha = r.value("alpha", defaults.alpha);
        defaults.lexical_batch_m = r.value("lexical_batch_M", defaults.lexical_batch_m);
        if (r.contains("mode"))
            defaults.mode = retrieval_mode_from_string(r["mode"].get<std::string>());
    }
    if (doc.contains("embed")) {
        const auto& e = doc["embed"];
        embed.model_name = e.value("model_name", embed.model_name);
        embed.dim = e.value("dim", embed.dim);
        embed.batch_size = e.value("batch_size", embed.batch_size);
        embed.timeout_ms = e.value("timeout_ms", embed.timeout_ms);
    }
}

// Flags win over the environment; the environment wins over the manifest.
std::string resolve_endpoint(const std::string& flag_value) {
    if (!flag_value.empty())
        return flag_value;
    if (const char* env = std::getenv("QIBOAGENT_EMBED_ENDPOINT"))
        return env;
    return "";
}

std::unique_ptr<Embedder> embedder_for_query(const Manifest& manifest,
                                             const std::string& endpoint_flag) {
    EmbedderConfig config;
    config.provider = manifest.embed_provider;
    config.model_name = manifest.model_name;
    config.dim = manifest.embed_dim;
    if (config.provider == EmbedProvider::http) {
        config.endpoint_url = resolve_endpoint(endpoint_flag);
        if (config.endpoint_url.empty())
            throw ConfigError("snapshot was built with the http embedder; pass --endpoint or set "
                              "QIBOAGENT_EMBED_ENDPOINT");
    }
    return make_embedder(config);
}

void print_hits_table(const std::vector<ScoredHit>& hits, RetrievalConfig::Mode mode) {
    std::cout << std::left << std::setw(28) << "chunk_id" << std::setw(12) << "score"
              << "path [span]\n";
    for (const auto& hit : hits) {
        double score = mode == RetrievalConfig::Mode::hybrid ? hit.fused : hit.cosine;
        std::cout << std::left << std::setw(28) << hit.chunk_id << std::setw(12)
                  << std::to_string(score).substr(0, 8) << hit.path << " [" << hit.span_begin
                  << "," << hit.span_end << ")\n";
    }
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const SnapshotError*>(&e)) return 3;
    if (dynamic_cast<const ProviderError*>(&e)) return 4;
    if (dynamic_cast<const IngestError*>(&e)) return 5;
    if (dynamic_cast<const EvalError*>(&e)) return 6;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repository retrieval engine: ingest a source tree, query the indexes, "
                 "serve retrieval over JSON-RPC, and evaluate generated-code transcripts"};
    app.require_subcommand(1);

    // --- ingest ---
    auto* ingest = app.add_subcommand("ingest", "Scan a repository and build an index snapshot");
    std::string ingest_repo, ingest_out, ingest_config, ingest_embedder = "test",
                ingest_endpoint, ingest_rev;
    ingest->add_option("repo", ingest_repo, "repository root")->required();
    ingest->add_option("--out", ingest_out, "snapshot output directory")->required();
    ingest->add_option("--config", ingest_config, "JSON config file");
    ingest->add_option("--embedder", ingest_embedder, "embedding provider: http|test")
        ->check(CLI::IsMember({"http", "test"}));
    ingest->add_option("--endpoint", ingest_endpoint, "embedding endpoint url (http provider)");
    ingest->add_option("--repo-rev", ingest_rev, "version identifier stored in the snapshot");

    // --- query ---
    auto* query_cmd = app.add_subcommand("query", "Run one retrieval query against a snapshot");
    std::string query_dir, query_mode = "hybrid", query_text, query_endpoint;
    int query_k = 5;
    bool query_json = false;
    query_cmd->add_option("dir", query_dir, "snapshot directory")->required();
    query_cmd->add_option("--mode", query_mode, "semantic|hybrid")
        ->check(CLI::IsMember({"semantic", "hybrid"}));
    query_cmd->add_option("-k", query_k, "number of hits")->check(CLI::PositiveNumber);
    query_cmd->add_flag("--json", query_json, "emit hits as JSON");
    query_cmd->add_option("--endpoint", query_endpoint, "embedding endpoint url override");
    query_cmd->add_option("question", query_text, "the query text")->required();

    // --- serve ---
    auto* serve_cmd = app.add_subcommand("serve", "Serve retrieval over line-delimited JSON-RPC");
    std::string serve_dir, serve_endpoint, serve_templates;
    bool serve_stdio = false;
    int serve_port = 0;
    serve_cmd->add_option("dir", serve_dir, "snapshot directory")->required();
    serve_cmd->add_flag("--stdio", serve_stdio, "serve on stdin/stdout (default)");
    serve_cmd->add_option("--port", serve_port, "serve on a TCP port");
    serve_cmd->add_option("--endpoint", serve_endpoint, "embedding endpoint url override");
    serve_cmd->add_option("--templates", serve_templates, "prompt template directory");

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate generated-code transcripts");
    std::string eval_dir, eval_dataset, eval_transcripts, eval_report, eval_csv, eval_sandbox;
    eval_cmd->add_option("dir", eval_dir, "snapshot directory (labels the report)")->required();
    eval_cmd->add_option("--dataset", eval_dataset, "benchmark dataset JSON")->required();
    eval_cmd->add_option("--transcripts", eval_transcripts, "transcript directory")->required();
    eval_cmd->add_option("--report", eval_report, "write the JSON report here");
    eval_cmd->add_option("--csv", eval_csv, "write plot-ready CSV rows here");
    eval_cmd->add_option("--sandbox-cmd", eval_sandbox,
                         "command template with {code} producing transcript JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            BuildConfig build;
            EmbedderConfig embed;
            if (!ingest_config.empty())
                apply_config_file(ingest_config, build, embed);
            build.repo_rev = ingest_rev;
            embed.provider =
                ingest_embedder == "http" ? EmbedProvider::http : EmbedProvider::deterministic_test;
            if (embed.provider == EmbedProvider::http) {
                embed.endpoint_url = resolve_endpoint(ingest_endpoint);
                if (embed.endpoint_url.empty())
                    throw ConfigError("--embedder http requires --endpoint or "
                                      "QIBOAGENT_EMBED_ENDPOINT");
            }
            auto embedder = make_embedder(embed);
            BuildReport report;
            Engine engine = build_engine(ingest_repo, build, *embedder, &report);
            save_snapshot(engine, ingest_out);
            for (const auto& w : report.warnings)
                std::cerr << "warning: " << w << '\n';
            std::cout << "ingested " << report.n_docs << " documents into " << report.n_chunks
                      << " chunks -> " << ingest_out << '\n';
            return 0;
        }

        if (*query_cmd) {
            Engine engine = load_snapshot(query_dir);
            auto embedder = embedder_for_query(engine.manifest(), query_endpoint);
            RetrievalConfig cfg = engine.manifest().retrieval_defaults;
            cfg.mode = retrieval_mode_from_string(query_mode);
            cfg.k = static_cast<std::size_t>(query_k);
            if (cfg.mode == RetrievalConfig::Mode::semantic && cfg.candidate_n < cfg.k)
                cfg.candidate_n = cfg.k;
            auto hits = retrieve(query_text, cfg, engine, *embedder);
            if (query_json) {
                json rows = json::array();
                for (const auto& hit : hits)
                    rows.push_back(json::parse(hit_to_json(hit, cfg.mode)));
                std::cout << json{{"hits", rows}}.dump() << '\n';
            } else {
                print_hits_table(hits, cfg.mode);
            }
            return 0;
        }

        if (*serve_cmd) {
            if (serve_stdio && serve_port != 0)
                throw ConfigError("choose one transport: --stdio or --port");
            Engine engine = load_snapshot(serve_dir);
            auto embedder = embedder_for_query(engine.manifest(), serve_endpoint);
            PromptTemplateStore templates;
            if (!serve_templates.empty())
                templates.load_directory(serve_templates);
            RpcServer server(engine, *embedder, templates);
            if (serve_port != 0)
                server.serve_tcp(serve_port);
            else
                server.serve_stream(std::cin, std::cout);
            return 0;
        }

        if (*eval_cmd) {
            Engine engine = load_snapshot(eval_dir);
            auto items = load_dataset(eval_dataset);
            auto run = run_eval(items, eval_transcripts, eval_sandbox);
            std::string report_json = report_to_json(run.report);
            if (eval_report.empty()) {
                std::cout << report_json << '\n';
            } else {
                std::ofstream out(eval_report, std::ios::binary);
                if (!out)
                    throw EvalError("cannot write report file: " + eval_report);
                out << report_json << '\n';
                std::cout << "report written to " << eval_report << '\n';
            }
            if (!eval_csv.empty()) {
                std::ofstream out(eval_csv, std::ios::binary);
                if (!out)
                    throw EvalError("cannot write csv file: " + eval_csv);
                out << report_to_csv(run.report, engine.manifest().model_name,
                                     to_string(engine.manifest().retrieval_defaults.mode));
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}
