#include <chrono>
#include <cstdio>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "tenq/backend.hpp"
#include "tenq/batch.hpp"
#include "tenq/classifiers.hpp"
#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/ingest.hpp"
#include "tenq/metrics.hpp"
#include "tenq/pipeline.hpp"
#include "tenq/server.hpp"
#include "tenq/store.hpp"
#include "tenq/synthetic.hpp"

namespace fs = std::filesystem;
using namespace tenq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAllFailed = 2;

server::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

const char* error_name(const Error& e) {
#define TENQ_NAME(T) \
    if (dynamic_cast<const T*>(&e)) return #T;
    TENQ_NAME(ConfigError)
    TENQ_NAME(DegenerateData)
    TENQ_NAME(TooFewExamples)
    TENQ_NAME(ModelFormatError)
    TENQ_NAME(BackendUnavailable)
    TENQ_NAME(ProtocolError)
    TENQ_NAME(PortInUse)
    TENQ_NAME(NotFound)
    TENQ_NAME(IoError)
    TENQ_NAME(InvalidAccession)
    TENQ_NAME(NetworkError)
#undef TENQ_NAME
    return "Error";
}

void print_json(const nlohmann::json& j, const std::string& out_file) {
    const std::string text = j.dump(2) + "\n";
    if (out_file.empty() || out_file == "-") {
        std::cout << text;
    } else {
        write_file_atomic(out_file, text);
    }
}

nlohmann::json metrics_block(const classifiers::Model& m, const std::vector<classifiers::LabeledExample>& set) {
    return eval::metrics_to_json(classifiers::evaluate(m, set));
}

struct ItemizeArgs {
    std::string input, cache_dir, out_dir, fallback = "off", kind = "logistic", model, backend_cmd;
    long long budget_ms = 5000;
    unsigned workers = 1;
    std::uint64_t seed = 1;
};

batch::RunConfig to_config(const ItemizeArgs& a) {
    batch::RunConfig c;
    c.input = a.input;
    c.cache_dir = a.cache_dir;
    c.out_dir = a.out_dir;
    c.fallback = batch::fallback_from_string(a.fallback);
    c.kind = classifiers::kind_from_string(a.kind);
    if (!a.model.empty()) c.model_file = fs::path(a.model);
    c.backend_command = a.backend_cmd;
    c.budget = std::chrono::milliseconds(a.budget_ms);
    c.workers = a.workers;
    c.seed = a.seed;
    return c;
}

int cmd_itemize(const ItemizeArgs& a) {
    batch::RunConfig c = to_config(a);
    batch::validate(c);
    const auto summary = batch::run_itemize(c);
    for (const auto& f : summary.filings) {
        if (!f.ok) std::cerr << "failed: " << f.input << ": " << f.error << "\n";
    }
    std::cout << "itemized " << summary.succeeded << "/" << summary.filings.size() << " filings into "
              << c.out_dir.string() << "\n";
    if (summary.coverage) std::cout << pipeline::report_to_json(*summary.coverage).dump(2) << "\n";
    return summary.exit_code() == 0 ? kExitOk : kExitAllFailed;
}

int cmd_train(const std::string& labels, const std::string& kind, const std::string& model_out, std::uint64_t seed) {
    const auto data = classifiers::read_examples(labels);
    const auto split = classifiers::split_dataset(data, seed);
    const auto model = classifiers::train(split.train, classifiers::kind_from_string(kind), seed);
    classifiers::save_model_file(model, model_out);
    nlohmann::json out{{"kind", classifiers::to_string(model.kind)},
                       {"model", model_out},
                       {"sizes", {{"train", split.train.size()}, {"validation", split.validation.size()}, {"test", split.test.size()}}},
                       {"validation", metrics_block(model, split.validation)},
                       {"test", metrics_block(model, split.test)},
                       {"majority_baseline", eval::round_to(classifiers::majority_baseline(split.train, split.test), 4)}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string corpus, fallback = "off", kind = "logistic", model, backend_cmd, out, csv;
    unsigned workers = 1;
    std::uint64_t seed = 1;
    bool compare = false;
};

int cmd_eval(const EvalArgs& a) {
    const auto filings = batch::load_corpus(a.corpus);
    batch::RunConfig c;
    c.fallback = batch::fallback_from_string(a.fallback);
    c.kind = classifiers::kind_from_string(a.kind);
    if (!a.model.empty()) c.model_file = fs::path(a.model);
    c.backend_command = a.backend_cmd;
    c.seed = a.seed;
    if (a.workers < 1) throw ConfigError("workers must be at least 1");
    if (c.fallback == batch::FallbackMode::External && c.backend_command.empty())
        throw ConfigError("external fallback needs a backend command");

    std::unique_ptr<classifiers::BackendHandle> backend;
    pipeline::Options options;
    options.fallback = batch::make_fallback(c, backend);

    const fs::path scratch = fs::temp_directory_path() / ("tenq-eval-" + std::to_string(::getpid()));
    auto run = pipeline::run_corpus(filings, options, scratch, a.workers);
    std::error_code ec;
    fs::remove_all(scratch, ec);

    nlohmann::json out{{"coverage", pipeline::report_to_json(run.report)},
                       {"fallback", batch::to_string(c.fallback)},
                       {"timing",
                        {{"median_s", run.timing.median_s},
                         {"p95_s", run.timing.p95_s},
                         {"max_s", run.timing.max_s},
                         {"mean_bytes", run.timing.mean_bytes}}}};
    if (a.compare && c.fallback != batch::FallbackMode::Off) {
        auto base = pipeline::run_corpus(filings, pipeline::Options{}, std::nullopt, a.workers);
        out["rule_based_only"] = pipeline::report_to_json(base.report);
    }
    print_json(out, a.out);
    if (!a.csv.empty()) {
        std::string csv = "filing_id,truth_items,rule_records,rule_correct,fallback_records,fallback_correct,rule_complete,exact\n";
        for (std::size_t i = 0; i < filings.size(); ++i) {
            const auto& s = run.scores[i];
            csv += filings[i].filing_id + "," + std::to_string(s.truth_items) + "," + std::to_string(s.rule_records) + "," +
                   std::to_string(s.rule_correct) + "," + std::to_string(s.fallback_records) + "," +
                   std::to_string(s.fallback_correct) + "," + (s.rule_complete ? "1" : "0") + "," +
                   (s.exact ? "1" : "0") + "\n";
        }
        write_file_atomic(a.csv, csv);
    }
    if (backend) backend->shutdown();
    return kExitOk;
}

struct GenArgs {
    std::string out;
    std::size_t n = 200;
    std::uint64_t seed = 1;
    double all = 0;
    std::optional<double> omit_toc, dangling, reworded, references, omitted, plain, unstyled;
    std::size_t target_bytes = 0;
};

int cmd_gen_corpus(const GenArgs& a) {
    auto spec = eval::SyntheticSpec::perturbed(a.seed, a.n, a.all);
    if (a.omit_toc) spec.omit_toc = *a.omit_toc;
    if (a.dangling) spec.dangling_anchors = *a.dangling;
    if (a.reworded) spec.reworded_titles = *a.reworded;
    if (a.references) spec.in_paragraph_references = *a.references;
    if (a.omitted) spec.items_omitted = *a.omitted;
    if (a.plain) spec.plain_text = *a.plain;
    if (a.unstyled) spec.unstyled_titles = *a.unstyled;
    spec.target_bytes = a.target_bytes;
    spec.validate();
    if (!fs::is_directory(fs::absolute(fs::path(a.out)).parent_path()))
        throw ConfigError("output directory parent does not exist: " + a.out);
    const auto entries = eval::generate_corpus(spec, a.out);
    std::cout << "wrote " << entries.size() << " filings to " << a.out << "\n";
    return kExitOk;
}

int cmd_gen_labels(const std::string& out, std::size_t n, std::uint64_t seed, double share) {
    const auto data = pipeline::make_training_set(seed, n, share);
    classifiers::write_examples(out, data);
    std::size_t pos = 0;
    for (const auto& e : data) pos += e.label;
    std::cout << "wrote " << data.size() << " examples (" << pos << " positive) to " << out << "\n";
    return kExitOk;
}

int cmd_serve(const std::string& out_dir, const std::string& host, int port, const std::string& labels) {
    if (!fs::is_directory(out_dir)) throw ConfigError("not a directory: " + out_dir);
    server::ServerConfig cfg;
    cfg.out_dir = out_dir;
    cfg.host = host;
    cfg.port = port;
    cfg.labels_file = labels.empty() ? fs::path(out_dir) / "labels.jsonl" : fs::path(labels);
    server::Server srv(cfg);
    const int bound = srv.bind();
    g_server = &srv;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "serving " << out_dir << " on http://" << host << ":" << bound << "/v1/" << std::endl;
    srv.run();
    g_server = nullptr;
    return kExitOk;
}

int cmd_fetch(const std::vector<std::string>& accessions, const std::string& cache_dir) {
    batch::RunConfig c;
    c.cache_dir = cache_dir;
    const fs::path dir = batch::effective_cache_dir(c);
    int failures = 0;
    for (const auto& acc : accessions) {
        try {
            const auto raw = ingest::fetch_filing(acc, dir);
            std::cout << raw.accession_id << " " << raw.bytes.size() << " bytes "
                      << (raw.source == ingest::Source::Remote ? "(remote)" : "(cache)") << "\n";
        } catch (const Error& e) {
            std::cerr << acc << ": " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == static_cast<int>(accessions.size()) ? kExitAllFailed : kExitOk;
}

int cmd_export(const std::string& out_dir, const std::string& filing, const std::string& format) {
    const auto f = store::export_format_from_string(format);
    const fs::path dir = store::filing_dir(out_dir, store::document_id_for(filing));
    std::cout << store::export_items(dir, f).string() << "\n";
    return kExitOk;
}

int cmd_check_backend(const std::string& command, long long timeout_ms) {
    const auto checks = classifiers::run_protocol_conformance(command, std::chrono::milliseconds(timeout_ms));
    bool ok = true;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
        ok = ok && c.passed;
    }
    return ok && !checks.empty() ? kExitOk : kExitAllFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tenq: itemize SEC 10-Q filings into Parts and Items"};
    app.require_subcommand(1);

    ItemizeArgs ia;
    auto* itemize = app.add_subcommand("itemize", "Itemize filings and write per-item text plus manifests");
    itemize->add_option("-i,--input", ia.input, "Accession list file, directory of filings, or one filing")->required();
    itemize->add_option("-o,--out", ia.out_dir, "Output directory")->required();
    itemize->add_option("--cache-dir", ia.cache_dir, std::string("Download cache (default $") + batch::kCacheDirEnv + ")");
    itemize->add_option("--fallback", ia.fallback, "off | classical | external")->capture_default_str();
    itemize->add_option("--kind", ia.kind, "Classical model kind")->capture_default_str();
    itemize->add_option("--model", ia.model, "Trained model file for the fallback");
    itemize->add_option("--backend-cmd", ia.backend_cmd, "External classifier command");
    itemize->add_option("--budget-ms", ia.budget_ms, "Partition budget per filing")->capture_default_str();
    itemize->add_option("--workers", ia.workers, "Parallel filings")->capture_default_str();
    itemize->add_option("--seed", ia.seed, "Seed for synthetic training")->capture_default_str();

    std::string labels, kind = "logistic", model_out;
    std::uint64_t train_seed = 1;
    auto* train = app.add_subcommand("train", "Train a classical candidate classifier");
    train->add_option("--labels", labels, "Labeled examples (JSON lines)")->required();
    train->add_option("--kind", kind, "logistic | naive_bayes | linear_svm | knn | decision_tree | adaboost")->capture_default_str();
    train->add_option("-o,--out", model_out, "Model file to write")->required();
    train->add_option("--seed", train_seed, "Split and training seed")->capture_default_str();

    EvalArgs ea;
    auto* evalc = app.add_subcommand("eval", "Benchmark the pipeline against a generated corpus");
    evalc->add_option("--corpus", ea.corpus, "Corpus directory with ground truth")->required();
    evalc->add_option("--fallback", ea.fallback, "off | classical | external")->capture_default_str();
    evalc->add_option("--kind", ea.kind, "Classical model kind")->capture_default_str();
    evalc->add_option("--model", ea.model, "Trained model file");
    evalc->add_option("--backend-cmd", ea.backend_cmd, "External classifier command");
    evalc->add_option("--workers", ea.workers, "Parallel filings")->capture_default_str();
    evalc->add_option("--seed", ea.seed, "Seed for synthetic training")->capture_default_str();
    evalc->add_option("-o,--out", ea.out, "CoverageReport JSON file (default stdout)");
    evalc->add_option("--csv", ea.csv, "Per-filing outcomes CSV");
    evalc->add_flag("--compare", ea.compare, "Also report the rule-based-only run");

    GenArgs ga;
    auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus with ground truth");
    gen->add_option("-o,--out", ga.out, "Output directory")->required();
    gen->add_option("-n,--filings", ga.n, "Number of filings")->capture_default_str();
    gen->add_option("--seed", ga.seed, "Seed")->capture_default_str();
    gen->add_option("--perturb", ga.all, "Probability applied to every perturbation")->capture_default_str();
    gen->add_option("--omit-toc", ga.omit_toc);
    gen->add_option("--dangling-anchors", ga.dangling);
    gen->add_option("--reworded-titles", ga.reworded);
    gen->add_option("--in-paragraph-references", ga.references);
    gen->add_option("--items-omitted", ga.omitted);
    gen->add_option("--plain-text", ga.plain);
    gen->add_option("--unstyled-titles", ga.unstyled);
    gen->add_option("--target-bytes", ga.target_bytes, "Pad filings to about this many body bytes");

    std::string labels_out;
    std::size_t n_labels = 1000;
    std::uint64_t labels_seed = 1;
    double share = pipeline::kDefaultPositiveShare;
    auto* gl = app.add_subcommand("gen-labels", "Generate labeled candidate examples from synthetic filings");
    gl->add_option("-o,--out", labels_out, "Output JSON lines file")->required();
    gl->add_option("-n,--examples", n_labels, "Number of examples")->capture_default_str();
    gl->add_option("--seed", labels_seed, "Seed")->capture_default_str();
    gl->add_option("--positive-share", share, "Share of positive examples")->capture_default_str();

    std::string serve_dir, host = "127.0.0.1", serve_labels;
    int port = server::kDefaultPort;
    auto* serve = app.add_subcommand("serve", "Serve the /v1/ HTTP API over an output directory");
    serve->add_option("-o,--out", serve_dir, "Output directory to serve")->required();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
    serve->add_option("--labels", serve_labels, "Relabel file (default <out>/labels.jsonl)");

    std::vector<std::string> accessions;
    std::string fetch_cache;
    auto* fetch = app.add_subcommand("fetch", "Download filings into the cache");
    fetch->add_option("accessions", accessions, "Accession numbers")->required();
    fetch->add_option("--cache-dir", fetch_cache, std::string("Cache directory (default $") + batch::kCacheDirEnv + ")");

    std::string export_dir, export_filing, export_format = "json";
    auto* exp = app.add_subcommand("export", "Export a filing's effective item texts");
    exp->add_option("-o,--out", export_dir, "Output directory used by itemize")->required();
    exp->add_option("--filing", export_filing, "Filing or document id")->required();
    exp->add_option("--format", export_format, "plain | json | csv")->capture_default_str();

    std::string backend_cmd;
    long long backend_timeout = 10000;
    auto* check = app.add_subcommand("check-backend", "Run the classifier protocol conformance checks");
    check->add_option("--cmd", backend_cmd, "Backend command line")->required();
    check->add_option("--timeout-ms", backend_timeout, "Per-response timeout")->capture_default_str();

    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    auto* met = app.add_subcommand("metrics", "Confusion-matrix metrics from counts");
    met->add_option("--tp", tp)->required();
    met->add_option("--fp", fp)->required();
    met->add_option("--fn", fn)->required();
    met->add_option("--tn", tn)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*itemize) return cmd_itemize(ia);
        if (*train) return cmd_train(labels, kind, model_out, train_seed);
        if (*evalc) return cmd_eval(ea);
        if (*gen) return cmd_gen_corpus(ga);
        if (*gl) return cmd_gen_labels(labels_out, n_labels, labels_seed, share);
        if (*serve) return cmd_serve(serve_dir, host, port, serve_labels);
        if (*fetch) return cmd_fetch(accessions, fetch_cache);
        if (*exp) return cmd_export(export_dir, export_filing, export_format);
        if (*check) return cmd_check_backend(backend_cmd, backend_timeout);
        if (*met) {
            std::cout << eval::metrics_to_json(eval::confusion_metrics(tp, fp, fn, tn)).dump(2) << "\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << error_name(e) << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
