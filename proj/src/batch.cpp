#include "tenq/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/text_util.hpp"

namespace tenq::batch {

const char* to_string(FallbackMode m) {
    switch (m) {
        case FallbackMode::Off: return "off";
        case FallbackMode::Classical: return "classical";
        case FallbackMode::External: return "external";
    }
    return "off";
}

FallbackMode fallback_from_string(std::string_view s) {
    const std::string v = text::to_lower_ascii(s);
    if (v == "off" || v == "none") return FallbackMode::Off;
    if (v == "classical") return FallbackMode::Classical;
    if (v == "external") return FallbackMode::External;
    throw ConfigError("unknown fallback mode: " + std::string(s));
}

fs::path effective_cache_dir(const RunConfig& c) {
    if (!c.cache_dir.empty()) return c.cache_dir;
    if (const char* env = std::getenv(kCacheDirEnv); env && *env) return env;
    return kDefaultCacheDir;
}

void validate(const RunConfig& c) {
    if (c.input.empty()) throw ConfigError("no input given");
    if (!fs::exists(c.input)) throw ConfigError("input does not exist: " + c.input.string());
    if (c.out_dir.empty()) throw ConfigError("no output directory given");
    const fs::path parent = fs::absolute(c.out_dir).parent_path();
    if (!fs::is_directory(parent)) throw ConfigError("output directory parent does not exist: " + parent.string());
    if (fs::exists(c.out_dir) && !fs::is_directory(c.out_dir))
        throw ConfigError("output path is not a directory: " + c.out_dir.string());
    if (c.workers < 1) throw ConfigError("workers must be at least 1");
    if (c.budget.count() <= 0) throw ConfigError("budget must be positive");
    if (c.fallback == FallbackMode::External && c.backend_command.empty())
        throw ConfigError("external fallback needs a backend command");
    if (c.model_file && !fs::exists(*c.model_file)) throw ConfigError("model file does not exist: " + c.model_file->string());
}

namespace {

bool is_filing_file(const fs::path& p) {
    const auto ext = text::to_lower_ascii(p.extension().string());
    return ext == ".txt" || ext == ".htm" || ext == ".html";
}

std::string document_id_for_stem(const std::string& stem) {
    try {
        return store::document_id_for(ingest::normalize_accession(stem));
    } catch (const InvalidAccession&) {
        return store::document_id_for(stem);
    }
}

// An accession list holds nothing but accession numbers (blank lines and # comments allowed).
std::optional<std::vector<std::string>> read_accession_list(const fs::path& p) {
    std::istringstream in(read_file(p));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto t = text::trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            out.push_back(ingest::normalize_accession(t));
        } catch (const InvalidAccession&) {
            return std::nullopt;
        }
    }
    if (out.empty()) return std::nullopt;
    return out;
}

InputRef local_ref(const fs::path& p) {
    InputRef r;
    r.label = p.string();
    r.path = p;
    r.document_id = document_id_for_stem(p.stem().string());
    const fs::path truth = p.parent_path() / (p.stem().string() + ".truth.json");
    if (fs::exists(truth)) r.truth_path = truth;
    return r;
}

}  // namespace

std::vector<InputRef> resolve_inputs(const RunConfig& c) {
    std::vector<InputRef> out;
    if (fs::is_directory(c.input)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(c.input)) {
            if (e.is_regular_file() && is_filing_file(e.path())) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.push_back(local_ref(f));
        if (out.empty()) throw ConfigError("no filings (*.txt, *.htm, *.html) in " + c.input.string());
        return out;
    }
    if (auto list = read_accession_list(c.input)) {
        for (const auto& acc : *list) {
            InputRef r;
            r.label = acc;
            r.accession = acc;
            r.document_id = store::document_id_for(acc);
            out.push_back(std::move(r));
        }
        return out;
    }
    out.push_back(local_ref(c.input));
    return out;
}

pipeline::Classifier make_fallback(const RunConfig& c, std::unique_ptr<classifiers::BackendHandle>& backend) {
    std::optional<classifiers::Model> model;
    if (c.model_file) {
        model = classifiers::load_model_file(*c.model_file);
    } else if (c.fallback == FallbackMode::Classical) {
        const auto data = pipeline::make_training_set(c.seed, kSyntheticTrainingExamples);
        model = classifiers::train(classifiers::split_dataset(data, c.seed).train, c.kind, c.seed);
    }
    switch (c.fallback) {
        case FallbackMode::Off: return {};
        case FallbackMode::Classical: return pipeline::local_classifier(std::move(*model));
        case FallbackMode::External:
            backend = std::make_unique<classifiers::BackendHandle>(c.backend_command);
            return pipeline::external_classifier(*backend, std::move(model));
    }
    return {};
}

std::vector<eval::SyntheticFiling> load_corpus(const fs::path& dir) {
    std::vector<eval::SyntheticFiling> out;
    for (const auto& e : eval::list_corpus(dir)) {
        if (e.truth_path.empty()) throw ConfigError("no ground truth for " + e.raw_path.string());
        eval::SyntheticFiling f;
        f.truth = eval::read_truth(e.truth_path);
        f.filing_id = f.truth.filing_id;
        f.raw = read_file(e.raw_path);
        out.push_back(std::move(f));
    }
    if (out.empty()) throw ConfigError("empty corpus: " + dir.string());
    return out;
}

nlohmann::json summary_to_json(const BatchSummary& s) {
    nlohmann::json filings = nlohmann::json::array();
    for (const auto& f : s.filings) {
        nlohmann::json stages = nlohmann::json::array();
        for (const auto& st : f.stages) stages.push_back({{"stage", st.stage}, {"outcome", st.outcome}, {"detail", st.detail}});
        filings.push_back({{"input", f.input},
                           {"filing_id", f.filing_id},
                           {"document_id", f.document_id},
                           {"ok", f.ok},
                           {"error", f.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(f.error)},
                           {"records", f.records},
                           {"fallback", f.used_fallback},
                           {"stages", std::move(stages)}});
    }
    nlohmann::json j{{"n_filings", s.filings.size()},
                     {"succeeded", s.succeeded},
                     {"failed", s.failed},
                     {"timing", {{"median_s", s.timing.median_s}, {"p95_s", s.timing.p95_s}, {"max_s", s.timing.max_s}}},
                     {"filings", std::move(filings)}};
    j["coverage"] = s.coverage ? pipeline::report_to_json(*s.coverage) : nlohmann::json(nullptr);
    return j;
}

BatchSummary run_itemize(const RunConfig& c) {
    validate(c);
    const auto inputs = resolve_inputs(c);
    std::unique_ptr<classifiers::BackendHandle> backend;
    pipeline::Options options;
    options.partition_budget = c.budget;
    options.fallback = make_fallback(c, backend);

    // Claim document ids in input order so collisions resolve the same way on every run.
    std::map<std::string, std::size_t> owner;
    std::vector<std::optional<std::size_t>> collides_with(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto [it, fresh] = owner.emplace(inputs[i].document_id, i);
        if (!fresh) collides_with[i] = it->second;
    }

    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw IoError("cannot create " + c.out_dir.string() + ": " + ec.message());
    const fs::path cache_dir = effective_cache_dir(c);

    BatchSummary summary;
    summary.filings.resize(inputs.size());
    std::vector<std::optional<pipeline::FilingScore>> scores(inputs.size());
    std::vector<double> seconds(inputs.size(), -1.0);
    std::atomic<std::size_t> next{0};

    auto work = [&](std::size_t i) {
        const InputRef& in = inputs[i];
        FilingOutcome& out = summary.filings[i];
        out.input = in.label;
        out.document_id = in.document_id;
        if (collides_with[i]) {
            out.error = "document id " + in.document_id + " already produced by " + inputs[*collides_with[i]].label;
            return;
        }
        try {
            pipeline::Options o = options;
            if (c.fault_hook) o.fault_hook = [&](std::string_view stage) { c.fault_hook(in.label, stage); };
            if (c.fault_hook) c.fault_hook(in.label, "ingest");
            const ingest::RawFiling raw =
                in.accession ? ingest::fetch_filing(*in.accession, cache_dir) : ingest::read_local_filing(*in.path);
            const auto t0 = std::chrono::steady_clock::now();
            auto result = pipeline::process_raw(raw, o);
            if (o.fault_hook) o.fault_hook("store");
            pipeline::store_result(result, c.out_dir);
            seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            out.filing_id = result.filing_id;
            out.records = result.records.size();
            out.used_fallback = result.used_fallback;
            out.stages = result.stages;
            out.ok = !result.records.empty();
            if (!out.ok) out.error = "no items recovered";
            if (in.truth_path) scores[i] = pipeline::score_filing(result, eval::read_truth(*in.truth_path));
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        } catch (...) {
            out.ok = false;
            out.error = "unknown failure";
        }
    };

    const unsigned n_threads = std::min<unsigned>(c.workers, static_cast<unsigned>(inputs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < inputs.size(); i = next++) work(i);
        });
    }
    for (auto& t : pool) t.join();
    if (backend) backend->shutdown();

    std::vector<double> timed;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& f = summary.filings[i];
        f.ok ? ++summary.succeeded : ++summary.failed;
        if (seconds[i] >= 0) timed.push_back(seconds[i]);
        // A filing that crashed still counts against coverage.
        if (!scores[i] && inputs[i].truth_path) {
            try {
                pipeline::FilingScore s;
                s.truth_items = eval::read_truth(*inputs[i].truth_path).items.size();
                scores[i] = s;
            } catch (const std::exception&) {
            }
        }
    }
    summary.timing = pipeline::summarize_timings(timed);
    if (std::all_of(scores.begin(), scores.end(), [](const auto& s) { return s.has_value(); })) {
        pipeline::CoverageReport report;
        for (const auto& s : scores) report.add(*s);
        report.finish();
        summary.coverage = report;
    }
    write_file_atomic(c.out_dir / kRunReportFile, summary_to_json(summary).dump(2) + "\n");
    return summary;
}

}  // namespace tenq::batch
