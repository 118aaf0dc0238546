#include "tenq/backend.hpp"

#include "subprocess.hpp"
#include "tenq/error.hpp"

namespace tenq::classifiers {

namespace {

std::optional<nlohmann::json> parse_object(const std::string& line) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
}

}  // namespace

BackendHandle::BackendHandle(const std::string& command, std::chrono::milliseconds snippet_timeout,
                             std::chrono::milliseconds handshake_timeout)
    : timeout_(snippet_timeout) {
    try {
        process_ = std::make_unique<proc::Subprocess>(proc::split_command(command));
    } catch (const Error& e) {
        throw BackendUnavailable(e.what());
    }
    if (!process_->write_line(nlohmann::json{{"op", "hello"}, {"version", kProtocolVersion}}.dump()))
        throw BackendUnavailable("backend closed its input before the handshake");
    auto line = process_->read_line(handshake_timeout);
    if (!line) throw BackendUnavailable("no handshake response from backend");
    auto reply = parse_object(*line);
    if (!reply || !reply->value("ok", false)) throw BackendUnavailable("handshake rejected: " + *line);
    const auto it = reply->find("name");
    name_ = it != reply->end() && it->is_string() ? it->get<std::string>() : std::string("unnamed");
    alive_ = true;
}

BackendHandle::~BackendHandle() {
    try {
        shutdown();
    } catch (...) {
    }
}

bool BackendHandle::alive() const {
    std::lock_guard lock(mutex_);
    return alive_;
}

std::optional<double> BackendHandle::classify(const candidates::ContextSnippet& snippet) {
    std::lock_guard lock(mutex_);
    if (!alive_) return std::nullopt;
    const long long id = next_id_++;
    nlohmann::json req{{"op", "classify"}, {"id", id}, {"snippet", candidates::snippet_to_json(snippet)}};
    if (!process_->write_line(req.dump())) {
        alive_ = false;
        return std::nullopt;
    }
    while (true) {
        auto line = process_->read_line(timeout_);
        if (!line) {
            if (process_->eof()) alive_ = false;
            return std::nullopt;
        }
        auto reply = parse_object(*line);
        if (!reply || !reply->contains("id") || !(*reply)["id"].is_number_integer())
            throw ProtocolError("malformed backend response: " + *line);
        const auto got = (*reply)["id"].get<long long>();
        // A late answer to a request that already timed out.
        if (got < id) continue;
        if (got != id) throw ProtocolError("response id " + std::to_string(got) + " for request " + std::to_string(id));
        const auto score = reply->find("score");
        if (score == reply->end() || !score->is_number()) throw ProtocolError("response without score: " + *line);
        const double s = score->get<double>();
        if (!(s >= 0.0 && s <= 1.0)) throw ProtocolError("score outside [0,1]: " + *line);
        return s;
    }
}

void BackendHandle::shutdown() {
    std::lock_guard lock(mutex_);
    if (!process_) return;
    process_->write_line(nlohmann::json{{"op", "bye"}}.dump());
    process_->close_stdin();
    if (!process_->wait(std::chrono::milliseconds(1000))) process_->kill();
    process_.reset();
    alive_ = false;
}

std::vector<Prediction> external_classify(BackendHandle& backend, const std::vector<candidates::ContextSnippet>& snippets,
                                          const FallbackFn& fallback, ExternalStats* stats) {
    std::vector<Prediction> out;
    out.reserve(snippets.size());
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        if (auto s = backend.classify(snippets[i])) {
            out.push_back({*s >= 0.5, *s});
            if (stats) ++stats->from_backend;
        } else {
            out.push_back(fallback(i));
            if (stats) ++stats->from_fallback;
        }
    }
    return out;
}

std::vector<ConformanceCheck> run_protocol_conformance(const std::string& command, std::chrono::milliseconds timeout) {
    std::vector<ConformanceCheck> checks;
    auto add = [&](std::string name, bool ok, std::string detail = {}) {
        checks.push_back({std::move(name), ok, std::move(detail)});
        return ok;
    };

    std::unique_ptr<proc::Subprocess> p;
    try {
        p = std::make_unique<proc::Subprocess>(proc::split_command(command));
    } catch (const Error& e) {
        add("spawn", false, e.what());
        return checks;
    }

    p->write_line(nlohmann::json{{"op", "hello"}, {"version", kProtocolVersion}}.dump());
    auto line = p->read_line(timeout);
    auto hello = line ? parse_object(*line) : std::nullopt;
    const bool hello_ok = hello && hello->value("ok", false) && hello->contains("name") && (*hello)["name"].is_string();
    if (!add("handshake", hello_ok, line ? *line : "no response")) return checks;

    candidates::ContextSnippet snippet;
    Block title;
    title.text = "Item 1. Legal Proceedings.";
    title.bold = true;
    title.centered = true;
    Block body;
    body.index = 1;
    body.text = "From time to time we are subject to legal proceedings arising in the ordinary course of business.";
    snippet.blocks = {title, body};
    const auto snippet_json = candidates::snippet_to_json(snippet);

    auto classify_line = [&](long long id) {
        return nlohmann::json{{"op", "classify"}, {"id", id}, {"snippet", snippet_json}}.dump();
    };
    auto valid_reply = [&](long long id, std::string& detail) {
        auto l = p->read_line(timeout);
        if (!l) {
            detail = "no response for id " + std::to_string(id);
            return false;
        }
        auto r = parse_object(*l);
        if (!r || !r->contains("id") || !(*r)["id"].is_number_integer() || (*r)["id"].get<long long>() != id ||
            !r->contains("score") || !(*r)["score"].is_number()) {
            detail = "unexpected reply for id " + std::to_string(id) + ": " + *l;
            return false;
        }
        const double s = (*r)["score"].get<double>();
        if (!(s >= 0 && s <= 1)) {
            detail = "score out of range: " + *l;
            return false;
        }
        return true;
    };

    {
        for (long long id = 1; id <= 3; ++id) p->write_line(classify_line(id));
        std::string detail;
        bool ok = true;
        for (long long id = 1; id <= 3 && ok; ++id) ok = valid_reply(id, detail);
        add("ordered_responses", ok, detail);
    }
    {
        p->write_line("this is not json {");
        auto l = p->read_line(timeout);
        auto r = l ? parse_object(*l) : std::nullopt;
        const bool err_ok = r && r->contains("error");
        std::string detail = err_ok ? "" : (l ? "expected an error object, got: " + *l : "no response to garbage line");
        p->write_line(classify_line(4));
        std::string d2;
        const bool next_ok = err_ok && valid_reply(4, d2);
        add("garbage_recovery", err_ok && next_ok, detail.empty() ? d2 : detail);
    }
    {
        p->write_line(nlohmann::json{{"op", "bye"}}.dump());
        p->close_stdin();
        auto status = p->wait(timeout);
        add("bye_exit", status && *status == 0, status ? "exit " + std::to_string(*status) : "did not exit");
    }
    return checks;
}

}  // namespace tenq::classifiers
