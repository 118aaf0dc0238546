#include "tenq/server.hpp"

#include <sys/socket.h>

#include <mutex>

#include "httplib.h"
#include "json.hpp"
#include "tenq/classifiers.hpp"
#include "tenq/error.hpp"
#include "tenq/store.hpp"

namespace tenq::server {

namespace {

using nlohmann::json;

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, {{"error", {{"status", status}, {"code", code}, {"message", message}}}});
}

bool safe_segment(const std::string& s) {
    if (s.empty() || s.size() > 200 || s[0] == '.') return false;
    for (char c : s) {
        const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        throw HttpError{400, "malformed_json", e.what()};
    }
}

json item_json(const store::ManifestItem& it) {
    return {{"key", it.key},
            {"part", it.part},
            {"item_id", it.item_id},
            {"method", itemize::to_string(it.method)},
            {"title_text", it.title_text}};
}

}  // namespace

Server::Server(ServerConfig config) : config_(std::move(config)), http_(std::make_unique<httplib::Server>()) {
    // SO_REUSEPORT (the library default) would let a second server share the port silently.
    http_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    http_->set_payload_max_length(kMaxBodyBytes);
    routes();
}

Server::~Server() { stop(); }

int Server::bind() {
    if (config_.port == 0) {
        port_ = http_->bind_to_any_port(config_.host);
        if (port_ < 0) throw PortInUse("cannot bind " + config_.host);
    } else {
        if (!http_->bind_to_port(config_.host, config_.port)) {
            throw PortInUse("port " + std::to_string(config_.port) + " on " + config_.host + " is not available");
        }
        port_ = config_.port;
    }
    return port_;
}

void Server::run() {
    {
        std::lock_guard lock(state_mutex_);
        if (stop_requested_) return;
        started_ = true;
    }
    http_->listen_after_bind();
}

void Server::stop() {
    bool started = false;
    {
        std::lock_guard lock(state_mutex_);
        stop_requested_ = true;
        started = started_;
    }
    if (!http_ || !started) return;
    // run() may not have reached the accept loop yet.
    http_->wait_until_ready();
    http_->stop();
}

void Server::routes() {
    auto write_mutex = std::make_shared<std::mutex>();
    const fs::path out_dir = config_.out_dir;
    const fs::path labels_file = config_.labels_file;

    // Wraps a handler with error mapping so every failure carries a JSON body.
    auto guard = [](auto fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const HttpError& e) {
                send_error(res, e.status, e.code, e.message);
            } catch (const NotFound& e) {
                send_error(res, 404, "not_found", e.what());
            } catch (const json::exception& e) {
                send_error(res, 422, "invalid_field", e.what());
            } catch (const ConfigError& e) {
                send_error(res, 400, "invalid_request", e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "internal", e.what());
            }
        };
    };

    auto filing = [out_dir](const httplib::Request& req) {
        const std::string id = req.path_params.at("doc");
        if (!safe_segment(id)) throw HttpError{400, "invalid_id", "malformed document id"};
        const fs::path dir = store::filing_dir(out_dir, id);
        if (!fs::exists(dir / store::kManifestFile)) throw HttpError{404, "not_found", "no filing " + id};
        return dir;
    };

    http_->Get("/v1/health", guard([](const httplib::Request&, httplib::Response& res) {
                   send_json(res, 200, {{"ok", true}, {"api", "v1"}, {"tool_version", store::kToolVersion}});
               }));

    http_->Get("/v1/filings", guard([out_dir](const httplib::Request&, httplib::Response& res) {
                   json list = json::array();
                   for (const auto& id : store::list_filings(out_dir)) {
                       const auto m = store::effective_manifest(store::filing_dir(out_dir, id));
                       std::size_t edited = 0;
                       for (const auto& it : m.items) edited += it.method == itemize::Method::HumanEdited;
                       list.push_back({{"document_id", m.document_id},
                                       {"filing_id", m.filing_id},
                                       {"format", ingest::to_string(m.format)},
                                       {"items", m.items.size()},
                                       {"edited", edited}});
                   }
                   send_json(res, 200, {{"filings", std::move(list)}});
               }));

    http_->Get("/v1/filings/:doc/manifest", guard([filing](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, store::manifest_to_json(store::effective_manifest(filing(req))));
               }));

    http_->Get("/v1/filings/:doc/items/:key", guard([filing](const httplib::Request& req, httplib::Response& res) {
                   const fs::path dir = filing(req);
                   const std::string key = req.path_params.at("key");
                   for (const auto& it : store::effective_manifest(dir).items) {
                       if (it.key != key) continue;
                       json body = item_json(it);
                       body["text"] = store::effective_text(dir, key);
                       body["edited"] = it.method == itemize::Method::HumanEdited;
                       send_json(res, 200, body);
                       return;
                   }
                   throw HttpError{404, "not_found", "no item " + key};
               }));

    http_->Put("/v1/filings/:doc/items/:key",
               guard([filing, write_mutex](const httplib::Request& req, httplib::Response& res) {
                   const fs::path dir = filing(req);
                   const std::string key = req.path_params.at("key");
                   const json body = parse_body(req);
                   if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
                       throw HttpError{422, "invalid_field", "body must be an object with a string \"text\""};
                   }
                   {
                       std::lock_guard lock(*write_mutex);
                       store::put_edit(dir, key, body["text"].get<std::string>());
                   }
                   for (const auto& it : store::effective_manifest(dir).items) {
                       if (it.key == key) send_json(res, 200, item_json(it));
                   }
               }));

    http_->Post("/v1/labels", guard([labels_file, write_mutex](const httplib::Request& req, httplib::Response& res) {
                    const json body = parse_body(req);
                    if (!body.is_object()) throw HttpError{422, "invalid_field", "body must be a JSON object"};
                    if (!body.contains("label") || !body["label"].is_boolean())
                        throw HttpError{422, "invalid_field", "\"label\" must be a boolean"};
                    if (!body.contains("features") || !body["features"].is_array())
                        throw HttpError{422, "invalid_field", "\"features\" must be an array"};
                    classifiers::LabeledExample e = classifiers::example_from_json(body);
                    e.revision = 0;
                    if (labels_file.empty()) throw HttpError{409, "no_labels_file", "server has no labels file"};
                    std::lock_guard lock(*write_mutex);
                    const auto stored = classifiers::append_example(labels_file, std::move(e));
                    send_json(res, 201, classifiers::example_to_json(stored));
                }));

    http_->Get("/v1/filings/:doc/export", guard([filing](const httplib::Request& req, httplib::Response& res) {
                   const fs::path dir = filing(req);
                   const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
                   const auto texts = store::effective_texts(dir);
                   if (format == "json") {
                       res.set_content(store::render_json_bundle(texts), "application/json; charset=utf-8");
                   } else if (format == "csv") {
                       res.set_content(store::render_csv(texts), "text/csv; charset=utf-8");
                   } else {
                       throw HttpError{400, "invalid_format", "format must be json or csv"};
                   }
                   res.status = 200;
               }));

    http_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        const int status = res.status;
        send_error(res, status, status == 404 ? "not_found" : "bad_request",
                   status == 404 ? "no route for " + req.method + " " + req.path : httplib::status_message(status));
    });
}

}  // namespace tenq::server
