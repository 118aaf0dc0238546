#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tenq/candidates.hpp"
#include "tenq/classifiers.hpp"

namespace tenq::proc {
class Subprocess;
}

namespace tenq::classifiers {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::chrono::milliseconds kSnippetTimeout{2000};
inline constexpr std::chrono::milliseconds kHandshakeTimeout{10000};

// External classifier process speaking newline-delimited JSON on stdin/stdout.
// One request in flight at a time.
class BackendHandle {
public:
    // Spawns the command and performs the hello handshake.
    // Throws BackendUnavailable on spawn or handshake failure.
    explicit BackendHandle(const std::string& command, std::chrono::milliseconds snippet_timeout = kSnippetTimeout,
                           std::chrono::milliseconds handshake_timeout = kHandshakeTimeout);
    ~BackendHandle();
    BackendHandle(const BackendHandle&) = delete;
    BackendHandle& operator=(const BackendHandle&) = delete;

    const std::string& name() const { return name_; }
    bool alive() const;

    // Score for one snippet, or nullopt when the backend timed out or died.
    // Throws ProtocolError on a malformed response.
    std::optional<double> classify(const candidates::ContextSnippet& snippet);

    // Sends bye and waits briefly for exit.
    void shutdown();

private:
    mutable std::mutex mutex_;
    std::unique_ptr<proc::Subprocess> process_;
    std::string name_;
    std::chrono::milliseconds timeout_;
    long long next_id_ = 1;
    bool alive_ = false;
};

using FallbackFn = std::function<Prediction(std::size_t snippet_index)>;

struct ExternalStats {
    std::size_t from_backend = 0;
    std::size_t from_fallback = 0;
};

// Order-preserving. Snippets the backend cannot answer go to `fallback`.
std::vector<Prediction> external_classify(BackendHandle& backend, const std::vector<candidates::ContextSnippet>& snippets,
                                          const FallbackFn& fallback, ExternalStats* stats = nullptr);

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Drives a backend command through handshake, ordered classify responses,
// recovery after a garbage line, and bye.
std::vector<ConformanceCheck> run_protocol_conformance(const std::string& command,
                                                       std::chrono::milliseconds timeout = kHandshakeTimeout);

}  // namespace tenq::classifiers
