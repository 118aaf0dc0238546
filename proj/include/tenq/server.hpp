#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

namespace httplib {
class Server;
}

namespace tenq::server {

namespace fs = std::filesystem;

inline constexpr const char* kApiPrefix = "/v1";
inline constexpr int kDefaultPort = 8787;
inline constexpr std::size_t kMaxBodyBytes = 16 * 1024 * 1024;

struct ServerConfig {
    fs::path out_dir;
    fs::path labels_file;  // relabels are appended here
    std::string host = "127.0.0.1";
    int port = kDefaultPort;  // 0 picks a free port
};

// HTTP API over a store output directory. See docs/http_api.md.
class Server {
public:
    explicit Server(ServerConfig config);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Throws PortInUse. Returns the bound port.
    int bind();
    // Blocks until stop().
    void run();
    void stop();
    int port() const { return port_; }

private:
    void routes();

    ServerConfig config_;
    std::unique_ptr<httplib::Server> http_;
    int port_ = 0;
    std::mutex state_mutex_;
    bool started_ = false;
    bool stop_requested_ = false;
};

}  // namespace tenq::server
