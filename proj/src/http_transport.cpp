#include <httplib.h>

#include "tenq/error.hpp"
#include "tenq/ingest.hpp"

namespace tenq::ingest {

namespace {

class HttplibTransport final : public HttpTransport {
public:
    HttplibTransport(std::string base_url, std::string user_agent)
        : client_(base_url), user_agent_(std::move(user_agent)) {
        client_.set_connection_timeout(10);
        client_.set_read_timeout(60);
        client_.set_follow_location(true);
    }

    HttpResponse get(const std::string& path) override {
        std::lock_guard lock(mutex_);
        httplib::Headers headers{{"User-Agent", user_agent_}, {"Accept-Encoding", "identity"}};
        auto res = client_.Get(path, headers);
        if (!res) throw NetworkError("GET " + path + " failed: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    std::mutex mutex_;
    httplib::Client client_;
    std::string user_agent_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url, const std::string& user_agent) {
    return std::make_shared<HttplibTransport>(base_url, user_agent);
}

}  // namespace tenq::ingest
