#include "support/http_client.hpp"

#include <stdexcept>

#include "httplib.h"

namespace probeable::testing {

struct HttpClient::Impl {
    explicit Impl(int port) : client("127.0.0.1", port) {
        client.set_read_timeout(60, 0);
        client.set_connection_timeout(5, 0);
    }
    httplib::Client client;
};

namespace {

httplib::Headers auth(const std::string &token) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return h;
}

HttpResponse convert(const httplib::Result &res) {
    if (!res) throw std::runtime_error("HTTP request failed: " + httplib::to_string(res.error()));
    HttpResponse out;
    out.status = res->status;
    out.body = nlohmann::json::parse(res->body, nullptr, false);
    if (out.body.is_discarded()) out.body = nullptr;
    return out;
}

}  // namespace

HttpClient::HttpClient(int port) : impl_(std::make_unique<Impl>(port)) {}
HttpClient::~HttpClient() = default;

HttpResponse HttpClient::get(const std::string &path, const std::string &token) const {
    return convert(impl_->client.Get(path, auth(token)));
}

HttpResponse HttpClient::post(const std::string &path, const nlohmann::json &body, const std::string &token) const {
    return post_raw(path, body.dump(), token);
}

HttpResponse HttpClient::post_raw(const std::string &path, const std::string &body, const std::string &token) const {
    return convert(impl_->client.Post(path, auth(token), body, "application/json"));
}

}  // namespace probeable::testing
