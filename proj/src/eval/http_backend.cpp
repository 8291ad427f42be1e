// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "codecorpus/eval/harness.hpp"

namespace codecorpus::eval {

namespace {

constexpr int kAttempts = 3;

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/?#]+)([^#]*)$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw std::invalid_argument(fmt::format("malformed backend URL '{}'", url));
    std::string path = m[2].str();
    return {m[1].str(), path.empty() ? "/" : path};
}

class HttpBackend : public Backend {
public:
    HttpBackend(const std::string& url, std::string auth, int timeout_seconds)
        : url_(url), target_(split_url(url)), auth_(std::move(auth)), timeout_(timeout_seconds) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (url.rfind("https://", 0) == 0) throw std::invalid_argument("this build has no TLS support for https URLs");
#endif
    }

    std::string complete(const CompletionRequest& request) override {
        nlohmann::ordered_json body = {
            {"prompt", request.prompt}, {"max_tokens", request.max_tokens}, {"temperature", request.temperature}};
        std::string payload = body.dump();

        // One client per call keeps this safe to use from several threads.
        httplib::Client client(target_.origin);
        client.set_connection_timeout(timeout_, 0);
        client.set_read_timeout(timeout_, 0);
        client.set_write_timeout(timeout_, 0);
        httplib::Headers headers;
        if (!auth_.empty()) headers.emplace("Authorization", auth_);

        std::string last_error;
        for (int attempt = 0; attempt < kAttempts; ++attempt) {
            if (attempt) std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
            auto res = client.Post(target_.path, headers, payload, "application/json");
            if (!res) {
                last_error = fmt::format("request to {} failed: {}", url_, httplib::to_string(res.error()));
                continue;
            }
            if (res->status >= 500 || res->status == 429) {
                last_error = fmt::format("{} answered HTTP {}", url_, res->status);
                continue;
            }
            if (res->status != 200) throw BackendError(fmt::format("{} answered HTTP {}", url_, res->status));
            nlohmann::json reply;
            try {
                reply = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw BackendError(fmt::format("{} sent invalid JSON: {}", url_, e.what()));
            }
            if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
                throw BackendError(fmt::format("{} reply has no string field 'text'", url_));
            return reply["text"].get<std::string>();
        }
        throw BackendError(last_error);
    }

    std::string name() const override { return url_; }

private:
    std::string url_;
    ParsedUrl target_;
    std::string auth_;
    int timeout_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const std::string& url, const std::string& auth, int timeout_seconds) {
    return std::make_unique<HttpBackend>(url, auth, timeout_seconds);
}

}  // namespace codecorpus::eval
