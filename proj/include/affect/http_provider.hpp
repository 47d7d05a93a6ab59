#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "affect/gateway.hpp"

namespace affect {

inline std::string api_key_from_env() {
    for (const char* name : {"AFFECT_API_KEY", "OPENAI_API_KEY"}) {
        const char* v = std::getenv(name);
        if (v != nullptr && *v != '\0') return v;
    }
    return {};
}

// Chat-completions client: system message carries the rubric, user message the
// rendered dialogue, temperature passed through verbatim.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(std::string base_url, std::string api_key = api_key_from_env())
        : api_key_(std::move(api_key)) {
        auto scheme_end = base_url.find("://");
        std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        auto path_start = base_url.find('/', host_start);
        if (path_start == std::string::npos) {
            origin_ = base_url;
        } else {
            origin_ = base_url.substr(0, path_start);
            path_prefix_ = base_url.substr(path_start);
            while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        }
    }

    bool cacheable() const override { return true; }

    std::string complete(const Request& request) override {
        nlohmann::json body;
        body["model"] = request.config.model_name;
        body["temperature"] = request.config.temperature;
        body["messages"] = nlohmann::json::array(
            {{{"role", "system"}, {"content", request.prompt.rubric_text}},
             {{"role", "user"}, {"content", request.prompt.rendered_dialogue}}});

        httplib::Client client(origin_);
        client.set_connection_timeout(std::chrono::duration<double>(request.config.timeout_seconds));
        client.set_read_timeout(std::chrono::duration<double>(request.config.timeout_seconds));
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                               "application/json");
        if (!res)
            throw ProviderFailure(ProviderFailure::Kind::Transport,
                                  "transport failure contacting " + origin_ + ": " +
                                      httplib::to_string(res.error()));
        if (res->status == 401 || res->status == 403)
            throw ProviderFailure(ProviderFailure::Kind::Auth,
                                  "authentication rejected (HTTP " + std::to_string(res->status) +
                                      "); set AFFECT_API_KEY or OPENAI_API_KEY");
        if (res->status != 200)
            throw ProviderFailure(ProviderFailure::Kind::BadResponse,
                                  "HTTP " + std::to_string(res->status) + ": " + res->body);

        nlohmann::json payload;
        try {
            payload = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception&) {
            throw ProviderFailure(ProviderFailure::Kind::BadResponse,
                                  "completion response is not JSON");
        }
        if (!payload.contains("choices") || !payload["choices"].is_array() ||
            payload["choices"].empty() || !payload["choices"][0].contains("message") ||
            !payload["choices"][0]["message"].contains("content") ||
            !payload["choices"][0]["message"]["content"].is_string())
            throw ProviderFailure(ProviderFailure::Kind::BadResponse,
                                  "completion response has no message content");
        return payload["choices"][0]["message"]["content"].get<std::string>();
    }

private:
    std::string origin_;
    std::string path_prefix_;
    std::string api_key_;
};

}  // namespace affect
