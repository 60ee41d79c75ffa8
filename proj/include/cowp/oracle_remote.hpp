#pragma once

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cowp/oracle.hpp"

namespace cowp {

namespace detail {

/// Counting gate for bounding in-flight requests (runtime-configurable,
/// unlike std::counting_semaphore).
class InflightGate {
public:
    explicit InflightGate(int limit) : slots_(limit < 1 ? 1 : limit) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }

    void release() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int slots_;
};

} // namespace detail

/// Completions client for any OpenAI-compatible endpoint. POSTs
/// <endpoint>/completions and reads the first choice's text. Transport
/// failures retry with capped exponential backoff; auth failures do not.
class RemoteOracle : public OracleBackend {
public:
    explicit RemoteOracle(OracleConfig config)
        : config_(std::move(config)), gate_(config_.max_inflight) {
        if (config_.endpoint.empty())
            throw ConfigError("remote oracle needs an endpoint URL");
        auto scheme_end = config_.endpoint.find("://");
        size_t path_start = scheme_end == std::string::npos
                                ? config_.endpoint.find('/')
                                : config_.endpoint.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = config_.endpoint;
        } else {
            base_ = config_.endpoint.substr(0, path_start);
            prefix_ = config_.endpoint.substr(path_start);
            while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
        }
    }

    std::string complete(const std::string& prompt, PromptKind) override {
        nlohmann::json body = {
            {"model", config_.model},
            {"prompt", prompt},
            {"temperature", config_.temperature},
            {"top_p", config_.top_p},
            {"max_tokens", config_.max_tokens},
            {"frequency_penalty", config_.frequency_penalty},
            {"presence_penalty", config_.presence_penalty},
        };
        const std::string payload = body.dump();

        gate_.acquire();
        struct Release {
            detail::InflightGate& g;
            ~Release() { g.release(); }
        } release{gate_};

        std::string last_error;
        int delay_ms = config_.backoff_initial_ms;
        for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
            httplib::Client client(base_);
            client.set_connection_timeout(10, 0);
            client.set_read_timeout(60, 0);
            httplib::Headers headers;
            if (const char* key = std::getenv(config_.credential_env.c_str());
                key && *key)
                headers.emplace("Authorization", std::string("Bearer ") + key);

            auto res = client.Post(prefix_ + "/completions", headers, payload,
                                   "application/json");
            if (res) {
                if (res->status == 401 || res->status == 403)
                    throw AuthError("endpoint rejected credentials (HTTP " +
                                    std::to_string(res->status) + ")");
                if (res->status >= 200 && res->status < 300) {
                    try {
                        auto parsed = nlohmann::json::parse(res->body);
                        return parsed.at("choices").at(0).at("text").get<std::string>();
                    } catch (const std::exception& e) {
                        throw TransportError(std::string("malformed completion body: ") +
                                             e.what());
                    }
                }
                last_error = "HTTP " + std::to_string(res->status);
            } else {
                last_error = httplib::to_string(res.error());
            }
            if (attempt < config_.max_attempts) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                delay_ms = std::min(delay_ms * 2, config_.backoff_cap_ms);
            }
        }
        throw TransportError("completions request failed after " +
                             std::to_string(config_.max_attempts) +
                             " attempts: " + last_error);
    }

    std::string tag() const override { return "remote:" + config_.model; }

private:
    OracleConfig config_;
    std::string base_;
    std::string prefix_;
    detail::InflightGate gate_;
};

} // namespace cowp
