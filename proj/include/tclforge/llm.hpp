#pragma once

// Chat-completion transport shared by the teacher (synthesis), the candidate
// generators and the judge (evaluation). One wire shape for every vendor;
// retries with exponential backoff and jitter; per-endpoint concurrency and
// pacing limits. Mock transports play fixtures back deterministically and
// record everything for assertions.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tclforge/core.hpp"

namespace tclforge::llm {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct EndpointConfig {
    std::string name;       // provenance label: teacher, generator, judge, ...
    std::string base_url;   // e.g. http://localhost:8080 or https://api.example.com
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;  // environment variable holding the key
    double temperature = 1.0;
    int max_tokens = 2048;
    int timeout_seconds = 120;  // long prompts need generous timeouts
    int max_retries = 3;
    int max_concurrent = 4;
    int min_interval_ms = 0;
    int backoff_base_ms = 250;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["name"] = name;
        j["base_url"] = base_url;
        j["path"] = path;
        j["model"] = model;
        j["api_key_env"] = api_key_env;
        j["temperature"] = temperature;
        j["max_tokens"] = max_tokens;
        j["timeout_seconds"] = timeout_seconds;
        j["max_retries"] = max_retries;
        j["max_concurrent"] = max_concurrent;
        j["min_interval_ms"] = min_interval_ms;
        return j;
    }

    static EndpointConfig from_json(const nlohmann::json& j) {
        EndpointConfig c;
        c.name = j.value("name", "");
        c.base_url = j.value("base_url", "");
        c.path = j.value("path", std::string("/v1/chat/completions"));
        c.model = j.value("model", "");
        c.api_key_env = j.value("api_key_env", "");
        c.temperature = j.value("temperature", 1.0);
        c.max_tokens = j.value("max_tokens", 2048);
        c.timeout_seconds = j.value("timeout_seconds", 120);
        c.max_retries = j.value("max_retries", 3);
        c.max_concurrent = j.value("max_concurrent", 4);
        c.min_interval_ms = j.value("min_interval_ms", 0);
        c.backoff_base_ms = j.value("backoff_base_ms", 250);
        if (c.temperature < 0) throw ConfigError("endpoint temperature must be >= 0");
        if (c.max_retries < 0) throw ConfigError("endpoint max_retries must be >= 0");
        if (c.max_concurrent < 1) throw ConfigError("endpoint max_concurrent must be >= 1");
        return c;
    }
};

struct Usage {
    long prompt_tokens = -1;
    long completion_tokens = -1;
};

struct ChatExchange {
    std::vector<ChatMessage> request;
    std::string response_text;
    Usage usage;
    double latency_ms = 0.0;
    int attempts = 1;  // <= max_retries + 1
};

struct TransportError : std::runtime_error {
    TransportError(const std::string& msg, int status) : std::runtime_error(msg), last_status(status) {}
    int last_status = 0;
};

struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FixtureMissError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Digest identifying a request by its messages; mock fixtures key on it.
inline std::string request_digest(const std::vector<ChatMessage>& messages) {
    std::string flat;
    for (const ChatMessage& m : messages) {
        flat += m.role;
        flat += '\n';
        flat += m.content;
        flat += '\n';
    }
    return digest_hex(flat);
}

// ---------------------------------------------------------------------------
// Transports
// ---------------------------------------------------------------------------

struct TransportResult {
    int status = 0;           // HTTP status; 0 with transport_failure set
    std::string body;
    bool transport_failure = false;
    std::string error;        // description when transport_failure
};

/// Wire-level sender of one request body. Implementations: HTTP and mock.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResult send(const std::string& request_body,
                                 const std::vector<ChatMessage>& messages) = 0;
    virtual bool is_mock() const { return false; }
};

// ---------------------------------------------------------------------------
// Mock transport: deterministic playback, full request recording.
// ---------------------------------------------------------------------------

struct MockEntry {
    int status = 200;
    std::string text;          // becomes choices[0].message.content
    std::string raw_body;      // overrides the synthesized body when set
    bool transport_failure = false;
    int delay_ms = 0;          // simulated latency, for concurrency tests

    static MockEntry from_json(const nlohmann::json& j) {
        MockEntry e;
        e.status = j.value("status", 200);
        e.text = j.value("text", "");
        e.raw_body = j.value("raw_body", "");
        e.transport_failure = j.value("transport_failure", false);
        e.delay_ms = j.value("delay_ms", 0);
        return e;
    }
};

/// Fixture formats:
///   sequence — entries consumed in call order
///   digest   — per-request-digest entry lists, consumed in order
///   rules    — first rule whose "contains" text appears in the request wins;
///              "{digest}" in the reply text is replaced per request
struct MockFixture {
    enum class Mode { Sequence, Digest, Rules };
    Mode mode = Mode::Sequence;
    std::vector<MockEntry> sequence;
    std::map<std::string, std::vector<MockEntry>> by_digest;
    struct Rule {
        std::string contains;
        MockEntry entry;
    };
    std::vector<Rule> rules;
    MockEntry fallback;
    bool has_fallback = false;

    static MockFixture from_json(const nlohmann::json& j) {
        MockFixture f;
        std::string mode = j.value("mode", "sequence");
        if (mode == "sequence") {
            f.mode = Mode::Sequence;
            for (const auto& e : j.value("entries", nlohmann::json::array()))
                f.sequence.push_back(MockEntry::from_json(e));
        } else if (mode == "digest") {
            f.mode = Mode::Digest;
            if (j.contains("entries"))
                for (const auto& [digest, list] : j["entries"].items())
                    for (const auto& e : list)
                        f.by_digest[digest].push_back(MockEntry::from_json(e));
        } else if (mode == "rules") {
            f.mode = Mode::Rules;
            for (const auto& r : j.value("rules", nlohmann::json::array()))
                f.rules.push_back({r.value("contains", ""), MockEntry::from_json(r)});
            if (j.contains("default")) {
                f.fallback = MockEntry::from_json(j["default"]);
                f.has_fallback = true;
            }
        } else {
            throw ConfigError("mock fixture mode must be sequence, digest or rules");
        }
        return f;
    }

    static MockFixture from_file(const std::string& path) {
        return from_json(nlohmann::json::parse(read_file(path)));
    }

    static MockFixture sequence_of(std::vector<MockEntry> entries) {
        MockFixture f;
        f.mode = Mode::Sequence;
        f.sequence = std::move(entries);
        return f;
    }
};

class MockTransport : public Transport {
public:
    explicit MockTransport(MockFixture fixture) : fixture_(std::move(fixture)) {}

    TransportResult send(const std::string& request_body,
                         const std::vector<ChatMessage>& messages) override {
        std::string digest = request_digest(messages);
        MockEntry entry;
        {
            std::lock_guard<std::mutex> lock(mu_);
            recorded_.push_back({digest, request_body, messages});
            entry = next_entry(digest);
        }
        int now_in_flight = ++in_flight_;
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (now_in_flight > max_in_flight_) max_in_flight_ = now_in_flight;
        }
        if (entry.delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(entry.delay_ms));
        --in_flight_;

        if (entry.transport_failure) return {0, "", true, "mock transport failure"};
        TransportResult result;
        result.status = entry.status;
        if (!entry.raw_body.empty()) {
            result.body = entry.raw_body;
        } else {
            std::string text = entry.text;
            // Deterministic uniqueness hook for template-style fixtures.
            std::size_t pos;
            while ((pos = text.find("{digest}")) != std::string::npos)
                text.replace(pos, 8, digest);
            nlohmann::json body;
            body["choices"] = nlohmann::json::array(
                {{{"message", {{"role", "assistant"}, {"content", text}}}}});
            body["usage"] = {{"prompt_tokens", 0}, {"completion_tokens", 0}};
            result.body = body.dump();
        }
        return result;
    }

    bool is_mock() const override { return true; }

    struct RecordedRequest {
        std::string digest;
        std::string body;
        std::vector<ChatMessage> messages;
    };

    std::vector<RecordedRequest> recorded() const {
        std::lock_guard<std::mutex> lock(mu_);
        return recorded_;
    }
    std::size_t request_count() const {
        std::lock_guard<std::mutex> lock(mu_);
        return recorded_.size();
    }
    int max_in_flight() const {
        std::lock_guard<std::mutex> lock(mu_);
        return max_in_flight_;
    }

private:
    MockEntry next_entry(const std::string& digest) {
        switch (fixture_.mode) {
            case MockFixture::Mode::Sequence: {
                if (seq_pos_ >= fixture_.sequence.size())
                    throw FixtureMissError("mock sequence exhausted at request " +
                                           std::to_string(seq_pos_) + " (digest " + digest + ")");
                return fixture_.sequence[seq_pos_++];
            }
            case MockFixture::Mode::Digest: {
                auto it = fixture_.by_digest.find(digest);
                if (it == fixture_.by_digest.end() || it->second.empty())
                    throw FixtureMissError("no mock entry for request digest " + digest);
                std::size_t& pos = digest_pos_[digest];
                const auto& list = it->second;
                MockEntry e = list[std::min(pos, list.size() - 1)];
                ++pos;
                return e;
            }
            case MockFixture::Mode::Rules: {
                std::string flat;
                for (const ChatMessage& m : recorded_.back().messages) flat += m.content + "\n";
                for (const auto& rule : fixture_.rules)
                    if (!rule.contains.empty() && flat.find(rule.contains) != std::string::npos)
                        return rule.entry;
                if (fixture_.has_fallback) return fixture_.fallback;
                throw FixtureMissError("no mock rule matches request digest " + digest);
            }
        }
        throw FixtureMissError("unreachable");
    }

    MockFixture fixture_;
    mutable std::mutex mu_;
    std::vector<RecordedRequest> recorded_;
    std::map<std::string, std::size_t> digest_pos_;
    std::size_t seq_pos_ = 0;
    std::atomic<int> in_flight_{0};
    int max_in_flight_ = 0;
};

}  // namespace tclforge::llm

// The HTTP transport needs cpp-httplib; keep the include after the mock so
// header consumers that never touch real endpoints still get everything.
#include <httplib.h>

namespace tclforge::llm {

class HttpTransport : public Transport {
public:
    explicit HttpTransport(const EndpointConfig& config) : config_(config) {
        if (config_.base_url.empty())
            throw ConfigError("endpoint " + config_.name + ": base_url is required");
        if (config_.api_key_env.empty())
            throw ConfigError("endpoint " + config_.name +
                              ": api_key_env is required (keys come from the environment)");
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            throw ConfigError("endpoint " + config_.name + ": environment variable " +
                              config_.api_key_env + " is not set");
        api_key_ = key;
        client_ = std::make_unique<httplib::Client>(config_.base_url);
        client_->set_connection_timeout(config_.timeout_seconds);
        client_->set_read_timeout(config_.timeout_seconds);
        client_->set_write_timeout(config_.timeout_seconds);
    }

    TransportResult send(const std::string& request_body,
                         const std::vector<ChatMessage>&) override {
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
        auto res = client_->Post(config_.path, headers, request_body, "application/json");
        if (!res) return {0, "", true, httplib::to_string(res.error())};
        return {res->status, res->body, false, ""};
    }

private:
    EndpointConfig config_;
    std::string api_key_;
    std::unique_ptr<httplib::Client> client_;
};

// ---------------------------------------------------------------------------
// Client: retry, pacing and concurrency over any transport.
// ---------------------------------------------------------------------------

class ChatClient {
public:
    /// With no explicit transport, a real HTTP transport is built (and the
    /// API key resolved) from the config.
    explicit ChatClient(EndpointConfig config, std::shared_ptr<Transport> transport = nullptr)
        : config_(std::move(config)), transport_(std::move(transport)) {
        if (!transport_) transport_ = std::make_shared<HttpTransport>(config_);
    }

    const EndpointConfig& config() const { return config_; }
    Transport& transport() { return *transport_; }

    /// One chat completion with the endpoint's retry, pacing and concurrency
    /// policy. Throws AuthError on 401/403 (no retry) and TransportError once
    /// retries are exhausted or on non-retryable statuses.
    ChatExchange complete(const std::vector<ChatMessage>& messages) {
        nlohmann::json body;
        body["model"] = config_.model;
        body["temperature"] = config_.temperature;
        body["max_tokens"] = config_.max_tokens;
        auto msgs = nlohmann::json::array();
        for (const ChatMessage& m : messages)
            msgs.push_back({{"role", m.role}, {"content", m.content}});
        body["messages"] = std::move(msgs);
        const std::string request_body = body.dump();

        auto start = std::chrono::steady_clock::now();
        TransportResult result;
        int attempts = 0;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            attempts = attempt + 1;
            {
                Slot slot(*this);
                result = transport_->send(request_body, messages);
            }
            if (result.transport_failure || result.status == 429 || result.status >= 500) {
                if (attempt < config_.max_retries) {
                    std::this_thread::sleep_for(backoff_delay(attempt));
                    continue;
                }
                std::string what = result.transport_failure
                                       ? "transport failure talking to " + config_.name + ": " +
                                             result.error
                                       : "endpoint " + config_.name + " still failing (HTTP " +
                                             std::to_string(result.status) + ") after " +
                                             std::to_string(attempts) + " attempts";
                throw TransportError(what, result.status);
            }
            if (result.status == 401 || result.status == 403)
                throw AuthError("endpoint " + config_.name + " rejected the API key (HTTP " +
                                std::to_string(result.status) + ")");
            if (result.status != 200)
                throw TransportError("endpoint " + config_.name + " returned HTTP " +
                                         std::to_string(result.status),
                                     result.status);
            break;
        }

        ChatExchange exchange;
        exchange.request = messages;
        exchange.attempts = attempts;
        try {
            nlohmann::json parsed = nlohmann::json::parse(result.body);
            exchange.response_text =
                parsed.at("choices").at(0).at("message").at("content").get<std::string>();
            if (parsed.contains("usage")) {
                exchange.usage.prompt_tokens = parsed["usage"].value("prompt_tokens", -1);
                exchange.usage.completion_tokens = parsed["usage"].value("completion_tokens", -1);
            }
        } catch (const nlohmann::json::exception& e) {
            throw TransportError("endpoint " + config_.name +
                                     " returned an unparsable completion body: " + e.what(),
                                 result.status);
        }
        exchange.latency_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
        return exchange;
    }

private:
    /// Concurrency slot + dispatch pacing. Dispatch times are serialized so
    /// consecutive sends to one endpoint are at least min_interval_ms apart.
    struct Slot {
        explicit Slot(ChatClient& c) : client(c) {
            std::unique_lock<std::mutex> lock(client.mu_);
            client.cv_.wait(lock, [&] { return client.in_flight_ < client.config_.max_concurrent; });
            ++client.in_flight_;
            auto now = std::chrono::steady_clock::now();
            auto earliest =
                client.last_dispatch_ + std::chrono::milliseconds(client.config_.min_interval_ms);
            auto dispatch_at = now < earliest ? earliest : now;
            client.last_dispatch_ = dispatch_at;
            lock.unlock();
            if (dispatch_at > now) std::this_thread::sleep_until(dispatch_at);
        }
        ~Slot() {
            {
                std::lock_guard<std::mutex> lock(client.mu_);
                --client.in_flight_;
            }
            client.cv_.notify_one();
        }
        ChatClient& client;
    };

    std::chrono::milliseconds backoff_delay(int attempt) {
        std::lock_guard<std::mutex> lock(mu_);
        std::uniform_int_distribution<int> jitter(0, config_.backoff_base_ms);
        int ms = config_.backoff_base_ms * (1 << attempt) + jitter(rng_);
        return std::chrono::milliseconds(ms);
    }

    EndpointConfig config_;
    std::shared_ptr<Transport> transport_;
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::chrono::steady_clock::time_point last_dispatch_{};
    std::mt19937 rng_{std::random_device{}()};
};

/// Convenience: a client whose endpoint is served by a mock fixture.
inline std::pair<std::unique_ptr<ChatClient>, std::shared_ptr<MockTransport>> make_mock_client(
    EndpointConfig config, MockFixture fixture) {
    auto transport = std::make_shared<MockTransport>(std::move(fixture));
    auto client = std::make_unique<ChatClient>(std::move(config), transport);
    return {std::move(client), transport};
}

}  // namespace tclforge::llm
