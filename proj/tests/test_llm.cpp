#include "tclforge/llm.hpp"

#include <cstdlib>
#include <thread>

#include "doctest.h"

using namespace tclforge;
using namespace tclforge::llm;

namespace {

EndpointConfig test_endpoint() {
    EndpointConfig c;
    c.name = "test";
    c.model = "mock-model";
    c.max_retries = 3;
    c.backoff_base_ms = 1;  // keep retry tests fast
    return c;
}

std::vector<ChatMessage> hello() { return {{"user", "hello"}}; }

}  // namespace

TEST_SUITE_BEGIN("llm");

TEST_CASE("mock returns the fixture text") {
    auto [client, transport] =
        make_mock_client(test_endpoint(), MockFixture::sequence_of({{200, "fixed reply"}}));
    ChatExchange ex = client->complete(hello());
    CHECK(ex.response_text == "fixed reply");
    CHECK(ex.attempts == 1);
    CHECK(transport->request_count() == 1);
}

TEST_CASE("two 429s then 200 gives attempt count 3") {
    auto [client, transport] = make_mock_client(
        test_endpoint(),
        MockFixture::sequence_of({{429, ""}, {429, ""}, {200, "finally"}}));
    ChatExchange ex = client->complete(hello());
    CHECK(ex.attempts == 3);
    CHECK(ex.response_text == "finally");
    CHECK(transport->request_count() == 3);
}

TEST_CASE("transport failures retry, then throw with the last status") {
    EndpointConfig cfg = test_endpoint();
    cfg.max_retries = 1;
    auto [client, transport] = make_mock_client(
        cfg, MockFixture::sequence_of({{0, "", "", true}, {0, "", "", true}}));
    CHECK_THROWS_AS(client->complete(hello()), TransportError);
    CHECK(transport->request_count() == 2);  // initial + one retry
}

TEST_CASE("auth failures do not retry") {
    auto [client, transport] =
        make_mock_client(test_endpoint(), MockFixture::sequence_of({{401, "nope"}}));
    CHECK_THROWS_AS(client->complete(hello()), AuthError);
    CHECK(transport->request_count() == 1);
}

TEST_CASE("missing api key environment variable is an immediate config error") {
    EndpointConfig cfg = test_endpoint();
    cfg.base_url = "http://localhost:1";
    cfg.api_key_env = "TCLFORGE_TEST_KEY_THAT_DOES_NOT_EXIST";
    CHECK_THROWS_AS(ChatClient{cfg}, ConfigError);
}

TEST_CASE("sequence fixture consumed in order; exhaustion is a fixture miss") {
    auto [client, transport] = make_mock_client(
        test_endpoint(), MockFixture::sequence_of({{200, "A"}, {200, "B"}}));
    CHECK(client->complete(hello()).response_text == "A");
    CHECK(client->complete(hello()).response_text == "B");
    CHECK_THROWS_AS(client->complete(hello()), FixtureMissError);
}

TEST_CASE("digest fixture: miss names the unmatched digest") {
    MockFixture fixture;
    fixture.mode = MockFixture::Mode::Digest;
    fixture.by_digest[request_digest(hello())] = {{200, "hi"}};
    auto [client, transport] = make_mock_client(test_endpoint(), fixture);
    CHECK(client->complete(hello()).response_text == "hi");
    std::vector<ChatMessage> other = {{"user", "unexpected"}};
    try {
        client->complete(other);
        CHECK(false);
    } catch (const FixtureMissError& e) {
        CHECK(std::string(e.what()).find(request_digest(other)) != std::string::npos);
    }
}

TEST_CASE("rules fixture matches on request content and substitutes {digest}") {
    MockFixture fixture;
    fixture.mode = MockFixture::Mode::Rules;
    fixture.rules.push_back({"weather", {200, "sunny"}});
    fixture.fallback = {200, "echo {digest}"};
    fixture.has_fallback = true;
    auto [client, transport] = make_mock_client(test_endpoint(), fixture);
    CHECK(client->complete({{"user", "what weather today"}}).response_text == "sunny");
    ChatExchange ex = client->complete(hello());
    CHECK(ex.response_text == "echo " + request_digest(hello()));
}

TEST_CASE("all requests are recorded for assertion") {
    auto [client, transport] = make_mock_client(
        test_endpoint(), MockFixture::sequence_of({{200, "1"}, {200, "2"}, {200, "3"}}));
    client->complete({{"user", "a"}});
    client->complete({{"user", "b"}});
    client->complete({{"user", "c"}});
    auto recorded = transport->recorded();
    REQUIRE(recorded.size() == 3);
    CHECK(recorded[0].messages[0].content == "a");
    CHECK(recorded[2].messages[0].content == "c");
}

TEST_CASE("concurrency limit holds under parallel callers") {
    EndpointConfig cfg = test_endpoint();
    cfg.max_concurrent = 2;
    std::vector<MockEntry> entries;
    for (int i = 0; i < 12; ++i) entries.push_back({200, "r", "", false, 15});
    auto [client, transport] = make_mock_client(cfg, MockFixture::sequence_of(entries));
    std::vector<std::thread> threads;
    for (int i = 0; i < 12; ++i)
        threads.emplace_back([&] { client->complete(hello()); });
    for (auto& t : threads) t.join();
    CHECK(transport->request_count() == 12);
    CHECK(transport->max_in_flight() <= 2);
}

TEST_CASE("pacing spreads dispatches by the minimum interval") {
    EndpointConfig cfg = test_endpoint();
    cfg.min_interval_ms = 20;
    auto [client, transport] = make_mock_client(
        cfg, MockFixture::sequence_of({{200, "1"}, {200, "2"}, {200, "3"}}));
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 3; ++i) client->complete(hello());
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    CHECK(elapsed >= 40);  // two inter-request gaps
}

TEST_CASE("retry never replays an answered request") {
    // One failure, one success: exactly two sends total, and after the
    // success no further request goes out.
    auto [client, transport] = make_mock_client(
        test_endpoint(), MockFixture::sequence_of({{429, ""}, {200, "done"}}));
    ChatExchange ex = client->complete(hello());
    CHECK(ex.response_text == "done");
    CHECK(transport->request_count() == 2);
}

TEST_CASE("http transport against a loopback server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        int n = ++hits;
        CHECK(req.get_header_value("Authorization") == "Bearer sekret");
        auto body = nlohmann::json::parse(req.body);
        CHECK(body["model"] == "mock-model");
        if (n <= 2) {
            res.status = 429;
            return;
        }
        nlohmann::json reply;
        reply["choices"] =
            nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", "pong"}}}}});
        reply["usage"] = {{"prompt_tokens", 7}, {"completion_tokens", 2}};
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("TCLFORGE_TEST_KEY", "sekret", 1);
    EndpointConfig cfg = test_endpoint();
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.api_key_env = "TCLFORGE_TEST_KEY";
    ChatClient client(cfg);
    ChatExchange ex = client.complete({{"user", "ping"}});
    CHECK(ex.response_text == "pong");
    CHECK(ex.attempts == 3);
    CHECK(ex.usage.prompt_tokens == 7);

    server.stop();
    listener.join();
}

TEST_SUITE_END();
