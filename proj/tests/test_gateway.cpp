#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "core/gateway.hpp"

using namespace misq::gateway;

namespace {

std::shared_ptr<MockBackend> scripted(std::vector<MockBackend::Rule> rules,
                                      std::string fallback = "") {
    return std::make_shared<MockBackend>(std::move(rules), std::move(fallback));
}

} // namespace

TEST_CASE("mock backend: substring rule and n_samples") {
    auto mock = scripted({{{"mistake detector"}, {"YES"}, 0}}, "fallback");
    Gateway gw(mock);

    ChatRequest req;
    req.system_prompt = "You are an excellent mistake detector.";
    req.user_prompt = "#question#: \"anything\"";
    auto resp = gw.chat(req);
    REQUIRE(resp.texts.size() == 1);
    CHECK(resp.texts[0] == "YES");

    req.n_samples = 3;
    resp = gw.chat(req);
    CHECK(resp.texts.size() == 3);

    req.system_prompt = "something else";
    req.user_prompt = "no match here";
    req.n_samples = 1;
    CHECK(gw.chat(req).texts[0] == "fallback");
}

TEST_CASE("mock backend: round-robin responses") {
    auto mock = scripted({{{"probe"}, {"1867", "1965", "1433"}, 0}});
    Gateway gw(mock);
    ChatRequest req;
    req.user_prompt = "probe";
    CHECK(gw.chat(req).texts[0] == "1867");
    CHECK(gw.chat(req).texts[0] == "1965");
    CHECK(gw.chat(req).texts[0] == "1433");
    CHECK(gw.chat(req).texts[0] == "1867");
}

TEST_CASE("mock backend: identical requests give identical bytes") {
    for (int run = 0; run < 2; ++run) {
        auto mock = scripted({{{"q"}, {"alpha", "beta"}, 0}});
        Gateway gw(mock);
        ChatRequest req;
        req.user_prompt = "q";
        req.seed = 42;
        CHECK(gw.chat(req).texts[0] == "alpha");
        CHECK(gw.chat(req).texts[0] == "beta");
    }
}

TEST_CASE("mock embeddings: hashed bag of words") {
    auto mock = scripted({});
    Gateway gw(mock);

    const auto pair = gw.embed({"x", "x"});
    REQUIRE(pair.size() == 2);
    CHECK(cosine(pair[0], pair[1]) == doctest::Approx(1.0));

    const auto disjoint = gw.embed({"alpha beta", "gamma delta"});
    CHECK(cosine(disjoint[0], disjoint[1]) == doctest::Approx(0.0));

    CHECK_THROWS_AS(gw.embed({}), misq::ValidationError);
}

TEST_CASE("request validation") {
    auto mock = scripted({});
    Gateway gw(mock);
    ChatRequest req;
    req.n_samples = 0;
    CHECK_THROWS_AS(gw.chat(req), misq::ValidationError);
    req.n_samples = 1;
    req.temperature = -0.5;
    CHECK_THROWS_AS(gw.chat(req), misq::ValidationError);
}

namespace {

// Counts concurrent in-flight calls; fails the bound check if exceeded.
class CountingBackend : public Backend {
  public:
    explicit CountingBackend(int hold_ms) : hold_ms_(hold_ms) {}
    ChatResponse chat(const ChatRequest &req) override {
        const int now = ++inflight_;
        int snapshot = max_seen_.load();
        while (now > snapshot && !max_seen_.compare_exchange_weak(snapshot, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(hold_ms_));
        --inflight_;
        ChatResponse r;
        r.texts.assign(req.n_samples, "ok");
        return r;
    }
    std::vector<EmbeddingVector> embed(const std::vector<std::string> &) override {
        return {};
    }
    std::string name() const override { return "counting"; }
    int max_seen() const { return max_seen_.load(); }

  private:
    int hold_ms_;
    std::atomic<int> inflight_{0};
    std::atomic<int> max_seen_{0};
};

// Fails transiently n times, then succeeds; counts successful completions.
class FlakyBackend : public Backend {
  public:
    explicit FlakyBackend(int failures) : failures_left_(failures) {}
    ChatResponse chat(const ChatRequest &) override {
        if (failures_left_-- > 0) throw TransportError("flaky");
        ++successes_;
        ChatResponse r;
        r.texts = {"done"};
        return r;
    }
    std::vector<EmbeddingVector> embed(const std::vector<std::string> &) override {
        return {};
    }
    std::string name() const override { return "flaky"; }
    int successes() const { return successes_; }

  private:
    std::atomic<int> failures_left_;
    std::atomic<int> successes_{0};
};

} // namespace

TEST_CASE("gateway bounds in-flight requests") {
    auto backend = std::make_shared<CountingBackend>(20);
    Gateway::Options opts;
    opts.max_inflight = 3;
    Gateway gw(backend, opts);
    std::vector<std::thread> threads;
    for (int i = 0; i < 10; ++i) {
        threads.emplace_back([&] {
            ChatRequest req;
            gw.chat(req);
        });
    }
    for (auto &t : threads) t.join();
    CHECK(backend->max_seen() <= 3);
    CHECK(backend->max_seen() >= 1);
}

TEST_CASE("gateway retries transient failures without duplicating success") {
    auto backend = std::make_shared<FlakyBackend>(2);
    Gateway::Options opts;
    opts.max_retries = 3;
    opts.backoff_initial_ms = 1;
    Gateway gw(backend, opts);
    ChatRequest req;
    CHECK(gw.chat(req).texts[0] == "done");
    CHECK(backend->successes() == 1);
}

TEST_CASE("gateway gives up after the retry cap") {
    auto backend = std::make_shared<FlakyBackend>(100);
    Gateway::Options opts;
    opts.max_retries = 2;
    opts.backoff_initial_ms = 1;
    Gateway gw(backend, opts);
    ChatRequest req;
    CHECK_THROWS_AS(gw.chat(req), TransportError);
}

TEST_CASE("http backend speaks the chat-completion protocol") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request &req, httplib::Response &res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json choices = nlohmann::json::array();
        for (int i = 0; i < body.value("n", 1); ++i) {
            choices.push_back({{"message",
                                {{"role", "assistant"},
                                 {"content", "echo:" + body.at("messages")[1]
                                                           .at("content")
                                                           .get<std::string>()}}}});
        }
        res.set_content(
            nlohmann::json{{"model", "test-model"}, {"choices", choices}}.dump(),
            "application/json");
    });
    server.Post("/v1/embeddings", [](const httplib::Request &req, httplib::Response &res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json data = nlohmann::json::array();
        for (std::size_t i = 0; i < body.at("input").size(); ++i)
            data.push_back({{"embedding", {1.0, 0.0, 0.5}}});
        res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackend::Options opts;
    opts.endpoint = "http://127.0.0.1:" + std::to_string(port);
    opts.model = "test-model";
    auto backend = std::make_shared<HttpBackend>(opts);
    Gateway gw(backend);

    ChatRequest req;
    req.user_prompt = "ping";
    req.n_samples = 2;
    const auto resp = gw.chat(req);
    REQUIRE(resp.texts.size() == 2);
    CHECK(resp.texts[0] == "echo:ping");
    CHECK(resp.model_id == "test-model");

    const auto vecs = gw.embed({"a", "b"});
    REQUIRE(vecs.size() == 2);
    CHECK(vecs[0].values.size() == 3);

    server.stop();
    server_thread.join();
}

TEST_CASE("unreachable endpoint raises after retries") {
    HttpBackend::Options opts;
    opts.endpoint = "http://127.0.0.1:1";
    opts.model = "x";
    opts.timeout_sec = 1;
    Gateway::Options gopts;
    gopts.max_retries = 1;
    gopts.backoff_initial_ms = 1;
    Gateway gw(std::make_shared<HttpBackend>(opts), gopts);
    ChatRequest req;
    CHECK_THROWS_AS(gw.chat(req), TransportError);
}
