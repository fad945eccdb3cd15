#include "gateway.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <thread>

#include <httplib.h>

namespace misq::gateway {

using json = nlohmann::json;
using clock_t_ = std::chrono::steady_clock;

double cosine(const EmbeddingVector &a, const EmbeddingVector &b) {
    if (a.values.size() != b.values.size())
        throw ValidationError("embedding dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw ValidationError("zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------- mock

MockBackend::MockBackend(std::vector<Rule> rules, std::string fallback, std::size_t embed_dim)
    : rules_(std::move(rules)), fallback_(std::move(fallback)), embed_dim_(embed_dim) {}

std::shared_ptr<MockBackend> MockBackend::from_script_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock script: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw ValidationError("mock script " + path + ": " + e.what());
    }
    return from_script_json(j);
}

std::shared_ptr<MockBackend> MockBackend::from_script_json(const json &script) {
    std::vector<Rule> rules;
    for (const auto &r : script.value("rules", json::array())) {
        Rule rule;
        if (r.contains("match")) {
            if (r.at("match").is_string()) {
                rule.match.push_back(r.at("match").get<std::string>());
            } else {
                rule.match = r.at("match").get<std::vector<std::string>>();
            }
        }
        rule.responses = r.at("responses").get<std::vector<std::string>>();
        if (rule.responses.empty())
            throw ValidationError("mock rule with empty response list");
        rules.push_back(std::move(rule));
    }
    return std::make_shared<MockBackend>(std::move(rules),
                                         script.value("default", std::string{}),
                                         script.value("dim", std::size_t{512}));
}

ChatResponse MockBackend::chat(const ChatRequest &req) {
    std::lock_guard lock(mu_);
    ++chat_calls_;
    const std::string haystack = req.system_prompt + "\n" + req.user_prompt;
    ChatResponse resp;
    resp.model_id = "mock";
    for (int s = 0; s < req.n_samples; ++s) {
        std::string text = fallback_;
        for (auto &rule : rules_) {
            bool all = true;
            for (const auto &needle : rule.match) {
                if (haystack.find(needle) == std::string::npos) {
                    all = false;
                    break;
                }
            }
            if (all) {
                text = rule.responses[rule.next % rule.responses.size()];
                ++rule.next;
                break;
            }
        }
        resp.texts.push_back(std::move(text));
    }
    return resp;
}

std::vector<EmbeddingVector> MockBackend::embed(const std::vector<std::string> &texts) {
    if (texts.empty()) throw ValidationError("embed() requires a non-empty text list");
    {
        std::lock_guard lock(mu_);
        ++embed_calls_;
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto &t : texts) {
        EmbeddingVector v;
        v.values.assign(embed_dim_, 0.0);
        std::string tok;
        auto flush = [&] {
            if (tok.empty()) return;
            // FNV-1a, stable across platforms (std::hash is not)
            std::uint64_t h = 1469598103934665603ULL;
            for (unsigned char c : tok) {
                h ^= static_cast<std::uint64_t>(std::tolower(c));
                h *= 1099511628211ULL;
            }
            v.values[h % embed_dim_] += 1.0;
            tok.clear();
        };
        for (unsigned char c : t) {
            if (std::isspace(c)) {
                flush();
            } else {
                tok.push_back(static_cast<char>(c));
            }
        }
        flush();
        bool all_zero = true;
        for (double x : v.values)
            if (x != 0.0) { all_zero = false; break; }
        if (all_zero) v.values[0] = 1.0; // empty text gets a fixed unit direction
        out.push_back(std::move(v));
    }
    return out;
}

std::size_t MockBackend::chat_calls() const {
    std::lock_guard lock(mu_);
    return chat_calls_;
}

std::size_t MockBackend::embed_calls() const {
    std::lock_guard lock(mu_);
    return embed_calls_;
}

// ---------------------------------------------------------------- http

namespace {

json post_json(const HttpBackend::Options &opts, const std::string &path, const json &body) {
    httplib::Client cli(opts.endpoint);
    cli.set_connection_timeout(opts.timeout_sec);
    cli.set_read_timeout(opts.timeout_sec);
    httplib::Headers headers;
    if (!opts.api_key.empty())
        headers.emplace("Authorization", "Bearer " + opts.api_key);
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("transport failure on " + opts.endpoint + path);
    if (res->status == 401 || res->status == 403)
        throw BackendError("authentication failure (" + std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500)
        throw TransportError("server status " + std::to_string(res->status));
    if (res->status != 200)
        throw BackendError("unexpected status " + std::to_string(res->status) + ": " + res->body);
    try {
        return json::parse(res->body);
    } catch (const json::parse_error &e) {
        throw BackendError(std::string("response schema mismatch: ") + e.what());
    }
}

} // namespace

ChatResponse HttpBackend::chat(const ChatRequest &req) {
    json body = {
        {"model", opts_.model},
        {"messages",
         json::array({{{"role", "system"}, {"content", req.system_prompt}},
                      {{"role", "user"}, {"content", req.user_prompt}}})},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
        {"n", req.n_samples},
    };
    if (req.seed) body["seed"] = *req.seed;
    const auto t0 = clock_t_::now();
    json j = post_json(opts_, "/v1/chat/completions", body);
    ChatResponse resp;
    resp.latency_ms =
        std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count();
    resp.model_id = j.value("model", opts_.model);
    if (!j.contains("choices") || !j.at("choices").is_array())
        throw BackendError("response schema mismatch: no choices array");
    for (const auto &c : j.at("choices"))
        resp.texts.push_back(c.at("message").at("content").get<std::string>());
    if (resp.texts.size() != static_cast<std::size_t>(req.n_samples))
        throw BackendError("response schema mismatch: expected " +
                           std::to_string(req.n_samples) + " choices, got " +
                           std::to_string(resp.texts.size()));
    if (j.contains("usage") && j.at("usage").contains("total_tokens"))
        resp.total_tokens = j.at("usage").at("total_tokens").get<long>();
    return resp;
}

std::vector<EmbeddingVector> HttpBackend::embed(const std::vector<std::string> &texts) {
    if (texts.empty()) throw ValidationError("embed() requires a non-empty text list");
    json body = {{"model", opts_.model}, {"input", texts}};
    json j = post_json(opts_, "/v1/embeddings", body);
    if (!j.contains("data") || !j.at("data").is_array())
        throw BackendError("response schema mismatch: no data array");
    std::vector<EmbeddingVector> out;
    std::size_t dim = 0;
    for (const auto &d : j.at("data")) {
        EmbeddingVector v;
        v.values = d.at("embedding").get<std::vector<double>>();
        if (dim == 0) dim = v.values.size();
        if (v.values.size() != dim)
            throw BackendError("embedding dimension inconsistency within one response");
        out.push_back(std::move(v));
    }
    if (out.size() != texts.size())
        throw BackendError("response schema mismatch: embedding count");
    return out;
}

// ---------------------------------------------------------------- gateway

struct Gateway::Impl {
    Options opts;
    std::mutex mu;
    std::condition_variable cv;
    int inflight = 0;
    double bucket_tokens;
    clock_t_::time_point bucket_refill;

    explicit Impl(Options o) : opts(o), bucket_tokens(o.requests_per_sec) {
        bucket_refill = clock_t_::now();
    }

    void acquire() {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return inflight < opts.max_inflight; });
        ++inflight;
        if (opts.requests_per_sec > 0.0) {
            for (;;) {
                const auto now = clock_t_::now();
                const double dt = std::chrono::duration<double>(now - bucket_refill).count();
                bucket_tokens = std::min(opts.requests_per_sec,
                                         bucket_tokens + dt * opts.requests_per_sec);
                bucket_refill = now;
                if (bucket_tokens >= 1.0) {
                    bucket_tokens -= 1.0;
                    break;
                }
                lock.unlock();
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
                lock.lock();
            }
        }
    }

    void release() {
        {
            std::lock_guard lock(mu);
            --inflight;
        }
        cv.notify_one();
    }

    template <typename F>
    auto with_retries(F &&f) {
        acquire();
        struct Releaser {
            Impl *impl;
            ~Releaser() { impl->release(); }
        } releaser{this};
        int backoff = opts.backoff_initial_ms;
        for (int attempt = 0;; ++attempt) {
            try {
                return f();
            } catch (const TransportError &) {
                if (attempt >= opts.max_retries) throw;
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
        }
    }
};

Gateway::Gateway(std::shared_ptr<Backend> backend)
    : Gateway(std::move(backend), Options{}) {}

Gateway::Gateway(std::shared_ptr<Backend> backend, Options opts)
    : backend_(std::move(backend)), impl_(std::make_unique<Impl>(opts)) {
    if (!backend_) throw ValidationError("null backend");
    if (opts.max_inflight < 1) throw ValidationError("max_inflight must be >= 1");
}

Gateway::~Gateway() = default;

ChatResponse Gateway::chat(const ChatRequest &req) {
    if (req.temperature < 0.0) throw ValidationError("temperature must be >= 0");
    if (req.n_samples < 1) throw ValidationError("n_samples must be >= 1");
    return impl_->with_retries([&] { return backend_->chat(req); });
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string> &texts) {
    return impl_->with_retries([&] { return backend_->embed(texts); });
}

} // namespace misq::gateway
