#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace misq::gateway {

struct ChatRequest {
    std::string system_prompt;
    std::string user_prompt;
    double temperature = 0.7;
    int max_tokens = 512;
    int n_samples = 1;
    std::optional<long> seed;
};

struct ChatResponse {
    std::vector<std::string> texts;
    std::string model_id;
    double latency_ms = 0.0;
    std::optional<long> total_tokens;
};

struct EmbeddingVector {
    std::vector<double> values;
};

double cosine(const EmbeddingVector &a, const EmbeddingVector &b);

// Retryable transport failure; auth and schema errors are plain BackendError.
class TransportError : public BackendError {
  public:
    explicit TransportError(const std::string &msg) : BackendError(msg) {}
};

class Backend {
  public:
    virtual ~Backend() = default;
    virtual ChatResponse chat(const ChatRequest &req) = 0;
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string> &texts) = 0;
    virtual std::string name() const = 0;
};

// Deterministic offline backend. Rules map prompt substrings (all must
// occur in system + user prompt) to a response list consumed round-robin.
// Embeddings are hashed bag-of-words vectors, so identical strings embed
// identically and disjoint vocabularies are orthogonal.
class MockBackend : public Backend {
  public:
    struct Rule {
        std::vector<std::string> match; // all substrings must be present
        std::vector<std::string> responses;
        std::size_t next = 0;
    };

    MockBackend() = default;
    explicit MockBackend(std::vector<Rule> rules, std::string fallback = "",
                         std::size_t embed_dim = 512);

    static std::shared_ptr<MockBackend> from_script_file(const std::string &path);
    static std::shared_ptr<MockBackend> from_script_json(const nlohmann::json &script);

    ChatResponse chat(const ChatRequest &req) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string> &texts) override;
    std::string name() const override { return "mock"; }

    std::size_t chat_calls() const;
    std::size_t embed_calls() const;

  private:
    std::vector<Rule> rules_;
    std::string fallback_;
    std::size_t embed_dim_ = 512;
    std::size_t chat_calls_ = 0;
    std::size_t embed_calls_ = 0;
    mutable std::mutex mu_;
};

// OpenAI-style HTTP chat-completion / embedding client.
class HttpBackend : public Backend {
  public:
    struct Options {
        std::string endpoint;  // e.g. http://host:port
        std::string model;
        std::string api_key;   // empty -> no Authorization header
        int timeout_sec = 120;
    };

    explicit HttpBackend(Options opts) : opts_(std::move(opts)) {}

    ChatResponse chat(const ChatRequest &req) override;
    std::vector<EmbeddingVector> embed(const std::vector<std::string> &texts) override;
    std::string name() const override { return "http:" + opts_.model; }

  private:
    Options opts_;
};

// Policy wrapper around a raw backend: bounded in-flight calls, token-bucket
// rate limiting, exponential-backoff retries on transport failures.
class Gateway {
  public:
    struct Options {
        int max_inflight = 4;
        double requests_per_sec = 0.0; // <= 0 disables rate limiting
        int max_retries = 3;
        int backoff_initial_ms = 100;
    };

    explicit Gateway(std::shared_ptr<Backend> backend);
    Gateway(std::shared_ptr<Backend> backend, Options opts);
    ~Gateway();

    ChatResponse chat(const ChatRequest &req);
    std::vector<EmbeddingVector> embed(const std::vector<std::string> &texts);
    Backend &backend() { return *backend_; }

  private:
    struct Impl;
    std::shared_ptr<Backend> backend_;
    std::unique_ptr<Impl> impl_;
};

using GatewayPtr = std::shared_ptr<Gateway>;

} // namespace misq::gateway
