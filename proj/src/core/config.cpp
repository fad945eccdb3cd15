#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace misq::config {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

BackendSpec spec_from_json(const json &j) {
    BackendSpec s;
    s.type = j.value("type", std::string("mock"));
    if (s.type != "mock" && s.type != "http")
        throw ValidationError("backend type must be \"mock\" or \"http\"");
    s.script = j.value("script", std::string{});
    s.endpoint = j.value("endpoint", std::string{});
    s.model = j.value("model", std::string{});
    s.api_key_env = j.value("api_key_env", std::string{});
    s.max_inflight = j.value("max_inflight", 4);
    s.requests_per_sec = j.value("requests_per_sec", 0.0);
    s.max_retries = j.value("max_retries", 3);
    if (s.type == "mock" && s.script.empty())
        throw ValidationError("mock backend needs a \"script\" path");
    if (s.type == "http" && s.endpoint.empty())
        throw ValidationError("http backend needs an \"endpoint\"");
    return s;
}

json spec_to_json(const BackendSpec &s) {
    return {{"type", s.type},
            {"script", s.script},
            {"endpoint", s.endpoint},
            {"model", s.model},
            {"api_key_env", s.api_key_env},
            {"max_inflight", s.max_inflight},
            {"requests_per_sec", s.requests_per_sec},
            {"max_retries", s.max_retries}};
}

} // namespace

RunConfig RunConfig::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    RunConfig c;
    c.seed = j.value("seed", 0L);
    c.concurrency = j.value("concurrency", 4);
    c.record_timings = j.value("record_timings", false);
    if (j.contains("gen")) {
        const auto &g = j.at("gen");
        c.gen.k_candidates = g.value("k_candidates", 3);
        c.gen.n_probes = g.value("n_probes", 3);
        c.gen.r_sim = g.value("r_sim", 0.8);
        c.gen.r_error = g.value("r_error", 0.5);
        c.gen.retry_cap = g.value("retry_cap", 3);
        c.gen.probe_temperature = g.value("probe_temperature", 0.7);
        const std::string jm = g.value("judge_mode", std::string("containment"));
        if (jm == "containment") {
            c.gen.judge_mode = misgen::JudgeMode::containment;
        } else if (jm == "llm_judge") {
            c.gen.judge_mode = misgen::JudgeMode::llm_judge;
        } else {
            throw ValidationError("judge_mode must be containment or llm_judge");
        }
    }
    c.gen.seed = c.seed;
    c.gen.validate();
    const json backends = j.value("backends", json::object());
    for (auto it = backends.begin(); it != backends.end(); ++it) {
        c.backends[it.key()] = spec_from_json(it.value());
    }
    return c;
}

json RunConfig::to_json() const {
    json backends_json = json::object();
    for (const auto &[role, s] : backends) backends_json[role] = spec_to_json(s);
    return {{"seed", seed},
            {"concurrency", concurrency},
            {"record_timings", record_timings},
            {"gen",
             {{"k_candidates", gen.k_candidates},
              {"n_probes", gen.n_probes},
              {"r_sim", gen.r_sim},
              {"r_error", gen.r_error},
              {"retry_cap", gen.retry_cap},
              {"probe_temperature", gen.probe_temperature},
              {"judge_mode",
               gen.judge_mode == misgen::JudgeMode::containment ? "containment"
                                                                : "llm_judge"}}},
            {"backends", backends_json}};
}

gateway::GatewayPtr RunConfig::make_gateway(const std::string &role,
                                            const std::string &base_dir) const {
    auto it = backends.find(role);
    if (it == backends.end()) it = backends.find("default");
    if (it == backends.end())
        throw ValidationError("no backend configured for role \"" + role + "\"");
    const BackendSpec &s = it->second;

    std::shared_ptr<gateway::Backend> backend;
    if (s.type == "mock") {
        fs::path script = s.script;
        if (script.is_relative() && !base_dir.empty()) script = fs::path(base_dir) / script;
        backend = gateway::MockBackend::from_script_file(script.string());
    } else {
        gateway::HttpBackend::Options opts;
        opts.endpoint = s.endpoint;
        opts.model = s.model;
        if (!s.api_key_env.empty()) {
            const char *key = std::getenv(s.api_key_env.c_str());
            if (!key)
                throw ValidationError("environment variable " + s.api_key_env + " not set");
            opts.api_key = key;
        }
        backend = std::make_shared<gateway::HttpBackend>(opts);
    }
    gateway::Gateway::Options gopts;
    gopts.max_inflight = std::min(s.max_inflight, concurrency);
    if (gopts.max_inflight < 1) gopts.max_inflight = 1;
    gopts.requests_per_sec = s.requests_per_sec;
    gopts.max_retries = s.max_retries;
    return std::make_shared<gateway::Gateway>(std::move(backend), gopts);
}

} // namespace misq::config
