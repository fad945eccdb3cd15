#pragma once

#include <map>
#include <string>

#include "gateway.hpp"
#include "misgen.hpp"

namespace misq::config {

struct BackendSpec {
    std::string type = "mock"; // "mock" or "http"
    std::string script;       // mock: path to the rule script
    std::string endpoint;     // http
    std::string model;
    std::string api_key_env;  // credential comes from the environment only
    int max_inflight = 4;
    double requests_per_sec = 0.0;
    int max_retries = 3;
};

struct RunConfig {
    long seed = 0;
    int concurrency = 4;
    bool record_timings = false;
    misgen::GenConfig gen;
    std::map<std::string, BackendSpec> backends; // generator/answerer/detector/embedder

    static RunConfig load(const std::string &path);
    nlohmann::json to_json() const;

    // Builds the gateway for a named role; roles missing from the config
    // fall back to the "default" entry when present.
    gateway::GatewayPtr make_gateway(const std::string &role,
                                     const std::string &base_dir = "") const;
};

} // namespace misq::config
