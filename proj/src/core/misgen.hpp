#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "data.hpp"
#include "gateway.hpp"

namespace misq::misgen {

enum class JudgeMode { containment, llm_judge };

struct GenConfig {
    int k_candidates = 3;
    int n_probes = 3;
    double r_sim = 0.8;
    double r_error = 0.5;
    JudgeMode judge_mode = JudgeMode::containment;
    int retry_cap = 3;
    double probe_temperature = 0.7;
    std::optional<long> seed;

    void validate() const;
};

struct ProbeAnswer {
    std::string response;
    bool judged_correct = false;
};

struct MisCandidate {
    std::string text;
    double s_sim = 0.0;
    double e_error = 0.0;
    std::vector<ProbeAnswer> probe_answers;
    bool passed = false;
};

// Why a record produced no MisRecord.
struct Rejection {
    std::string id;
    std::string reason;
    std::vector<MisCandidate> candidates;
};

struct BuildResult {
    std::vector<data::MisRecord> records;
    std::vector<Rejection> rejections;
};

// One chat call with n = k_candidates, prompt per dataset kind. Candidates
// equal to the source question trigger regeneration up to the retry cap.
std::vector<std::string> generate_candidates(const data::QARecord &record,
                                             data::DatasetKind kind, const GenConfig &config,
                                             gateway::Gateway &generator);

// n_probes answer attempts against the candidate question; each judged by
// containment matching or an LLM judge. Returns N_error / N and transcripts.
std::pair<double, std::vector<ProbeAnswer>> estimate_error_rate(const std::string &candidate,
                                                                const data::QARecord &record,
                                                                const GenConfig &config,
                                                                gateway::Gateway &answerer);

MisCandidate score_candidate(const std::string &text, const data::QARecord &record,
                             const GenConfig &config, gateway::Gateway &answerer);

// Among passing candidates, the one maximizing s_sim + e_error; ties go to
// the earliest in generation order. nullopt when none pass.
std::optional<std::size_t> select_candidate(const std::vector<MisCandidate> &candidates,
                                            const GenConfig &config);

// Full dataset construction with per-record checkpointing. Rerunning with the
// same checkpoint path skips already-processed records.
BuildResult build_mis_dataset(const std::vector<data::QARecord> &source, data::DatasetKind kind,
                              const GenConfig &config, gateway::Gateway &generator,
                              gateway::Gateway &answerer,
                              const std::string &checkpoint_path = "");

void write_rejection_report(const std::vector<Rejection> &rejections, const std::string &path);

} // namespace misq::misgen
