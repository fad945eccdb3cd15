#pragma once

#include <optional>
#include <string>
#include <vector>

#include "data.hpp"
#include "gateway.hpp"

namespace misq::pipeline {

enum class Verdict { YES, NO, FAILED };

std::string verdict_to_string(Verdict v);

struct DetectionVerdict {
    Verdict label = Verdict::FAILED;
    std::string raw_text;
};

enum class Mode { full, answer_only };

struct PipelineTrace {
    std::string record_id;
    std::optional<DetectionVerdict> verdict; // absent in answer_only mode
    std::optional<std::string> corrected_question;
    std::string final_answer;
    std::optional<std::string> detect_raw;
    std::optional<std::string> correct_raw;
    std::optional<std::string> answer_raw;
    std::optional<std::string> error; // per-record failure, trace still emitted
    double detect_ms = 0.0, correct_ms = 0.0, answer_ms = 0.0;

    nlohmann::json to_json(bool with_timings) const;
    static PipelineTrace from_json(const nlohmann::json &j);
};

// Case-insensitive whole-word scan: exactly one of YES/NO present -> that
// label; neither or both -> FAILED.
DetectionVerdict parse_detection(const std::string &raw);

DetectionVerdict detect(const std::string &question,
                        const std::optional<std::string> &knowledge,
                        gateway::Gateway &backend);

std::string correct(const std::string &question, const std::optional<std::string> &knowledge,
                    gateway::Gateway &backend);

std::string answer(const std::string &question, const std::optional<std::string> &knowledge,
                   gateway::Gateway &backend,
                   const std::optional<std::vector<std::string>> &choices = std::nullopt);

struct RunOptions {
    Mode mode = Mode::full;
    bool record_timings = false;
    std::string checkpoint_path; // reuse an existing trace file as checkpoint
};

// detect -> (correct iff YES) -> answer. FAILED verdicts fall through to
// answering the original question. One trace per record, always.
std::vector<PipelineTrace> run_pipeline(const std::vector<data::QARecord> &records,
                                        gateway::Gateway &backend, const RunOptions &opts);

void save_traces(const std::vector<PipelineTrace> &traces, const std::string &path,
                 bool with_timings = false);
std::vector<PipelineTrace> load_traces(const std::string &path);

} // namespace misq::pipeline
