#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "data.hpp"
#include "gateway.hpp"

namespace misq::stagekit {

enum class Stage { detect, correct, answer };

std::string stage_to_string(Stage s);
Stage stage_from_string(const std::string &s);

struct StageExample {
    Stage stage = Stage::detect;
    std::string system_prompt;
    std::string input;
    std::string target;
    std::optional<std::string> with_misleading; // "YES"/"NO", detect stage only

    void validate() const;
};

struct DetectionBatch {
    std::vector<int> y_true;      // 0 or 1
    std::vector<double> y_pred;   // probabilities, clamped to [eps, 1-eps]
};

struct EmbeddingPairBatch {
    std::vector<gateway::EmbeddingVector> u; // correct-query embeddings
    std::vector<gateway::EmbeddingVector> v; // corrected-query embeddings
};

struct TokenProbBatch {
    std::vector<std::vector<double>> sequences; // per-token gold-label probabilities
};

struct StageManifest {
    std::size_t detect_count = 0;
    std::size_t correct_count = 0;
    std::size_t answer_count = 0;
};

// Stage dataset builders -----------------------------------------------

// One detect example per clean record (NO) and per mis record (YES).
std::vector<StageExample> build_detection_set(const std::vector<data::QARecord> &clean,
                                              const std::vector<data::MisRecord> &mis);

// One correct example per mis record; target is the original clean question.
std::vector<StageExample> build_correction_set(const std::vector<data::MisRecord> &mis,
                                               const std::vector<data::QARecord> &clean);

// One answer example per record; input uses the corrected question when the
// map provides one.
std::vector<StageExample> build_answer_set(
    const std::vector<data::QARecord> &clean,
    const std::map<std::string, std::string> &corrected_inputs = {});

// Reference losses ------------------------------------------------------

constexpr double kLogEps = 1e-12;

// Binary cross-entropy, natural log, mean over the batch.
double detection_loss(const DetectionBatch &batch);

// Mean cosine distance (1 - cos) between paired embeddings; range [0, 2].
double correction_loss(const EmbeddingPairBatch &batch);

// Mean over sequences of the per-token mean negative log probability.
double generation_loss(const TokenProbBatch &batch);

// Export ------------------------------------------------------------------

// Writes detect.jsonl / correct.jsonl / answer.jsonl plus manifest.json
// under out_dir. Returns per-stage counts.
StageManifest export_stage_datasets(const std::vector<StageExample> &examples,
                                    const std::string &out_dir);

std::vector<StageExample> load_stage_file(const std::string &path);

} // namespace misq::stagekit
