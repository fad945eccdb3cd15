#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "data.hpp"
#include "gateway.hpp"
#include "pipeline.hpp"

namespace misq::evalh {

struct EvalReport {
    std::string dataset;
    std::string metric;
    std::vector<double> per_run;
    double mean = 0.0;
    double std_dev = 0.0;
    std::size_t n_items = 0;

    nlohmann::json to_json() const;
};

struct AuditResult {
    std::vector<std::string> flagged_ids;
    double proportion = 0.0;
    std::size_t total = 0;
    bool complete = true;
};

// Fraction of verdicts matching gold; FAILED always counts as incorrect.
double detection_accuracy(const std::vector<pipeline::DetectionVerdict> &verdicts,
                          const std::vector<pipeline::Verdict> &golds);

// Free-form records: containment match of the gold answer. Choice records:
// correct iff exactly one choice occurs in the answer and it is the gold one.
double qa_accuracy(const std::vector<pipeline::PipelineTrace> &traces,
                   const std::vector<data::QARecord> &records);

// Scorer over (candidate, reference) used for TruthfulQA-style scoring; max
// over the per-item reference set.
using PairScorer = std::function<double(const std::string &, const std::string &)>;

double mean_max_score(const std::vector<std::string> &answers,
                      const std::vector<std::vector<std::string>> &references,
                      const PairScorer &scorer);

std::pair<EvalReport, EvalReport> truthfulqa_scores(
    const std::vector<std::string> &answers,
    const std::vector<std::vector<std::string>> &references);

// Percentage of raw detection outputs that parse as FAILED.
double failure_rate(const std::vector<std::string> &raw_outputs);

// Arithmetic mean and sample (n-1) standard deviation; std 0 when n == 1.
std::pair<double, double> aggregate_runs(const std::vector<double> &per_run);

// Runs the detector over every record; flagged ids are those with verdict YES.
AuditResult audit_dataset(const std::vector<data::QARecord> &records,
                          gateway::Gateway &detector);

std::vector<data::QARecord> remove_flagged(const std::vector<data::QARecord> &records,
                                           const std::vector<std::string> &flagged_ids);

// Side-by-side accuracy on the original set vs a clean subset of it.
std::pair<EvalReport, EvalReport> compare_on_subsets(
    const std::vector<pipeline::PipelineTrace> &traces_original,
    const std::vector<pipeline::PipelineTrace> &traces_subset,
    const std::vector<data::QARecord> &records);

// External scorer hook: invokes `command` once, feeding tab-separated
// (candidate, reference) pairs on its stdin, and reads one score per line
// from its stdout. Used for BLEURT-style learned metrics.
std::vector<double> external_scores(const std::string &command,
                                    const std::vector<std::pair<std::string, std::string>> &pairs);

void save_reports(const std::vector<EvalReport> &reports, const std::string &path);

} // namespace misq::evalh
