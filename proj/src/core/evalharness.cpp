#include "evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unistd.h>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "prompts.hpp"
#include "textmetrics.hpp"

namespace misq::evalh {

using json = nlohmann::json;

json EvalReport::to_json() const {
    return {{"dataset", dataset}, {"metric", metric},   {"per_run", per_run},
            {"mean", mean},       {"std", std_dev},     {"n_items", n_items}};
}

double detection_accuracy(const std::vector<pipeline::DetectionVerdict> &verdicts,
                          const std::vector<pipeline::Verdict> &golds) {
    if (verdicts.size() != golds.size())
        throw ValidationError("detection_accuracy: length mismatch");
    if (verdicts.empty()) throw ValidationError("detection_accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i].label != pipeline::Verdict::FAILED && verdicts[i].label == golds[i])
            ++correct;
    }
    return static_cast<double>(correct) / verdicts.size();
}

namespace {

bool judge_choice_answer(const std::string &answer, const data::QARecord &rec) {
    std::size_t hits = 0;
    bool gold_hit = false;
    for (const auto &choice : *rec.choices) {
        if (misq::text::answer_matches(answer, choice)) {
            ++hits;
            if (choice == rec.right_answer) gold_hit = true;
        }
    }
    return hits == 1 && gold_hit;
}

} // namespace

double qa_accuracy(const std::vector<pipeline::PipelineTrace> &traces,
                   const std::vector<data::QARecord> &records) {
    std::unordered_map<std::string, const data::QARecord *> idx;
    for (const auto &r : records) idx[r.id] = &r;
    if (traces.empty()) throw ValidationError("qa_accuracy: empty trace list");
    std::size_t correct = 0;
    for (const auto &t : traces) {
        auto it = idx.find(t.record_id);
        if (it == idx.end())
            throw ValidationError("qa_accuracy: trace id \"" + t.record_id +
                                  "\" not in dataset");
        const auto &rec = *it->second;
        if (t.error) continue; // failed records score as incorrect
        if (rec.choices) {
            if (judge_choice_answer(t.final_answer, rec)) ++correct;
        } else if (misq::text::answer_matches(t.final_answer, rec.right_answer)) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / traces.size();
}

double mean_max_score(const std::vector<std::string> &answers,
                      const std::vector<std::vector<std::string>> &references,
                      const PairScorer &scorer) {
    if (answers.size() != references.size())
        throw ValidationError("mean_max_score: length mismatch");
    if (answers.empty()) throw ValidationError("mean_max_score: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (references[i].empty())
            throw ValidationError("mean_max_score: item " + std::to_string(i) +
                                  " has no references");
        double best = 0.0;
        for (const auto &ref : references[i])
            best = std::max(best, scorer(answers[i], ref));
        sum += best;
    }
    return sum / answers.size();
}

std::pair<EvalReport, EvalReport> truthfulqa_scores(
    const std::vector<std::string> &answers,
    const std::vector<std::vector<std::string>> &references) {
    EvalReport bleu_r, rouge_r;
    bleu_r.dataset = rouge_r.dataset = "truthfulqa";
    bleu_r.metric = "bleu";
    rouge_r.metric = "rouge_l";
    bleu_r.n_items = rouge_r.n_items = answers.size();
    bleu_r.per_run = {mean_max_score(answers, references, misq::text::bleu)};
    rouge_r.per_run = {mean_max_score(answers, references, misq::text::rouge_l)};
    std::tie(bleu_r.mean, bleu_r.std_dev) = aggregate_runs(bleu_r.per_run);
    std::tie(rouge_r.mean, rouge_r.std_dev) = aggregate_runs(rouge_r.per_run);
    return {bleu_r, rouge_r};
}

double failure_rate(const std::vector<std::string> &raw_outputs) {
    if (raw_outputs.empty()) throw ValidationError("failure_rate: empty input");
    std::size_t failed = 0;
    for (const auto &raw : raw_outputs) {
        if (pipeline::parse_detection(raw).label == pipeline::Verdict::FAILED) ++failed;
    }
    return 100.0 * static_cast<double>(failed) / raw_outputs.size();
}

std::pair<double, double> aggregate_runs(const std::vector<double> &per_run) {
    if (per_run.empty()) throw ValidationError("aggregate_runs: empty input");
    double mean = 0.0;
    for (double x : per_run) mean += x;
    mean /= per_run.size();
    if (per_run.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : per_run) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (per_run.size() - 1))};
}

AuditResult audit_dataset(const std::vector<data::QARecord> &records,
                          gateway::Gateway &detector) {
    AuditResult res;
    res.total = records.size();
    for (const auto &rec : records) {
        try {
            const auto v = pipeline::detect(rec.question, rec.knowledge, detector);
            if (v.label == pipeline::Verdict::YES) res.flagged_ids.push_back(rec.id);
        } catch (const BackendError &) {
            res.complete = false;
            break;
        }
    }
    res.proportion = records.empty()
                         ? 0.0
                         : static_cast<double>(res.flagged_ids.size()) / records.size();
    return res;
}

std::vector<data::QARecord> remove_flagged(const std::vector<data::QARecord> &records,
                                           const std::vector<std::string> &flagged_ids) {
    std::unordered_set<std::string> flagged(flagged_ids.begin(), flagged_ids.end());
    std::vector<data::QARecord> out;
    for (const auto &r : records)
        if (!flagged.count(r.id)) out.push_back(r);
    return out;
}

std::pair<EvalReport, EvalReport> compare_on_subsets(
    const std::vector<pipeline::PipelineTrace> &traces_original,
    const std::vector<pipeline::PipelineTrace> &traces_subset,
    const std::vector<data::QARecord> &records) {
    std::unordered_set<std::string> original_ids;
    for (const auto &t : traces_original) original_ids.insert(t.record_id);
    for (const auto &t : traces_subset) {
        if (!original_ids.count(t.record_id))
            throw ValidationError("compare_on_subsets: subset id \"" + t.record_id +
                                  "\" not in original");
    }
    EvalReport orig, sub;
    orig.dataset = "original";
    sub.dataset = "subset";
    orig.metric = sub.metric = "accuracy";
    orig.n_items = traces_original.size();
    sub.n_items = traces_subset.size();
    orig.per_run = {qa_accuracy(traces_original, records)};
    sub.per_run = {qa_accuracy(traces_subset, records)};
    std::tie(orig.mean, orig.std_dev) = aggregate_runs(orig.per_run);
    std::tie(sub.mean, sub.std_dev) = aggregate_runs(sub.per_run);
    return {orig, sub};
}

std::vector<double> external_scores(
    const std::string &command,
    const std::vector<std::pair<std::string, std::string>> &pairs) {
    if (pairs.empty()) throw ValidationError("external_scores: empty pair list");
    auto escape = [](std::string s) {
        for (auto &c : s)
            if (c == '\t' || c == '\n') c = ' ';
        return s;
    };
    char in_path[] = "/tmp/misq_scorer_in_XXXXXX";
    char out_path[] = "/tmp/misq_scorer_out_XXXXXX";
    int in_fd = mkstemp(in_path);
    int out_fd = mkstemp(out_path);
    if (in_fd < 0 || out_fd < 0) throw IoError("cannot create scorer temp files");
    close(in_fd);
    close(out_fd);
    {
        std::ofstream in(in_path);
        for (const auto &[cand, ref] : pairs)
            in << escape(cand) << "\t" << escape(ref) << "\n";
    }
    const std::string full =
        command + " < " + in_path + " > " + std::string(out_path);
    const int rc = std::system(full.c_str());
    std::vector<double> scores;
    if (rc == 0) {
        std::ifstream out(out_path);
        double s;
        while (out >> s) scores.push_back(s);
    }
    std::remove(in_path);
    std::remove(out_path);
    if (rc != 0) throw BackendError("external scorer failed: " + command);
    if (scores.size() != pairs.size())
        throw BackendError("external scorer returned " + std::to_string(scores.size()) +
                           " scores for " + std::to_string(pairs.size()) + " pairs");
    return scores;
}

void save_reports(const std::vector<EvalReport> &reports, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path);
    for (const auto &r : reports) out << r.to_json().dump() << "\n";
}

} // namespace misq::evalh
