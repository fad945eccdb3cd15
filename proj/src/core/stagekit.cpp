#include "stagekit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "prompts.hpp"

namespace misq::stagekit {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string stage_to_string(Stage s) {
    switch (s) {
        case Stage::detect: return "detect";
        case Stage::correct: return "correct";
        case Stage::answer: return "answer";
    }
    return "?";
}

Stage stage_from_string(const std::string &s) {
    if (s == "detect") return Stage::detect;
    if (s == "correct") return Stage::correct;
    if (s == "answer") return Stage::answer;
    throw ValidationError("unknown stage: " + s);
}

void StageExample::validate() const {
    if (stage == Stage::detect) {
        if (!with_misleading || (target != "YES" && target != "NO"))
            throw ValidationError("detect example needs with_misleading and YES/NO target");
        if (*with_misleading != target)
            throw ValidationError("detect example with_misleading disagrees with target");
    } else if (with_misleading) {
        throw ValidationError(stage_to_string(stage) + " example must not set with_misleading");
    }
    if (input.empty()) throw ValidationError("empty example input");
    if (target.empty()) throw ValidationError("empty example target");
}

namespace {

std::unordered_map<std::string, const data::QARecord *> index_by_id(
    const std::vector<data::QARecord> &records) {
    std::unordered_map<std::string, const data::QARecord *> idx;
    for (const auto &r : records) idx[r.id] = &r;
    return idx;
}

} // namespace

std::vector<StageExample> build_detection_set(const std::vector<data::QARecord> &clean,
                                              const std::vector<data::MisRecord> &mis) {
    const auto idx = index_by_id(clean);
    std::unordered_set<std::string> mis_seen;
    for (const auto &m : mis) {
        if (!idx.count(m.id))
            throw ValidationError("mis record id \"" + m.id + "\" has no clean counterpart");
        if (!mis_seen.insert(m.id).second)
            throw ValidationError("duplicate mis id \"" + m.id + "\"");
    }
    std::vector<StageExample> out;
    out.reserve(clean.size() + mis.size());
    for (const auto &r : clean) {
        StageExample e;
        e.stage = Stage::detect;
        e.system_prompt = prompts::detection();
        e.input = prompts::format_fields(r.knowledge, r.question);
        e.target = "NO";
        e.with_misleading = "NO";
        out.push_back(std::move(e));
    }
    for (const auto &m : mis) {
        const auto &src = *idx.at(m.id);
        StageExample e;
        e.stage = Stage::detect;
        e.system_prompt = prompts::detection();
        e.input = prompts::format_fields(src.knowledge, m.misleading_question);
        e.target = "YES";
        e.with_misleading = "YES";
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<StageExample> build_correction_set(const std::vector<data::MisRecord> &mis,
                                               const std::vector<data::QARecord> &clean) {
    const auto idx = index_by_id(clean);
    std::unordered_set<std::string> seen;
    std::vector<StageExample> out;
    out.reserve(mis.size());
    for (const auto &m : mis) {
        auto it = idx.find(m.id);
        if (it == idx.end())
            throw ValidationError("mis record id \"" + m.id + "\" has no clean counterpart");
        if (!seen.insert(m.id).second)
            throw ValidationError("duplicate mis id \"" + m.id + "\"");
        StageExample e;
        e.stage = Stage::correct;
        e.system_prompt = prompts::correction();
        e.input = prompts::format_fields(it->second->knowledge, m.misleading_question);
        e.target = it->second->question;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<StageExample> build_answer_set(
    const std::vector<data::QARecord> &clean,
    const std::map<std::string, std::string> &corrected_inputs) {
    std::vector<StageExample> out;
    out.reserve(clean.size());
    for (const auto &r : clean) {
        auto it = corrected_inputs.find(r.id);
        const std::string &question = it != corrected_inputs.end() ? it->second : r.question;
        StageExample e;
        e.stage = Stage::answer;
        e.system_prompt = prompts::answering();
        e.input = prompts::format_fields(r.knowledge, question, r.choices);
        e.target = r.right_answer;
        out.push_back(std::move(e));
    }
    return out;
}

double detection_loss(const DetectionBatch &batch) {
    if (batch.y_true.size() != batch.y_pred.size())
        throw ValidationError("detection batch length mismatch");
    if (batch.y_true.empty()) throw ValidationError("empty detection batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.y_true.size(); ++i) {
        const int y = batch.y_true[i];
        if (y != 0 && y != 1) throw ValidationError("y_true entries must be 0 or 1");
        const double p = std::clamp(batch.y_pred[i], kLogEps, 1.0 - kLogEps);
        sum += y * std::log(p) + (1 - y) * std::log(1.0 - p);
    }
    return -sum / static_cast<double>(batch.y_true.size());
}

double correction_loss(const EmbeddingPairBatch &batch) {
    if (batch.u.size() != batch.v.size())
        throw ValidationError("embedding pair batch count mismatch");
    if (batch.u.empty()) throw ValidationError("empty embedding pair batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.u.size(); ++i) {
        sum += 1.0 - gateway::cosine(batch.u[i], batch.v[i]);
    }
    return sum / static_cast<double>(batch.u.size());
}

double generation_loss(const TokenProbBatch &batch) {
    if (batch.sequences.empty()) throw ValidationError("empty token probability batch");
    double sum = 0.0;
    for (const auto &seq : batch.sequences) {
        if (seq.empty()) throw ValidationError("empty sequence in token probability batch");
        double seq_sum = 0.0;
        for (double p : seq) {
            if (p <= 0.0 || p > 1.0)
                throw ValidationError("token probability outside (0,1]");
            seq_sum += std::log(p);
        }
        sum += seq_sum / static_cast<double>(seq.size());
    }
    return -sum / static_cast<double>(batch.sequences.size());
}

namespace {

json example_to_json(const StageExample &e) {
    json j = {{"stage", stage_to_string(e.stage)},
              {"system", e.system_prompt},
              {"input", e.input},
              {"target", e.target}};
    if (e.with_misleading) j["with_misleading"] = *e.with_misleading;
    return j;
}

StageExample example_from_json(const json &j) {
    StageExample e;
    e.stage = stage_from_string(j.at("stage").get<std::string>());
    e.system_prompt = j.at("system").get<std::string>();
    e.input = j.at("input").get<std::string>();
    e.target = j.at("target").get<std::string>();
    if (j.contains("with_misleading"))
        e.with_misleading = j.at("with_misleading").get<std::string>();
    e.validate();
    return e;
}

} // namespace

StageManifest export_stage_datasets(const std::vector<StageExample> &examples,
                                    const std::string &out_dir) {
    for (const auto &e : examples) e.validate();
    fs::create_directories(out_dir);
    std::ofstream detect(fs::path(out_dir) / "detect.jsonl");
    std::ofstream correct(fs::path(out_dir) / "correct.jsonl");
    std::ofstream answer(fs::path(out_dir) / "answer.jsonl");
    if (!detect || !correct || !answer)
        throw IoError("cannot write stage files under: " + out_dir);
    StageManifest m;
    for (const auto &e : examples) {
        const std::string line = example_to_json(e).dump();
        switch (e.stage) {
            case Stage::detect:
                detect << line << "\n";
                ++m.detect_count;
                break;
            case Stage::correct:
                correct << line << "\n";
                ++m.correct_count;
                break;
            case Stage::answer:
                answer << line << "\n";
                ++m.answer_count;
                break;
        }
    }
    std::ofstream manifest(fs::path(out_dir) / "manifest.json");
    manifest << json{{"detect", m.detect_count},
                     {"correct", m.correct_count},
                     {"answer", m.answer_count}}
                    .dump(2)
             << "\n";
    if (!manifest) throw IoError("cannot write manifest under: " + out_dir);
    return m;
}

std::vector<StageExample> load_stage_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stage file: " + path);
    std::vector<StageExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(example_from_json(json::parse(line)));
        } catch (const std::exception &e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace misq::stagekit
