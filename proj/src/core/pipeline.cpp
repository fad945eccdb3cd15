#include "pipeline.hpp"

#include <cctype>
#include <chrono>
#include <fstream>
#include <unordered_set>

#include "prompts.hpp"
#include "textmetrics.hpp"

namespace misq::pipeline {

using json = nlohmann::json;
using clock_t_ = std::chrono::steady_clock;

std::string verdict_to_string(Verdict v) {
    switch (v) {
        case Verdict::YES: return "YES";
        case Verdict::NO: return "NO";
        case Verdict::FAILED: return "FAILED";
    }
    return "?";
}

namespace {

Verdict verdict_from_string(const std::string &s) {
    if (s == "YES") return Verdict::YES;
    if (s == "NO") return Verdict::NO;
    if (s == "FAILED") return Verdict::FAILED;
    throw ValidationError("unknown verdict: " + s);
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

// Case-insensitive whole-word occurrence of `word` in `text`.
bool contains_word(const std::string &text, const std::string &word) {
    if (word.empty()) return false;
    for (std::size_t i = 0; i + word.size() <= text.size(); ++i) {
        bool match = true;
        for (std::size_t k = 0; k < word.size(); ++k) {
            if (std::toupper(static_cast<unsigned char>(text[i + k])) !=
                std::toupper(static_cast<unsigned char>(word[k]))) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        const bool left_ok = i == 0 || !is_word_char(static_cast<unsigned char>(text[i - 1]));
        const std::size_t after = i + word.size();
        const bool right_ok =
            after == text.size() || !is_word_char(static_cast<unsigned char>(text[after]));
        if (left_ok && right_ok) return true;
    }
    return false;
}

std::string trimmed(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n\"");
    return s.substr(b, e - b + 1);
}

} // namespace

DetectionVerdict parse_detection(const std::string &raw) {
    DetectionVerdict v;
    v.raw_text = raw;
    const bool has_yes = contains_word(raw, "YES");
    const bool has_no = contains_word(raw, "NO");
    if (has_yes == has_no) {
        v.label = Verdict::FAILED;
    } else {
        v.label = has_yes ? Verdict::YES : Verdict::NO;
    }
    return v;
}

DetectionVerdict detect(const std::string &question,
                        const std::optional<std::string> &knowledge,
                        gateway::Gateway &backend) {
    if (misq::text::tokenize(question).empty())
        throw ValidationError("detect: empty question");
    gateway::ChatRequest req;
    req.system_prompt = prompts::detection();
    req.user_prompt = prompts::format_fields(knowledge, question);
    req.temperature = 0.0;
    return parse_detection(backend.chat(req).texts.at(0));
}

std::string correct(const std::string &question, const std::optional<std::string> &knowledge,
                    gateway::Gateway &backend) {
    gateway::ChatRequest req;
    req.system_prompt = prompts::correction();
    req.user_prompt = prompts::format_fields(knowledge, question);
    req.temperature = 0.0;
    const std::string out = trimmed(backend.chat(req).texts.at(0));
    if (out.empty()) throw BackendError("correction backend returned empty output");
    return out;
}

std::string answer(const std::string &question, const std::optional<std::string> &knowledge,
                   gateway::Gateway &backend,
                   const std::optional<std::vector<std::string>> &choices) {
    if (misq::text::tokenize(question).empty())
        throw ValidationError("answer: empty question");
    gateway::ChatRequest req;
    req.system_prompt = prompts::answering();
    req.user_prompt = prompts::format_fields(knowledge, question, choices);
    req.temperature = 0.0;
    return backend.chat(req).texts.at(0);
}

json PipelineTrace::to_json(bool with_timings) const {
    json j;
    j["record_id"] = record_id;
    if (verdict) {
        j["verdict"] = {{"label", verdict_to_string(verdict->label)},
                        {"raw", verdict->raw_text}};
    }
    if (corrected_question) j["corrected_question"] = *corrected_question;
    j["final_answer"] = final_answer;
    json raw = json::object();
    if (detect_raw) raw["detect"] = *detect_raw;
    if (correct_raw) raw["correct"] = *correct_raw;
    if (answer_raw) raw["answer"] = *answer_raw;
    j["stage_raw"] = raw;
    if (error) j["error"] = *error;
    if (with_timings) {
        j["timings_ms"] = {{"detect", detect_ms}, {"correct", correct_ms}, {"answer", answer_ms}};
    }
    return j;
}

PipelineTrace PipelineTrace::from_json(const json &j) {
    PipelineTrace t;
    t.record_id = j.at("record_id").get<std::string>();
    if (j.contains("verdict")) {
        DetectionVerdict v;
        v.label = verdict_from_string(j.at("verdict").at("label").get<std::string>());
        v.raw_text = j.at("verdict").at("raw").get<std::string>();
        t.verdict = v;
    }
    if (j.contains("corrected_question"))
        t.corrected_question = j.at("corrected_question").get<std::string>();
    t.final_answer = j.at("final_answer").get<std::string>();
    const auto &raw = j.value("stage_raw", json::object());
    if (raw.contains("detect")) t.detect_raw = raw.at("detect").get<std::string>();
    if (raw.contains("correct")) t.correct_raw = raw.at("correct").get<std::string>();
    if (raw.contains("answer")) t.answer_raw = raw.at("answer").get<std::string>();
    if (j.contains("error")) t.error = j.at("error").get<std::string>();
    return t;
}

namespace {

PipelineTrace trace_one(const data::QARecord &rec, gateway::Gateway &backend, Mode mode) {
    PipelineTrace t;
    t.record_id = rec.id;
    std::string question = rec.question;
    try {
        if (mode == Mode::full) {
            auto t0 = clock_t_::now();
            t.verdict = detect(rec.question, rec.knowledge, backend);
            t.detect_ms =
                std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count();
            t.detect_raw = t.verdict->raw_text;
            if (t.verdict->label == Verdict::YES) {
                t0 = clock_t_::now();
                t.corrected_question = correct(rec.question, rec.knowledge, backend);
                t.correct_ms =
                    std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count();
                t.correct_raw = t.corrected_question;
                question = *t.corrected_question;
            }
        }
        const auto t0 = clock_t_::now();
        t.final_answer = answer(question, rec.knowledge, backend, rec.choices);
        t.answer_ms = std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count();
        t.answer_raw = t.final_answer;
    } catch (const std::exception &e) {
        t.error = e.what();
    }
    return t;
}

} // namespace

std::vector<PipelineTrace> run_pipeline(const std::vector<data::QARecord> &records,
                                        gateway::Gateway &backend, const RunOptions &opts) {
    std::unordered_set<std::string> done;
    std::vector<PipelineTrace> traces;
    std::ofstream ckpt;
    if (!opts.checkpoint_path.empty()) {
        std::ifstream existing(opts.checkpoint_path);
        if (existing) {
            for (const auto &t : load_traces(opts.checkpoint_path)) {
                done.insert(t.record_id);
                traces.push_back(t);
            }
        }
        ckpt.open(opts.checkpoint_path, std::ios::app);
        if (!ckpt) throw IoError("cannot append traces to: " + opts.checkpoint_path);
    }
    for (const auto &rec : records) {
        if (done.count(rec.id)) continue;
        auto t = trace_one(rec, backend, opts.mode);
        if (ckpt.is_open()) {
            ckpt << t.to_json(opts.record_timings).dump() << "\n";
            ckpt.flush();
        }
        traces.push_back(std::move(t));
    }
    return traces;
}

void save_traces(const std::vector<PipelineTrace> &traces, const std::string &path,
                 bool with_timings) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write traces: " + path);
    for (const auto &t : traces) out << t.to_json(with_timings).dump() << "\n";
}

std::vector<PipelineTrace> load_traces(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open traces: " + path);
    std::vector<PipelineTrace> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(PipelineTrace::from_json(json::parse(line)));
        } catch (const std::exception &e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace misq::pipeline
