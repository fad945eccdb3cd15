#include "misgen.hpp"

#include <fstream>
#include <unordered_map>

#include "prompts.hpp"
#include "textmetrics.hpp"

namespace misq::misgen {

using json = nlohmann::json;

void GenConfig::validate() const {
    if (k_candidates < 1) throw ValidationError("k_candidates must be >= 1");
    if (n_probes < 1) throw ValidationError("n_probes must be >= 1");
    if (r_sim <= 0.0 || r_sim >= 1.0) throw ValidationError("r_sim must be in (0,1)");
    if (r_error <= 0.0 || r_error > 1.0) throw ValidationError("r_error must be in (0,1]");
}

namespace {

std::string trimmed(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n\"");
    return s.substr(b, e - b + 1);
}

bool judge_with_llm(const std::string &response, const data::QARecord &record,
                    const GenConfig &config, gateway::Gateway &answerer) {
    gateway::ChatRequest req;
    req.system_prompt =
        "You are a strict grader. I will give you a question, a gold answer and a "
        "candidate response. Output \"YES\" if the response conveys the gold answer, "
        "otherwise output \"NO\". Output nothing else.";
    req.user_prompt = "#question#: \"" + record.question + "\"\n\n#gold#: \"" +
                      record.right_answer + "\"\n\n#response#: \"" + response + "\"";
    req.temperature = 0.0;
    req.seed = config.seed;
    const auto resp = answerer.chat(req);
    return resp.texts.at(0).find("YES") != std::string::npos;
}

} // namespace

std::vector<std::string> generate_candidates(const data::QARecord &record,
                                             data::DatasetKind kind, const GenConfig &config,
                                             gateway::Gateway &generator) {
    config.validate();
    if (text::tokenize(record.question).empty())
        throw ValidationError("record " + record.id + ": empty question");
    const bool is_cqa = kind == data::DatasetKind::cqa;
    if (!is_cqa && !record.knowledge)
        throw ValidationError("record " + record.id + ": knowledge required for this kind");

    gateway::ChatRequest req;
    req.system_prompt = is_cqa ? prompts::mis_generation_cqa()
                               : prompts::mis_generation_halueval();
    req.user_prompt = is_cqa
                          ? prompts::format_fields(std::nullopt, record.question, record.choices)
                          : prompts::format_fields(record.knowledge, record.question);
    req.seed = config.seed;

    std::vector<std::string> out;
    for (int attempt = 0; attempt <= config.retry_cap; ++attempt) {
        req.n_samples = config.k_candidates - static_cast<int>(out.size());
        const auto resp = generator.chat(req);
        for (const auto &t : resp.texts) {
            const std::string cand = trimmed(t);
            if (cand.empty() || cand == record.question) continue;
            out.push_back(cand);
            if (out.size() == static_cast<std::size_t>(config.k_candidates)) return out;
        }
    }
    throw ValidationError("record " + record.id +
                          ": generator kept returning degenerate candidates (retry cap " +
                          std::to_string(config.retry_cap) + " exhausted)");
}

std::pair<double, std::vector<ProbeAnswer>> estimate_error_rate(const std::string &candidate,
                                                                const data::QARecord &record,
                                                                const GenConfig &config,
                                                                gateway::Gateway &answerer) {
    config.validate();
    gateway::ChatRequest req;
    req.system_prompt = prompts::answering();
    req.user_prompt = prompts::format_fields(record.knowledge, candidate, record.choices);
    req.temperature = config.probe_temperature;
    req.seed = config.seed;

    std::vector<ProbeAnswer> probes;
    int n_error = 0;
    for (int i = 0; i < config.n_probes; ++i) {
        const auto resp = answerer.chat(req);
        ProbeAnswer p;
        p.response = resp.texts.at(0);
        p.judged_correct = config.judge_mode == JudgeMode::containment
                               ? text::answer_matches(p.response, record.right_answer)
                               : judge_with_llm(p.response, record, config, answerer);
        if (!p.judged_correct) ++n_error;
        probes.push_back(std::move(p));
    }
    return {static_cast<double>(n_error) / config.n_probes, std::move(probes)};
}

MisCandidate score_candidate(const std::string &text, const data::QARecord &record,
                             const GenConfig &config, gateway::Gateway &answerer) {
    MisCandidate c;
    c.text = text;
    c.s_sim = text::sentence_similarity(record.question, text).value;
    auto [err, probes] = estimate_error_rate(text, record, config, answerer);
    c.e_error = err;
    c.probe_answers = std::move(probes);
    c.passed = c.s_sim > config.r_sim && c.e_error > config.r_error;
    return c;
}

std::optional<std::size_t> select_candidate(const std::vector<MisCandidate> &candidates,
                                            const GenConfig &) {
    if (candidates.empty()) throw ValidationError("select_candidate: empty candidate list");
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i].passed) continue;
        if (!best ||
            candidates[i].s_sim + candidates[i].e_error >
                candidates[*best].s_sim + candidates[*best].e_error) {
            best = i;
        }
    }
    return best;
}

namespace {

json candidate_to_json(const MisCandidate &c) {
    json probes = json::array();
    for (const auto &p : c.probe_answers)
        probes.push_back({{"response", p.response}, {"judged_correct", p.judged_correct}});
    return {{"text", c.text},
            {"s_sim", c.s_sim},
            {"e_error", c.e_error},
            {"passed", c.passed},
            {"probe_answers", probes}};
}

MisCandidate candidate_from_json(const json &j) {
    MisCandidate c;
    c.text = j.at("text").get<std::string>();
    c.s_sim = j.at("s_sim").get<double>();
    c.e_error = j.at("e_error").get<double>();
    c.passed = j.at("passed").get<bool>();
    for (const auto &p : j.value("probe_answers", json::array()))
        c.probe_answers.push_back(
            {p.at("response").get<std::string>(), p.at("judged_correct").get<bool>()});
    return c;
}

struct CheckpointEntry {
    bool ok = false;
    data::MisRecord record;
    Rejection rejection;
};

std::unordered_map<std::string, CheckpointEntry> read_checkpoint(const std::string &path) {
    std::unordered_map<std::string, CheckpointEntry> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error &e) {
            throw ValidationError("checkpoint " + path + ":" + std::to_string(lineno) +
                                  ": corrupt line: " + e.what());
        }
        CheckpointEntry e;
        e.ok = j.at("ok").get<bool>();
        const std::string id = j.at("id").get<std::string>();
        if (e.ok) {
            e.record = data::MisRecord::from_json(j.at("record"));
        } else {
            e.rejection.id = id;
            e.rejection.reason = j.at("reason").get<std::string>();
            for (const auto &c : j.value("candidates", json::array()))
                e.rejection.candidates.push_back(candidate_from_json(c));
        }
        out[id] = std::move(e);
    }
    return out;
}

void append_checkpoint(std::ofstream &out, const std::string &id, const CheckpointEntry &e) {
    json j;
    j["id"] = id;
    j["ok"] = e.ok;
    if (e.ok) {
        j["record"] = e.record.to_json();
    } else {
        j["reason"] = e.rejection.reason;
        json cands = json::array();
        for (const auto &c : e.rejection.candidates) cands.push_back(candidate_to_json(c));
        j["candidates"] = cands;
    }
    out << j.dump() << "\n";
    out.flush();
}

} // namespace

BuildResult build_mis_dataset(const std::vector<data::QARecord> &source, data::DatasetKind kind,
                              const GenConfig &config, gateway::Gateway &generator,
                              gateway::Gateway &answerer, const std::string &checkpoint_path) {
    config.validate();
    std::unordered_map<std::string, CheckpointEntry> done;
    std::ofstream ckpt;
    if (!checkpoint_path.empty()) {
        done = read_checkpoint(checkpoint_path);
        ckpt.open(checkpoint_path, std::ios::app);
        if (!ckpt) throw IoError("cannot open checkpoint for append: " + checkpoint_path);
    }

    for (const auto &rec : source) {
        if (done.count(rec.id)) continue;
        CheckpointEntry entry;
        try {
            const auto texts = generate_candidates(rec, kind, config, generator);
            std::vector<MisCandidate> cands;
            cands.reserve(texts.size());
            for (const auto &t : texts) cands.push_back(score_candidate(t, rec, config, answerer));
            const auto pick = select_candidate(cands, config);
            if (pick) {
                data::MisRecord m;
                m.id = rec.id;
                m.misleading_question = cands[*pick].text;
                m.source_question = rec.question;
                m.s_sim = cands[*pick].s_sim;
                m.e_error = cands[*pick].e_error;
                m.validate();
                entry.ok = true;
                entry.record = std::move(m);
            } else {
                entry.ok = false;
                entry.rejection = {rec.id, "no candidate passed the similarity/error thresholds",
                                   std::move(cands)};
            }
        } catch (const ValidationError &e) {
            entry.ok = false;
            entry.rejection = {rec.id, e.what(), {}};
        }
        if (ckpt.is_open()) append_checkpoint(ckpt, rec.id, entry);
        done[rec.id] = std::move(entry);
    }

    BuildResult result;
    for (const auto &rec : source) {
        auto it = done.find(rec.id);
        if (it == done.end()) continue;
        if (it->second.ok) {
            result.records.push_back(it->second.record);
        } else {
            result.rejections.push_back(it->second.rejection);
        }
    }
    return result;
}

void write_rejection_report(const std::vector<Rejection> &rejections, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write rejection report: " + path);
    for (const auto &r : rejections) {
        json cands = json::array();
        for (const auto &c : r.candidates) cands.push_back(candidate_to_json(c));
        out << json{{"id", r.id}, {"reason", r.reason}, {"candidates", cands}}.dump() << "\n";
    }
}

} // namespace misq::misgen
