#include "data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

namespace misq::data {

namespace {

std::string trimmed(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string require_string(const json &j, const char *field) {
    if (!j.contains(field)) throw ValidationError(std::string("missing field \"") + field + "\"");
    if (!j.at(field).is_string())
        throw ValidationError(std::string("field \"") + field + "\" is not a string");
    return j.at(field).get<std::string>();
}

const std::unordered_set<std::string> kQAFields = {
    "id", "knowledge", "question", "right_answer",
    "hallucinated_answer", "choices", "explanation"};
const std::unordered_set<std::string> kMisFields = {
    "id", "misleading_question", "source_question", "s_sim", "e_error"};

} // namespace

DatasetKind kind_from_string(const std::string &s) {
    if (s == "halueval_qa") return DatasetKind::halueval_qa;
    if (s == "halueval_sum") return DatasetKind::halueval_sum;
    if (s == "halueval_dia") return DatasetKind::halueval_dia;
    if (s == "cqa") return DatasetKind::cqa;
    if (s == "truthfulqa") return DatasetKind::truthfulqa;
    if (s == "mis") return DatasetKind::mis;
    throw ValidationError("unknown dataset kind: " + s);
}

std::string kind_to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::halueval_qa: return "halueval_qa";
        case DatasetKind::halueval_sum: return "halueval_sum";
        case DatasetKind::halueval_dia: return "halueval_dia";
        case DatasetKind::cqa: return "cqa";
        case DatasetKind::truthfulqa: return "truthfulqa";
        case DatasetKind::mis: return "mis";
    }
    return "?";
}

void QARecord::validate() const {
    if (id.empty()) throw ValidationError("empty id");
    if (trimmed(question).empty()) throw ValidationError("field \"question\" is empty");
    if (choices) {
        if (std::find(choices->begin(), choices->end(), right_answer) == choices->end())
            throw ValidationError("field \"right_answer\" is not one of \"choices\"");
    }
}

json QARecord::to_json() const {
    json j = extras;
    j["id"] = id;
    if (knowledge) j["knowledge"] = *knowledge;
    j["question"] = question;
    j["right_answer"] = right_answer;
    if (hallucinated_answer) j["hallucinated_answer"] = *hallucinated_answer;
    if (choices) j["choices"] = *choices;
    if (explanation) j["explanation"] = *explanation;
    return j;
}

QARecord QARecord::from_json(const json &j) {
    QARecord r;
    r.id = require_string(j, "id");
    r.question = require_string(j, "question");
    r.right_answer = require_string(j, "right_answer");
    if (j.contains("knowledge")) r.knowledge = require_string(j, "knowledge");
    if (j.contains("hallucinated_answer"))
        r.hallucinated_answer = require_string(j, "hallucinated_answer");
    if (j.contains("explanation")) r.explanation = require_string(j, "explanation");
    if (j.contains("choices")) {
        if (!j.at("choices").is_array())
            throw ValidationError("field \"choices\" is not an array");
        r.choices = j.at("choices").get<std::vector<std::string>>();
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!kQAFields.count(it.key())) r.extras[it.key()] = it.value();
    }
    r.validate();
    return r;
}

bool QARecord::operator==(const QARecord &o) const {
    return to_json() == o.to_json();
}

void MisRecord::validate() const {
    if (id.empty()) throw ValidationError("empty id");
    if (misleading_question == source_question)
        throw ValidationError("field \"misleading_question\" equals \"source_question\"");
    if (s_sim < 0.0 || s_sim > 1.0) throw ValidationError("field \"s_sim\" outside [0,1]");
    if (e_error < 0.0 || e_error > 1.0) throw ValidationError("field \"e_error\" outside [0,1]");
}

json MisRecord::to_json() const {
    json j = extras;
    j["id"] = id;
    j["misleading_question"] = misleading_question;
    j["source_question"] = source_question;
    j["s_sim"] = s_sim;
    j["e_error"] = e_error;
    return j;
}

MisRecord MisRecord::from_json(const json &j) {
    MisRecord r;
    r.id = require_string(j, "id");
    r.misleading_question = require_string(j, "misleading_question");
    r.source_question = require_string(j, "source_question");
    if (!j.contains("s_sim") || !j.at("s_sim").is_number())
        throw ValidationError("missing or non-numeric field \"s_sim\"");
    if (!j.contains("e_error") || !j.at("e_error").is_number())
        throw ValidationError("missing or non-numeric field \"e_error\"");
    r.s_sim = j.at("s_sim").get<double>();
    r.e_error = j.at("e_error").get<double>();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!kMisFields.count(it.key())) r.extras[it.key()] = it.value();
    }
    r.validate();
    return r;
}

bool MisRecord::operator==(const MisRecord &o) const {
    return to_json() == o.to_json();
}

namespace {

template <typename R>
std::vector<R> load_lines(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<R> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trimmed(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error &e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": invalid JSON: " +
                                  e.what());
        }
        R r;
        try {
            r = R::from_json(j);
        } catch (const ValidationError &e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(r.id).second)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": duplicate id \"" +
                                  r.id + "\"");
        out.push_back(std::move(r));
    }
    return out;
}

template <typename R>
std::size_t save_lines(const std::vector<R> &records, const std::string &path) {
    std::unordered_set<std::string> seen;
    for (const auto &r : records) {
        r.validate();
        if (!seen.insert(r.id).second)
            throw ValidationError("duplicate id \"" + r.id + "\" in records to save");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    for (const auto &r : records) out << r.to_json().dump() << "\n";
    if (!out) throw IoError("write failed: " + path);
    return records.size();
}

} // namespace

std::vector<QARecord> load_qa_dataset(const std::string &path) {
    return load_lines<QARecord>(path);
}

std::vector<MisRecord> load_mis_dataset(const std::string &path) {
    return load_lines<MisRecord>(path);
}

std::size_t save_qa_dataset(const std::vector<QARecord> &records, const std::string &path) {
    return save_lines(records, path);
}

std::size_t save_mis_dataset(const std::vector<MisRecord> &records, const std::string &path) {
    return save_lines(records, path);
}

} // namespace misq::data
