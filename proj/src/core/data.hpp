#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace misq::data {

using json = nlohmann::json;

enum class DatasetKind { halueval_qa, halueval_sum, halueval_dia, cqa, truthfulqa, mis };

DatasetKind kind_from_string(const std::string &s);
std::string kind_to_string(DatasetKind k);

// One benchmark item. Unknown fields from the source line are kept in
// `extras` and written back verbatim on save.
struct QARecord {
    std::string id;
    std::optional<std::string> knowledge;
    std::string question;
    std::string right_answer;
    std::optional<std::string> hallucinated_answer;
    std::optional<std::vector<std::string>> choices;
    std::optional<std::string> explanation;
    json extras = json::object();

    void validate() const;
    json to_json() const;
    static QARecord from_json(const json &j);

    bool operator==(const QARecord &other) const;
};

// One retained misleading query, keyed by its source record id.
struct MisRecord {
    std::string id;
    std::string misleading_question;
    std::string source_question;
    double s_sim = 0.0;
    double e_error = 0.0;
    json extras = json::object();

    void validate() const;
    json to_json() const;
    static MisRecord from_json(const json &j);

    bool operator==(const MisRecord &other) const;
};

struct DatasetManifest {
    std::string name;
    DatasetKind kind;
    std::string path;
    std::size_t count = 0;
};

// Line-delimited UTF-8, one JSON object per line. Malformed lines raise
// ValidationError naming the line number and field; duplicate ids raise too.
std::vector<QARecord> load_qa_dataset(const std::string &path);
std::vector<MisRecord> load_mis_dataset(const std::string &path);

std::size_t save_qa_dataset(const std::vector<QARecord> &records, const std::string &path);
std::size_t save_mis_dataset(const std::vector<MisRecord> &records, const std::string &path);

} // namespace misq::data
