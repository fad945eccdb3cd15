#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/data.hpp"

using namespace misq::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    auto p = fs::temp_directory_path() / "misq_data_tests";
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path &p, const std::string &content) {
    std::ofstream out(p);
    out << content;
}

QARecord make_record(const std::string &id) {
    QARecord r;
    r.id = id;
    r.question = "What year was Kevlar developed?";
    r.right_answer = "1965";
    r.knowledge = "Developed by Stephanie Kwolek at DuPont in 1965.";
    return r;
}

} // namespace

TEST_CASE("load_qa_dataset returns records in file order") {
    const auto p = scratch_dir() / "three.jsonl";
    write_file(p,
               R"({"id":"a","question":"q1?","right_answer":"x"})"
               "\n"
               R"({"id":"b","question":"q2?","right_answer":"y"})"
               "\n"
               R"({"id":"c","question":"q3?","right_answer":"z"})"
               "\n");
    const auto recs = load_qa_dataset(p.string());
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].id == "a");
    CHECK(recs[1].id == "b");
    CHECK(recs[2].id == "c");
}

TEST_CASE("empty file loads as empty list") {
    const auto p = scratch_dir() / "empty.jsonl";
    write_file(p, "");
    CHECK(load_qa_dataset(p.string()).empty());
}

TEST_CASE("missing question field names the line and field") {
    const auto p = scratch_dir() / "broken.jsonl";
    write_file(p,
               R"({"id":"a","question":"q1?","right_answer":"x"})"
               "\n"
               R"({"id":"b","right_answer":"y"})"
               "\n");
    try {
        load_qa_dataset(p.string());
        FAIL("expected ValidationError");
    } catch (const misq::ValidationError &e) {
        const std::string msg = e.what();
        CHECK(msg.find(":2") != std::string::npos);
        CHECK(msg.find("question") != std::string::npos);
    }
}

TEST_CASE("duplicate ids are rejected") {
    const auto p = scratch_dir() / "dup.jsonl";
    write_file(p,
               R"({"id":"a","question":"q1?","right_answer":"x"})"
               "\n"
               R"({"id":"a","question":"q2?","right_answer":"y"})"
               "\n");
    CHECK_THROWS_AS(load_qa_dataset(p.string()), misq::ValidationError);
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS(load_qa_dataset("/no/such/file.jsonl"), misq::IoError);
}

TEST_CASE("save/load round trip preserves fields, order and extras") {
    std::vector<QARecord> recs;
    for (int i = 0; i < 100; ++i) {
        auto r = make_record("id" + std::to_string(i));
        if (i % 2 == 0) r.hallucinated_answer = "1867";
        if (i % 3 == 0) {
            r.choices = {"1965", "1867"};
            r.right_answer = "1965";
        }
        if (i % 5 == 0) r.extras["upstream_tag"] = "keep-me";
        recs.push_back(std::move(r));
    }
    const auto p = scratch_dir() / "roundtrip.jsonl";
    CHECK(save_qa_dataset(recs, p.string()) == 100);
    const auto back = load_qa_dataset(p.string());
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) CHECK(back[i] == recs[i]);
}

TEST_CASE("right_answer must be one of choices") {
    auto r = make_record("a");
    r.choices = {"1867", "1899"};
    CHECK_THROWS_AS(save_qa_dataset({r}, (scratch_dir() / "bad.jsonl").string()),
                    misq::ValidationError);
}

TEST_CASE("whitespace-only question is rejected") {
    auto r = make_record("a");
    r.question = "   \t ";
    CHECK_THROWS_AS(r.validate(), misq::ValidationError);
}

TEST_CASE("unwritable path raises IoError") {
    CHECK_THROWS_AS(save_qa_dataset({make_record("a")}, "/no/such/dir/out.jsonl"),
                    misq::IoError);
}

TEST_CASE("mis records: round trip and invariants") {
    MisRecord m;
    m.id = "a";
    m.source_question = "What year was Kevlar developed?";
    m.misleading_question = "What year was the low strength fiber developed?";
    m.s_sim = 0.96;
    m.e_error = 0.67;
    m.extras["note"] = 1;
    const auto p = scratch_dir() / "mis.jsonl";
    save_mis_dataset({m}, p.string());
    const auto back = load_mis_dataset(p.string());
    REQUIRE(back.size() == 1);
    CHECK(back[0] == m);

    MisRecord bad = m;
    bad.misleading_question = bad.source_question;
    CHECK_THROWS_AS(bad.validate(), misq::ValidationError);

    bad = m;
    bad.e_error = 1.5;
    CHECK_THROWS_AS(bad.validate(), misq::ValidationError);
}

TEST_CASE("dataset kind parsing") {
    CHECK(kind_from_string("halueval_qa") == DatasetKind::halueval_qa);
    CHECK(kind_to_string(DatasetKind::mis) == "mis");
    CHECK_THROWS_AS(kind_from_string("bogus"), misq::ValidationError);
}
