#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/pipeline.hpp"

using namespace misq;
using namespace misq::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    auto p = fs::temp_directory_path() / "misq_pipeline_tests";
    fs::create_directories(p);
    return p;
}

// Super-Bowl fixture: a question misled into the wrong football code.
data::QARecord superbowl_record() {
    data::QARecord r;
    r.id = "superbowl";
    r.question =
        "In which Super Bowl did the Seattle Seahawks win their first England "
        "football championship?";
    r.right_answer = "Super Bowl XLVIII";
    r.knowledge =
        "The Seattle Seahawks won Super Bowl XLVIII, an American football "
        "championship game, on February 2, 2014.";
    return r;
}

std::shared_ptr<gateway::MockBackend> superbowl_mock() {
    std::vector<gateway::MockBackend::Rule> rules = {
        {{"mistake detector", "England football"}, {"YES"}, 0},
        {{"mistake detector"}, {"NO"}, 0},
        {{"mistake corrector", "England football"},
         {"In which Super Bowl did the Seattle Seahawks win their first American "
          "football championship?"},
         0},
        {{"broad knowledge", "first American football"}, {"Super Bowl XLVIII"}, 0},
        {{"broad knowledge"}, {"I cannot tell."}, 0},
    };
    return std::make_shared<gateway::MockBackend>(std::move(rules));
}

// Ronald-Ryan fixture: the execution country is misled to New Zealand.
data::QARecord ryan_record() {
    data::QARecord r;
    r.id = "ryan";
    r.question =
        "Barry Dickins wrote a film about the last man to be executed in New "
        "Zealand, named what?";
    r.right_answer = "Remember Ronald Ryan";
    r.knowledge =
        "Ronald Joseph Ryan was the last person to be legally executed in "
        "Australia. Barry Dickins wrote Remember Ronald Ryan.";
    return r;
}

std::shared_ptr<gateway::MockBackend> ryan_mock() {
    std::vector<gateway::MockBackend::Rule> rules = {
        {{"mistake detector", "New Zealand"}, {"YES"}, 0},
        {{"mistake detector"}, {"NO"}, 0},
        {{"mistake corrector", "New Zealand"},
         {"Barry Dickins wrote a film about the last man to be executed in "
          "Australia, named what?"},
         0},
        {{"broad knowledge", "last man to be executed in Australia"},
         {"Remember Ronald Ryan"},
         0},
        {{"broad knowledge"}, {"The Last Outlaw"}, 0},
    };
    return std::make_shared<gateway::MockBackend>(std::move(rules));
}

} // namespace

TEST_CASE("parse_detection: whole-word YES/NO scan") {
    CHECK(parse_detection("YES").label == Verdict::YES);
    CHECK(parse_detection("no").label == Verdict::NO);
    CHECK(parse_detection("Yes.").label == Verdict::YES);
    CHECK(parse_detection("I think yes").label == Verdict::YES);
    CHECK(parse_detection("The answer is NO!").label == Verdict::NO);
    // "eyes" and "nothing" contain the letters but not the words
    CHECK(parse_detection("eyes").label == Verdict::FAILED);
    CHECK(parse_detection("nothing").label == Verdict::FAILED);
    CHECK(parse_detection("YES or NO").label == Verdict::FAILED);
    CHECK(parse_detection("").label == Verdict::FAILED);
    CHECK(parse_detection("maybe").label == Verdict::FAILED);
    CHECK(parse_detection("unyesno").label == Verdict::FAILED);
}

TEST_CASE("misled question is detected, corrected, then answered") {
    auto backend = superbowl_mock();
    gateway::Gateway gw(backend);
    const auto traces = run_pipeline({superbowl_record()}, gw, {});
    REQUIRE(traces.size() == 1);
    const auto &t = traces[0];
    REQUIRE(t.verdict.has_value());
    CHECK(t.verdict->label == Verdict::YES);
    REQUIRE(t.corrected_question.has_value());
    CHECK(t.corrected_question->find("American football") != std::string::npos);
    CHECK(t.final_answer == "Super Bowl XLVIII");
    CHECK_FALSE(t.error.has_value());
    CHECK(backend->chat_calls() == 3); // detect + correct + answer
}

TEST_CASE("second worked example routes through correction") {
    auto backend = ryan_mock();
    gateway::Gateway gw(backend);
    const auto traces = run_pipeline({ryan_record()}, gw, {});
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].verdict->label == Verdict::YES);
    CHECK(traces[0].corrected_question->find("Australia") != std::string::npos);
    CHECK(traces[0].final_answer == "Remember Ronald Ryan");
}

TEST_CASE("clean question skips the correction stage") {
    auto rec = superbowl_record();
    rec.question =
        "In which Super Bowl did the Seattle Seahawks win their first American "
        "football championship?";
    auto backend = superbowl_mock();
    gateway::Gateway gw(backend);
    const auto traces = run_pipeline({rec}, gw, {});
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].verdict->label == Verdict::NO);
    CHECK_FALSE(traces[0].corrected_question.has_value());
    CHECK(traces[0].final_answer == "Super Bowl XLVIII");
    CHECK(backend->chat_calls() == 2); // detect + answer, no correction
}

TEST_CASE("unparseable verdict falls through to the original question") {
    std::vector<gateway::MockBackend::Rule> rules = {
        {{"mistake detector"}, {"perhaps"}, 0},
        {{"broad knowledge", "England football"}, {"answered original"}, 0},
    };
    auto backend = std::make_shared<gateway::MockBackend>(std::move(rules));
    gateway::Gateway gw(backend);
    const auto traces = run_pipeline({superbowl_record()}, gw, {});
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].verdict->label == Verdict::FAILED);
    CHECK_FALSE(traces[0].corrected_question.has_value());
    CHECK(traces[0].final_answer == "answered original");
    CHECK(backend->chat_calls() == 2);
}

TEST_CASE("answer_only mode asks the answerer directly") {
    auto backend = superbowl_mock();
    gateway::Gateway gw(backend);
    RunOptions opts;
    opts.mode = Mode::answer_only;
    const auto traces = run_pipeline({superbowl_record()}, gw, opts);
    REQUIRE(traces.size() == 1);
    CHECK_FALSE(traces[0].verdict.has_value());
    CHECK_FALSE(traces[0].corrected_question.has_value());
    CHECK(traces[0].final_answer == "I cannot tell."); // misled, never corrected
    CHECK(backend->chat_calls() == 1);
}

TEST_CASE("per-record failure is captured in the trace") {
    // Corrector returns an empty string, which the correction stage rejects.
    std::vector<gateway::MockBackend::Rule> rules = {
        {{"mistake detector"}, {"YES"}, 0},
        {{"mistake corrector"}, {""}, 0},
        {{"broad knowledge"}, {"fine"}, 0},
    };
    auto backend = std::make_shared<gateway::MockBackend>(std::move(rules));
    gateway::Gateway gw(backend);
    const auto traces = run_pipeline({superbowl_record(), ryan_record()}, gw, {});
    REQUIRE(traces.size() == 2);
    for (const auto &t : traces) {
        REQUIRE(t.error.has_value());
        CHECK(t.error->find("empty") != std::string::npos);
        CHECK(t.final_answer.empty());
    }
}

TEST_CASE("trace save/load round trip") {
    auto backend = superbowl_mock();
    gateway::Gateway gw(backend);
    auto rec2 = superbowl_record();
    rec2.id = "clean";
    rec2.question =
        "In which Super Bowl did the Seattle Seahawks win their first American "
        "football championship?";
    const auto traces = run_pipeline({superbowl_record(), rec2}, gw, {});

    const auto p = scratch_dir() / "traces.jsonl";
    save_traces(traces, p.string());
    const auto back = load_traces(p.string());
    REQUIRE(back.size() == traces.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
        CHECK(back[i].record_id == traces[i].record_id);
        CHECK(back[i].verdict.has_value() == traces[i].verdict.has_value());
        if (back[i].verdict)
            CHECK(back[i].verdict->label == traces[i].verdict->label);
        CHECK(back[i].corrected_question == traces[i].corrected_question);
        CHECK(back[i].final_answer == traces[i].final_answer);
        CHECK(back[i].detect_raw == traces[i].detect_raw);
    }

    SUBCASE("corrupt trace line names the file and line") {
        const auto bad = scratch_dir() / "bad_traces.jsonl";
        {
            std::ofstream out(bad);
            out << traces[0].to_json(false).dump() << "\n";
            out << "{oops\n";
        }
        try {
            load_traces(bad.string());
            FAIL("expected ValidationError");
        } catch (const ValidationError &e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
}

TEST_CASE("run_pipeline resumes from a trace checkpoint") {
    std::vector<data::QARecord> records;
    for (int i = 0; i < 6; ++i) {
        auto r = superbowl_record();
        r.id = "r" + std::to_string(i);
        records.push_back(r);
    }
    const auto ckpt = scratch_dir() / "resume.jsonl";
    fs::remove(ckpt);

    RunOptions opts;
    opts.checkpoint_path = ckpt.string();
    {
        auto backend = superbowl_mock();
        gateway::Gateway gw(backend);
        std::vector<data::QARecord> first4(records.begin(), records.begin() + 4);
        run_pipeline(first4, gw, opts);
        CHECK(backend->chat_calls() == 4 * 3);
    }
    auto backend = superbowl_mock();
    gateway::Gateway gw(backend);
    const auto traces = run_pipeline(records, gw, opts);
    REQUIRE(traces.size() == 6);
    CHECK(backend->chat_calls() == 2 * 3); // only the remaining two records
    for (std::size_t i = 0; i < 6; ++i) CHECK(traces[i].record_id == records[i].id);
}

TEST_CASE("traces are byte-identical across repeated runs") {
    const auto p1 = scratch_dir() / "det1.jsonl";
    const auto p2 = scratch_dir() / "det2.jsonl";
    for (const auto &p : {p1, p2}) {
        auto backend = superbowl_mock();
        gateway::Gateway gw(backend);
        const auto traces = run_pipeline({superbowl_record(), ryan_record()}, gw, {});
        save_traces(traces, p.string(), /*with_timings=*/false);
    }
    std::ifstream f1(p1), f2(p2);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
    CHECK_FALSE(s1.empty());
}

TEST_CASE("empty question is rejected with a diagnostic") {
    auto backend = superbowl_mock();
    gateway::Gateway gw(backend);
    CHECK_THROWS_AS(detect("  ", std::nullopt, gw), ValidationError);
    CHECK_THROWS_AS(answer("", std::nullopt, gw), ValidationError);
}
