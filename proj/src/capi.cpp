#include "misquery.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "core/config.hpp"
#include "core/data.hpp"
#include "core/evalharness.hpp"
#include "core/misgen.hpp"
#include "core/pipeline.hpp"
#include "core/stagekit.hpp"
#include "core/textmetrics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

thread_local std::string g_last_error;

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
mq_status guarded(F &&f) {
    try {
        f();
        return MQ_OK;
    } catch (const misq::BackendError &e) {
        g_last_error = e.what();
        return MQ_E_BACKEND;
    } catch (const misq::IoError &e) {
        g_last_error = e.what();
        return MQ_E_IO;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return MQ_E_VALIDATION;
    }
}

mq_status require(const void *p, const char *name) {
    if (p) return MQ_OK;
    g_last_error = std::string("null argument: ") + name;
    return MQ_E_VALIDATION;
}

std::string base_dir_of(const std::string &config_path) {
    return fs::path(config_path).parent_path().string();
}

// Loads a dataset file as QA records; "mis" files are rejected here since
// every workflow entry point taking `kind` expects QA-shaped input except
// gen-mis output handling.
std::vector<misq::data::QARecord> load_qa(const std::string &path, const std::string &kind) {
    const auto k = misq::data::kind_from_string(kind);
    if (k == misq::data::DatasetKind::mis)
        throw misq::ValidationError("expected a QA-shaped dataset, got kind \"mis\"");
    return misq::data::load_qa_dataset(path);
}

} // namespace

extern "C" {

const char *mq_last_error(void) { return g_last_error.c_str(); }

void mq_free(char *s) { std::free(s); }

const char *mq_version(void) { return "0.1.0"; }

mq_status mq_edit_distance(const char *a, const char *b, long long *out) {
    if (auto rc = require(a, "a")) return rc;
    if (auto rc = require(b, "b")) return rc;
    if (auto rc = require(out, "out")) return rc;
    return guarded([&] {
        *out = static_cast<long long>(misq::text::edit_distance(a, b));
    });
}

mq_status mq_sentence_similarity(const char *q_ori, const char *q_mis, double *out) {
    if (auto rc = require(q_ori, "q_ori")) return rc;
    if (auto rc = require(q_mis, "q_mis")) return rc;
    if (auto rc = require(out, "out")) return rc;
    return guarded([&] { *out = misq::text::sentence_similarity(q_ori, q_mis).value; });
}

mq_status mq_normalize_answer(const char *s, char **out) {
    if (auto rc = require(s, "s")) return rc;
    if (auto rc = require(out, "out")) return rc;
    return guarded([&] { *out = dup_string(misq::text::normalize_answer(s)); });
}

int mq_answer_matches(const char *response, const char *gold) {
    if (!response || !gold) {
        g_last_error = "null argument";
        return -1;
    }
    return misq::text::answer_matches(response, gold) ? 1 : 0;
}

mq_status mq_bleu(const char *candidate, const char *reference, double *out) {
    if (auto rc = require(candidate, "candidate")) return rc;
    if (auto rc = require(reference, "reference")) return rc;
    if (auto rc = require(out, "out")) return rc;
    return guarded([&] { *out = misq::text::bleu(candidate, reference); });
}

mq_status mq_rouge_l(const char *candidate, const char *reference, double *out) {
    if (auto rc = require(candidate, "candidate")) return rc;
    if (auto rc = require(reference, "reference")) return rc;
    if (auto rc = require(out, "out")) return rc;
    return guarded([&] { *out = misq::text::rouge_l(candidate, reference); });
}

mq_status mq_validate_dataset(const char *path, const char *kind, char **report_json) {
    if (auto rc = require(path, "path")) return rc;
    if (auto rc = require(kind, "kind")) return rc;
    return guarded([&] {
        std::size_t count;
        if (misq::data::kind_from_string(kind) == misq::data::DatasetKind::mis) {
            count = misq::data::load_mis_dataset(path).size();
        } else {
            count = misq::data::load_qa_dataset(path).size();
        }
        if (report_json) *report_json = dup_string(json{{"count", count}}.dump());
    });
}

mq_status mq_gen_mis(const char *config_path, const char *input_path, const char *kind,
                     const char *output_path, const char *checkpoint_path,
                     const char *rejects_path) {
    if (auto rc = require(config_path, "config_path")) return rc;
    if (auto rc = require(input_path, "input_path")) return rc;
    if (auto rc = require(kind, "kind")) return rc;
    if (auto rc = require(output_path, "output_path")) return rc;
    return guarded([&] {
        const auto cfg = misq::config::RunConfig::load(config_path);
        const auto base = base_dir_of(config_path);
        auto generator = cfg.make_gateway("generator", base);
        auto answerer = cfg.make_gateway("answerer", base);
        const auto source = load_qa(input_path, kind);
        const auto result = misq::misgen::build_mis_dataset(
            source, misq::data::kind_from_string(kind), cfg.gen, *generator, *answerer,
            checkpoint_path ? checkpoint_path : "");
        misq::data::save_mis_dataset(result.records, output_path);
        if (rejects_path && *rejects_path)
            misq::misgen::write_rejection_report(result.rejections, rejects_path);
    });
}

mq_status mq_prepare_stages(const char *config_path, const char *clean_path,
                            const char *mis_path, const char *out_dir, char **manifest_json) {
    if (auto rc = require(config_path, "config_path")) return rc;
    if (auto rc = require(clean_path, "clean_path")) return rc;
    if (auto rc = require(mis_path, "mis_path")) return rc;
    if (auto rc = require(out_dir, "out_dir")) return rc;
    return guarded([&] {
        (void)misq::config::RunConfig::load(config_path);
        const auto clean = misq::data::load_qa_dataset(clean_path);
        const auto mis = misq::data::load_mis_dataset(mis_path);
        auto examples = misq::stagekit::build_detection_set(clean, mis);
        auto correction = misq::stagekit::build_correction_set(mis, clean);
        examples.insert(examples.end(), correction.begin(), correction.end());
        auto answers = misq::stagekit::build_answer_set(clean);
        examples.insert(examples.end(), answers.begin(), answers.end());
        const auto m = misq::stagekit::export_stage_datasets(examples, out_dir);
        if (manifest_json)
            *manifest_json = dup_string(json{{"detect", m.detect_count},
                                             {"correct", m.correct_count},
                                             {"answer", m.answer_count}}
                                            .dump());
    });
}

mq_status mq_run_pipeline(const char *config_path, const char *input_path, const char *kind,
                          const char *mode, const char *trace_path) {
    if (auto rc = require(config_path, "config_path")) return rc;
    if (auto rc = require(input_path, "input_path")) return rc;
    if (auto rc = require(kind, "kind")) return rc;
    if (auto rc = require(mode, "mode")) return rc;
    if (auto rc = require(trace_path, "trace_path")) return rc;
    return guarded([&] {
        const auto cfg = misq::config::RunConfig::load(config_path);
        const auto base = base_dir_of(config_path);
        auto backend = cfg.make_gateway("detector", base);
        const auto records = load_qa(input_path, kind);
        misq::pipeline::RunOptions opts;
        const std::string m = mode;
        if (m == "full") {
            opts.mode = misq::pipeline::Mode::full;
        } else if (m == "answer_only") {
            opts.mode = misq::pipeline::Mode::answer_only;
        } else {
            throw misq::ValidationError("mode must be \"full\" or \"answer_only\"");
        }
        opts.record_timings = cfg.record_timings;
        const auto traces = misq::pipeline::run_pipeline(records, *backend, opts);
        misq::pipeline::save_traces(traces, trace_path, cfg.record_timings);
    });
}

mq_status mq_eval_traces(const char *config_path, const char *traces_paths,
                         const char *dataset_path, const char *kind,
                         const char *report_path) {
    if (auto rc = require(config_path, "config_path")) return rc;
    if (auto rc = require(traces_paths, "traces_paths")) return rc;
    if (auto rc = require(dataset_path, "dataset_path")) return rc;
    if (auto rc = require(kind, "kind")) return rc;
    if (auto rc = require(report_path, "report_path")) return rc;
    return guarded([&] {
        (void)misq::config::RunConfig::load(config_path);
        const auto records = load_qa(dataset_path, kind);
        const std::string dataset_name = fs::path(dataset_path).stem().string();

        std::vector<std::string> paths;
        std::stringstream ss(traces_paths);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) paths.push_back(item);
        }
        if (paths.empty()) throw misq::ValidationError("no trace paths given");

        std::vector<double> acc_runs, fail_runs;
        bool have_detect = false;
        std::size_t n_items = 0;
        std::vector<std::string> answers;
        for (const auto &p : paths) {
            const auto traces = misq::pipeline::load_traces(p);
            n_items = traces.size();
            acc_runs.push_back(misq::evalh::qa_accuracy(traces, records));
            std::vector<std::string> raw;
            for (const auto &t : traces) {
                if (t.detect_raw) raw.push_back(*t.detect_raw);
            }
            if (!raw.empty()) {
                have_detect = true;
                fail_runs.push_back(misq::evalh::failure_rate(raw));
            }
            if (&p == &paths.front()) {
                for (const auto &t : traces) answers.push_back(t.final_answer);
            }
        }

        std::vector<misq::evalh::EvalReport> reports;
        misq::evalh::EvalReport acc;
        acc.dataset = dataset_name;
        acc.metric = "accuracy";
        acc.per_run = acc_runs;
        acc.n_items = n_items;
        std::tie(acc.mean, acc.std_dev) = misq::evalh::aggregate_runs(acc_runs);
        reports.push_back(acc);
        if (have_detect) {
            misq::evalh::EvalReport fr;
            fr.dataset = dataset_name;
            fr.metric = "failure_rate_pct";
            fr.per_run = fail_runs;
            fr.n_items = n_items;
            std::tie(fr.mean, fr.std_dev) = misq::evalh::aggregate_runs(fail_runs);
            reports.push_back(fr);
        }
        if (misq::data::kind_from_string(kind) == misq::data::DatasetKind::truthfulqa) {
            std::vector<std::vector<std::string>> refs;
            for (const auto &r : records) {
                if (r.choices) {
                    refs.push_back(*r.choices);
                } else {
                    refs.push_back({r.right_answer});
                }
            }
            auto [bleu_r, rouge_r] = misq::evalh::truthfulqa_scores(answers, refs);
            bleu_r.dataset = rouge_r.dataset = dataset_name;
            reports.push_back(bleu_r);
            reports.push_back(rouge_r);
        }
        misq::evalh::save_reports(reports, report_path);
    });
}

mq_status mq_audit_dataset(const char *config_path, const char *input_path, const char *kind,
                           const char *clean_out_path, char **audit_json) {
    if (auto rc = require(config_path, "config_path")) return rc;
    if (auto rc = require(input_path, "input_path")) return rc;
    if (auto rc = require(kind, "kind")) return rc;
    if (auto rc = require(clean_out_path, "clean_out_path")) return rc;
    return guarded([&] {
        const auto cfg = misq::config::RunConfig::load(config_path);
        auto detector = cfg.make_gateway("detector", base_dir_of(config_path));
        const auto records = load_qa(input_path, kind);
        const auto res = misq::evalh::audit_dataset(records, *detector);
        misq::data::save_qa_dataset(misq::evalh::remove_flagged(records, res.flagged_ids),
                                    clean_out_path);
        if (audit_json)
            *audit_json = dup_string(json{{"flagged_ids", res.flagged_ids},
                                          {"proportion", res.proportion},
                                          {"total", res.total},
                                          {"complete", res.complete},
                                          {"clean_subset_path", clean_out_path}}
                                         .dump());
    });
}

mq_status mq_compute_losses(const char *batch_json_path, char **result_json) {
    if (auto rc = require(batch_json_path, "batch_json_path")) return rc;
    if (auto rc = require(result_json, "result_json")) return rc;
    return guarded([&] {
        std::ifstream in(batch_json_path);
        if (!in) throw misq::IoError(std::string("cannot open batch file: ") + batch_json_path);
        json j;
        in >> j;
        json out = json::object();
        if (j.contains("detection")) {
            misq::stagekit::DetectionBatch b;
            b.y_true = j.at("detection").at("y_true").get<std::vector<int>>();
            b.y_pred = j.at("detection").at("y_pred").get<std::vector<double>>();
            out["detection_loss"] = misq::stagekit::detection_loss(b);
        }
        if (j.contains("correction")) {
            misq::stagekit::EmbeddingPairBatch b;
            for (const auto &v : j.at("correction").at("u"))
                b.u.push_back({v.get<std::vector<double>>()});
            for (const auto &v : j.at("correction").at("v"))
                b.v.push_back({v.get<std::vector<double>>()});
            out["correction_loss"] = misq::stagekit::correction_loss(b);
        }
        if (j.contains("generation")) {
            misq::stagekit::TokenProbBatch b;
            b.sequences =
                j.at("generation").at("sequences").get<std::vector<std::vector<double>>>();
            out["generation_loss"] = misq::stagekit::generation_loss(b);
        }
        if (out.empty())
            throw misq::ValidationError(
                "batch file holds none of detection/correction/generation");
        *result_json = dup_string(out.dump());
    });
}

} // extern "C"
