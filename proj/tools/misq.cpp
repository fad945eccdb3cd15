// misq: command-line front end over the misquery C API.
//
// Exit codes: 0 success, 1 validation/usage failure, 2 backend failure.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "misquery.h"

namespace {

int to_exit_code(mq_status rc) {
    switch (rc) {
        case MQ_OK: return 0;
        case MQ_E_BACKEND: return 2;
        default: return 1;
    }
}

int finish(mq_status rc) {
    if (rc != MQ_OK) std::fprintf(stderr, "misq: %s\n", mq_last_error());
    return to_exit_code(rc);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Misleading-query toolchain: dataset synthesis, stage-wise training "
                 "data, detect/correct/answer pipeline, and evaluation."};
    app.require_subcommand(1);

    std::string config = "misq.json";
    app.add_option("-c,--config", config, "Run configuration file (JSON)")
        ->capture_default_str();

    // validate
    std::string v_input, v_kind = "halueval_qa";
    auto *validate = app.add_subcommand("validate", "Validate a line-delimited dataset file");
    validate->add_option("input", v_input, "Dataset file")->required();
    validate->add_option("-k,--kind", v_kind,
                         "Dataset kind (halueval_qa|halueval_sum|halueval_dia|cqa|"
                         "truthfulqa|mis)")
        ->capture_default_str();

    // gen-mis
    std::string g_input, g_kind = "halueval_qa", g_output, g_ckpt, g_rejects;
    auto *gen = app.add_subcommand("gen-mis", "Build a misleading-query dataset");
    gen->add_option("input", g_input, "Source QA dataset")->required();
    gen->add_option("-o,--output", g_output, "Output mis dataset")->required();
    gen->add_option("-k,--kind", g_kind, "Source dataset kind")->capture_default_str();
    gen->add_option("--checkpoint", g_ckpt, "Checkpoint file (enables resume)");
    gen->add_option("--rejects", g_rejects, "Rejection report file");

    // prepare-stages
    std::string p_clean, p_mis, p_out;
    auto *prep = app.add_subcommand("prepare-stages",
                                    "Build the three stage-wise training datasets");
    prep->add_option("--clean", p_clean, "Clean QA dataset")->required();
    prep->add_option("--mis", p_mis, "Misleading-query dataset")->required();
    prep->add_option("-o,--out-dir", p_out, "Output directory")->required();

    // run
    std::string r_input, r_kind = "halueval_qa", r_mode = "full", r_traces;
    auto *run = app.add_subcommand("run", "Run the detect/correct/answer pipeline");
    run->add_option("input", r_input, "Dataset to answer")->required();
    run->add_option("-k,--kind", r_kind, "Dataset kind")->capture_default_str();
    run->add_option("-m,--mode", r_mode, "full or answer_only")->capture_default_str();
    run->add_option("-t,--traces", r_traces, "Trace output file")->required();

    // eval
    std::string e_traces, e_dataset, e_kind = "halueval_qa", e_report;
    auto *eval = app.add_subcommand("eval", "Evaluate trace files against a dataset");
    eval->add_option("-t,--traces", e_traces,
                     "Trace file(s); comma-separate multiple runs")
        ->required();
    eval->add_option("-d,--dataset", e_dataset, "Dataset file")->required();
    eval->add_option("-k,--kind", e_kind, "Dataset kind")->capture_default_str();
    eval->add_option("-o,--report", e_report, "Report output file")->required();

    // audit
    std::string a_input, a_kind = "halueval_qa", a_clean;
    auto *audit = app.add_subcommand("audit", "Flag misleading questions in a dataset");
    audit->add_option("input", a_input, "Dataset file")->required();
    audit->add_option("-k,--kind", a_kind, "Dataset kind")->capture_default_str();
    audit->add_option("-o,--clean-out", a_clean, "Clean subset output file")->required();

    // losses
    std::string l_batch;
    auto *losses = app.add_subcommand("losses", "Reference loss computations over a batch file");
    losses->add_option("batch", l_batch, "JSON batch file")->required();

    CLI11_PARSE(app, argc, argv);

    if (*validate) {
        char *report = nullptr;
        const auto rc = mq_validate_dataset(v_input.c_str(), v_kind.c_str(), &report);
        if (rc == MQ_OK) {
            std::printf("%s\n", report);
            mq_free(report);
        }
        return finish(rc);
    }
    if (*gen) {
        return finish(mq_gen_mis(config.c_str(), g_input.c_str(), g_kind.c_str(),
                                 g_output.c_str(), g_ckpt.empty() ? nullptr : g_ckpt.c_str(),
                                 g_rejects.empty() ? nullptr : g_rejects.c_str()));
    }
    if (*prep) {
        char *manifest = nullptr;
        const auto rc = mq_prepare_stages(config.c_str(), p_clean.c_str(), p_mis.c_str(),
                                          p_out.c_str(), &manifest);
        if (rc == MQ_OK) {
            std::printf("%s\n", manifest);
            mq_free(manifest);
        }
        return finish(rc);
    }
    if (*run) {
        return finish(mq_run_pipeline(config.c_str(), r_input.c_str(), r_kind.c_str(),
                                      r_mode.c_str(), r_traces.c_str()));
    }
    if (*eval) {
        return finish(mq_eval_traces(config.c_str(), e_traces.c_str(), e_dataset.c_str(),
                                     e_kind.c_str(), e_report.c_str()));
    }
    if (*audit) {
        char *summary = nullptr;
        const auto rc = mq_audit_dataset(config.c_str(), a_input.c_str(), a_kind.c_str(),
                                         a_clean.c_str(), &summary);
        if (rc == MQ_OK) {
            std::printf("%s\n", summary);
            mq_free(summary);
        }
        return finish(rc);
    }
    if (*losses) {
        char *result = nullptr;
        const auto rc = mq_compute_losses(l_batch.c_str(), &result);
        if (rc == MQ_OK) {
            std::printf("%s\n", result);
            mq_free(result);
        }
        return finish(rc);
    }
    return 1;
}
