#include "seda/common.hpp"
#include "seda/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace seda;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int report_error(const std::string& stage, const std::exception& e) {
    std::cerr << fmt::format("seda_cli: {} failed: {}\n", stage, e.what());
    return harness::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SeDA secure accelerator memory-protection simulator"};
    app.require_subcommand(1);

    std::string config_path, profile, schemes, models, out, fixtures;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
    auto* run = app.add_subcommand("run", "run the full experiment matrix and write reports");
    run->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    run->add_option("--profile", profile, "server | edge");
    run->add_option("--schemes", schemes, "comma-separated scheme labels");
    run->add_option("--models", models, "comma-separated model names");
    run->add_option("--seed", seed, "attack campaign seed");
    run->add_option("--out", out, "report directory");
    run->add_option("--fixtures", fixtures, "directory holding <model>.csv layer tables");
    run->add_option("--jobs", jobs, "worker threads (0 = all cores)");

    std::string trace_model, trace_out, trace_profile = "server";
    auto* trace = app.add_subcommand("trace", "emit the data trace of one model");
    trace->add_option("--model", trace_model, "layer table path")->required()->check(CLI::ExistingFile);
    trace->add_option("--profile", trace_profile, "server | edge");
    trace->add_option("--out", trace_out, "trace CSV to write")->required();

    std::string sim_trace, sim_scheme = "unprotected", sim_profile = "server", sim_out;
    auto* simulate = app.add_subcommand(
        "simulate", "apply a protection scheme and the DRAM model to a data trace file");
    simulate->add_option("--trace", sim_trace, "data trace CSV")->required()->check(CLI::ExistingFile);
    simulate->add_option("--scheme", sim_scheme, "scheme label (SeDA needs layer context, so not accepted)");
    simulate->add_option("--profile", sim_profile, "server | edge");
    simulate->add_option("--out", sim_out, "augmented trace CSV to write");

    std::vector<std::string> plot_inputs;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "long-format plot data from report CSVs");
    plot->add_option("inputs", plot_inputs, "report CSVs")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", plot_out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        harness::ExperimentSpec spec = harness::default_spec();
        try {
            if (!config_path.empty()) harness::apply_config_file(config_path, spec);
            if (!profile.empty()) {
                spec.profile = profile;
                spec.npu = workload::npu_profile(profile);
            }
            if (!schemes.empty()) spec.schemes = harness::split_list(schemes);
            if (!models.empty()) spec.models = harness::split_list(models);
            if (run->count("--seed")) spec.seed = seed;
            if (!out.empty()) spec.out_dir = out;
            if (!fixtures.empty()) spec.model_dir = fixtures;
            if (run->count("--jobs")) spec.jobs = jobs;
        } catch (const std::exception& e) {
            return report_error("config", e);
        }
        const auto outcome = harness::run_experiment(spec);
        if (outcome.exit_code != harness::kExitOk)
            std::cerr << fmt::format("seda_cli: {} failed: {}\n", outcome.stage, outcome.message);
        else
            std::cout << fmt::format("reports written to {}\n", spec.out_dir.string());
        return outcome.exit_code;
    }

    if (*trace) {
        try {
            const auto npu = workload::npu_profile(trace_profile);
            const auto model = workload::load_layer_table(trace_model);
            const auto t = workload::emit_model_trace(model, npu);
            workload::save_trace_file(trace_out, t.events);
            std::cout << fmt::format("{} events, compute ends at cycle {}\n", t.events.size(),
                                     t.compute_end_cycle);
        } catch (const std::exception& e) {
            return report_error("trace", e);
        }
        return 0;
    }

    if (*simulate) {
        try {
            const auto npu = workload::npu_profile(sim_profile);
            const auto events = workload::load_trace_file(sim_trace);
            const auto config = schemes::scheme_from_label(sim_scheme);
            const auto aug = schemes::process_trace(config, events);
            if (!sim_out.empty()) workload::save_trace_file(sim_out, aug.events);
            std::uint64_t compute_end = events.empty() ? 0 : events.back().cycle;
            const auto rep = memsim::simulate(memsim::dram_config_for(npu), aug.events,
                                              compute_end, aug.barriers, sim_trace);
            std::cout << schemes::stats_csv_header() << ",total_cycles\n"
                      << schemes::stats_csv_row(sim_trace, config, aug.stats) << ','
                      << rep.total_cycles << '\n';
        } catch (const std::exception& e) {
            return report_error("simulate", e);
        }
        return 0;
    }

    if (*plot) {
        try {
            std::vector<std::string> tables;
            for (const auto& p : plot_inputs) tables.push_back(slurp(p));
            std::ofstream o(plot_out, std::ios::binary);
            if (!o) throw Error(ErrorCode::Io, "cannot write " + plot_out);
            o << harness::emit_plot_data(tables);
        } catch (const std::exception& e) {
            return report_error("plot", e);
        }
        return 0;
    }
    return 0;
}
