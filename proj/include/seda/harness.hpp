#pragma once

// Experiment orchestration: (workload x scheme) matrix, attack campaigns,
// cost-model sweep and the CSV reports they produce.

#include "seda/adversary.hpp"
#include "seda/memsim.hpp"
#include "seda/schemes.hpp"
#include "seda/workload.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace seda::harness {

struct ExperimentSpec {
    std::string profile = "server";
    workload::NpuConfig npu = workload::server_npu();
    std::vector<std::string> schemes{"unprotected", "sgx_64", "sgx_512", "mgx_64", "mgx_512",
                                     "seda"};
    std::vector<std::string> models{"lenet", "alexnet", "mobilenet", "resnet18"};
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "results";
    std::filesystem::path model_dir;
    /// Worker threads for the matrix; 0 picks the hardware concurrency.
    unsigned jobs = 0;
    std::uint64_t seca_trials = 100;
    std::uint64_t repa_trials = 1000;
    schemes::LayerMacResidency layer_mac_residency = schemes::LayerMacResidency::OffChip;
    schemes::LayerVerifyMode layer_verify = schemes::LayerVerifyMode::Speculative;
    std::vector<std::uint32_t> cost_multiples{1, 2, 4, 8, 16};

    void validate() const;
};

/// Built-in defaults with model_dir pointing at the shipped layer tables.
ExperimentSpec default_spec();

/// Applies an INI file (sections [experiment], [npu], [seda], [attacks]) on
/// top of `spec`. Unknown keys are config errors.
void apply_config_file(const std::filesystem::path& path, ExperimentSpec& spec);
void apply_config(std::istream& in, ExperimentSpec& spec);

std::vector<std::string> split_list(std::string_view csv);

/// Fixture keys unless SEDA_ENC_KEY / SEDA_MAC_KEY hold 32 hex digits.
adversary::LayerSecrets load_secrets();

/// Scheme config for a label under this experiment's SeDA options.
schemes::SchemeConfig scheme_config(const ExperimentSpec& spec, std::string_view label);

struct MatrixCell {
    std::string workload;
    std::string scheme;
    schemes::SchemeStats stats;
    schemes::CacheCounters vn_cache;
    schemes::CacheCounters mac_cache;
    memsim::CycleReport cycles;
    double normalized_traffic = 1.0;
};

struct MatrixResult {
    /// Row-major over (spec.models, spec.schemes).
    std::vector<MatrixCell> cells;
    /// Unprotected reference per model, whether or not it was requested.
    std::vector<MatrixCell> baselines;
    std::vector<workload::OptBlkChoice> optblk;
    std::vector<std::string> optblk_workload;
};

MatrixResult run_matrix(const ExperimentSpec& spec);

/// Conservation, cache sanity and the traffic/runtime dominance orderings
/// over whichever schemes the run contains. Empty when all hold.
std::vector<std::string> check_invariants(const MatrixResult& result);

std::string traffic_csv(const MatrixResult& result, const ExperimentSpec& spec);
std::string performance_csv(const MatrixResult& result, const ExperimentSpec& spec);
std::string optblk_csv(const MatrixResult& result);
std::string attacks_csv(const ExperimentSpec& spec, const adversary::LayerSecrets& secrets);
std::string cost_model_csv(const ExperimentSpec& spec);

/// Long-format `workload,scheme,metric,value` rows for every `metrics`
/// column found in `tables` (CSV text with workload and scheme columns).
/// Values are copied verbatim.
std::string emit_plot_data(const std::vector<std::string>& tables,
                           const std::vector<std::string>& metrics = {"normalized_traffic",
                                                                      "normalized_runtime"});

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitInvariant = 2 };

struct RunOutcome {
    int exit_code = kExitOk;
    std::string stage;
    std::string message;
};

/// Runs everything and writes traffic.csv, performance.csv, attacks.csv,
/// cost_model.csv, optblk.csv and plot_data.csv into spec.out_dir.
RunOutcome run_experiment(const ExperimentSpec& spec);

}  // namespace seda::harness
