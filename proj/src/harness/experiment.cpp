#include "seda/harness.hpp"

#include "seda/common.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace seda::harness {
namespace {

using schemes::SchemeStats;

/// Runs fn(0..n-1) on a small pool. Results are written by index, so the
/// thread count never affects output. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

MatrixCell run_cell(const ExperimentSpec& spec, const workload::WorkloadTrace& trace,
                    std::string_view label) {
    const schemes::SchemeConfig config = scheme_config(spec, label);
    const schemes::AugmentedTrace aug =
        schemes::process_trace(config, trace.events, trace.layers);
    MatrixCell cell;
    cell.workload = trace.workload;
    cell.scheme = std::string(label);
    cell.stats = aug.stats;
    cell.vn_cache = aug.vn_cache;
    cell.mac_cache = aug.mac_cache;
    cell.cycles = memsim::simulate(memsim::dram_config_for(spec.npu), aug.events,
                                   trace.compute_end_cycle, aug.barriers, trace.workload);
    return cell;
}

std::string fixed(double v) { return fmt::format("{:.8f}", v); }

const MatrixCell* find_cell(const MatrixResult& r, std::string_view workload,
                            std::string_view scheme) {
    for (const auto& c : r.cells)
        if (c.workload == workload && c.scheme == scheme) return &c;
    return nullptr;
}

const MatrixCell& baseline_of(const MatrixResult& r, std::string_view workload) {
    for (const auto& c : r.baselines)
        if (c.workload == workload) return c;
    throw Error(ErrorCode::MismatchedWorkload, fmt::format("no baseline for '{}'", workload));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

MatrixResult run_matrix(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<workload::ModelDescriptor> models;
    for (const auto& name : spec.models) models.push_back(workload::load_model(spec.model_dir, name));

    std::vector<workload::WorkloadTrace> traces(models.size());
    parallel_for(models.size(), spec.jobs,
                 [&](std::size_t i) { traces[i] = workload::emit_model_trace(models[i], spec.npu); });

    const std::size_t ns = spec.schemes.size();
    MatrixResult result;
    result.cells.resize(models.size() * ns);
    result.baselines.resize(models.size());
    // Baselines first so the pool keeps long SGX runs busy alongside them.
    parallel_for(models.size() * (ns + 1), spec.jobs, [&](std::size_t job) {
        const std::size_t m = job / (ns + 1);
        const std::size_t s = job % (ns + 1);
        if (s == 0)
            result.baselines[m] = run_cell(spec, traces[m], "unprotected");
        else if (spec.schemes[s - 1] != "unprotected")
            result.cells[m * ns + s - 1] = run_cell(spec, traces[m], spec.schemes[s - 1]);
    });

    for (std::size_t m = 0; m < models.size(); ++m) {
        const MatrixCell& base = result.baselines[m];
        for (std::size_t s = 0; s < ns; ++s) {
            MatrixCell& cell = result.cells[m * ns + s];
            if (spec.schemes[s] == "unprotected") cell = base;
            cell.cycles = memsim::normalize(cell.cycles, base.cycles);
            cell.normalized_traffic =
                base.stats.total_bytes() == 0
                    ? 1.0
                    : static_cast<double>(cell.stats.total_bytes()) /
                          static_cast<double>(base.stats.total_bytes());
        }
        const auto& layers = models[m].layers;
        std::vector<workload::TilingPlan> plans;
        for (const auto& l : layers) plans.push_back(workload::build_tiling_plan(l, spec.npu));
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const workload::TilingPlan* next = i + 1 < plans.size() ? &plans[i + 1] : nullptr;
            result.optblk.push_back(
                workload::select_opt_blk(plans[i], next, workload::kOptBlkCandidates));
            result.optblk_workload.push_back(models[m].name);
        }
    }
    return result;
}

std::vector<std::string> check_invariants(const MatrixResult& result) {
    std::vector<std::string> violations;
    auto fail = [&](std::string msg) { violations.push_back(std::move(msg)); };

    for (const auto& c : result.cells) {
        const MatrixCell& base = baseline_of(result, c.workload);
        if (c.stats.data_bytes() != base.stats.data_bytes())
            fail(fmt::format("{}/{}: data bytes {} != {}", c.workload, c.scheme,
                             c.stats.data_bytes(), base.stats.data_bytes()));
        for (const auto* cc : {&c.vn_cache, &c.mac_cache}) {
            if (cc->hits + cc->misses != cc->lookups)
                fail(fmt::format("{}/{}: cache hits + misses != lookups", c.workload, c.scheme));
            if (cc->writeback_bytes > cc->dirty_bytes_created)
                fail(fmt::format("{}/{}: cache wrote back more than it dirtied", c.workload,
                                 c.scheme));
        }
        for (std::size_t ch = 0; ch < c.cycles.channel_busy_cycles.size(); ++ch)
            if (c.cycles.channel_busy_cycles[ch] > static_cast<double>(c.cycles.total_cycles))
                fail(fmt::format("{}/{}: channel {} busy beyond total", c.workload, c.scheme, ch));
        if (c.stats.metadata_bytes() < base.stats.metadata_bytes() ||
            c.cycles.total_cycles < base.cycles.total_cycles)
            fail(fmt::format("{}/{}: cheaper than unprotected", c.workload, c.scheme));
    }

    static constexpr std::pair<std::string_view, std::string_view> kOrder[] = {
        {"sgx_64", "mgx_64"}, {"mgx_64", "mgx_512"}, {"mgx_512", "seda"}, {"sgx_64", "sgx_512"}};
    std::vector<std::string> workloads;
    for (const auto& b : result.baselines) workloads.push_back(b.workload);
    for (const auto& w : workloads) {
        for (const auto& [hi, lo] : kOrder) {
            const MatrixCell* a = find_cell(result, w, hi);
            const MatrixCell* b = find_cell(result, w, lo);
            if (!a || !b) continue;
            if (a->stats.metadata_bytes() < b->stats.metadata_bytes())
                fail(fmt::format("{}: metadata bytes {} ({}) < {} ({})", w, hi,
                                 a->stats.metadata_bytes(), lo, b->stats.metadata_bytes()));
            if (a->cycles.total_cycles < b->cycles.total_cycles)
                fail(fmt::format("{}: runtime {} ({}) < {} ({})", w, hi, a->cycles.total_cycles,
                                 lo, b->cycles.total_cycles));
        }
    }
    return violations;
}

std::string traffic_csv(const MatrixResult& result, const ExperimentSpec& spec) {
    std::string out =
        "workload,profile,scheme,granularity,data_bytes,vn_bytes,mac_bytes,tree_bytes,"
        "metadata_bytes,total_bytes,normalized_traffic,delta_vs_unprotected,delta_vs_sgx_64\n";
    for (const auto& c : result.cells) {
        const std::string granularity =
            c.scheme == "seda" ? "optblk"
                               : c.scheme == "unprotected"
                                     ? "-"
                                     : std::to_string(scheme_config(spec, c.scheme).protection_block_bytes);
        const MatrixCell* sgx = find_cell(result, c.workload, "sgx_64");
        const std::string vs_sgx =
            sgx && sgx->stats.total_bytes()
                ? fixed(static_cast<double>(c.stats.total_bytes()) /
                            static_cast<double>(sgx->stats.total_bytes()) -
                        1.0)
                : "";
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", c.workload, spec.profile,
                           c.scheme, granularity, c.stats.data_bytes(), c.stats.vn_bytes(),
                           c.stats.mac_bytes(), c.stats.tree_bytes(), c.stats.metadata_bytes(),
                           c.stats.total_bytes(), fixed(c.normalized_traffic),
                           fixed(c.normalized_traffic - 1.0), vs_sgx);
    }
    return out;
}

std::string performance_csv(const MatrixResult& result, const ExperimentSpec& spec) {
    std::string out =
        "workload,profile,scheme,total_cycles,max_channel_busy_cycles,data_bytes,"
        "metadata_bytes,normalized_runtime\n";
    for (const auto& c : result.cells) {
        double busy = 0;
        for (double b : c.cycles.channel_busy_cycles) busy = std::max(busy, b);
        out += fmt::format("{},{},{},{},{:.3f},{},{},{}\n", c.workload, spec.profile, c.scheme,
                           c.cycles.total_cycles, busy, c.cycles.data_bytes,
                           c.cycles.metadata_bytes, fixed(c.cycles.normalized_runtime));
    }
    return out;
}

std::string optblk_csv(const MatrixResult& result) {
    std::string out = "workload,layer_id,block_bytes,score_bytes,redundant_mac_bytes\n";
    for (std::size_t i = 0; i < result.optblk.size(); ++i) {
        const auto& o = result.optblk[i];
        out += fmt::format("{},{},{},{},{}\n", result.optblk_workload[i], o.layer_id,
                           o.block_bytes, o.score_bytes, o.redundant_mac_bytes);
    }
    return out;
}

std::string attacks_csv(const ExperimentSpec& spec, const adversary::LayerSecrets& secrets) {
    using namespace adversary;
    const AttackScheme campaigns[] = {
        {"seca_shared_otp_64", AttackKind::Seca, EncryptionMode::SharedOtp, MacMode::PositionBound, 64},
        {"seca_pad_group_64", AttackKind::Seca, EncryptionMode::PadGroup, MacMode::PositionBound, 64},
        {"repa_naive_xor", AttackKind::Repa, EncryptionMode::PadGroup, MacMode::Naive, 64},
        {"repa_position_bound", AttackKind::Repa, EncryptionMode::PadGroup, MacMode::PositionBound, 64},
    };
    std::vector<AttackReport> reports(std::size(campaigns));
    parallel_for(reports.size(), spec.jobs, [&](std::size_t i) {
        const auto trials =
            campaigns[i].attack == AttackKind::Seca ? spec.seca_trials : spec.repa_trials;
        reports[i] = run_attack_campaign(campaigns[i], SparseTensorSpec{}, secrets, trials, spec.seed);
    });
    std::string out = attack_csv_header() + "\n";
    for (const auto& r : reports) out += attack_csv_row(r) + "\n";
    return out;
}

std::string cost_model_csv(const ExperimentSpec& spec) {
    const cipher::EngineCostModel model;
    std::string out = "n,variant,area_units,power_units,bandwidth_bytes_per_cycle\n";
    for (auto n : spec.cost_multiples) {
        for (auto v : {cipher::EngineVariant::TAes, cipher::EngineVariant::BAes}) {
            const auto cost = cipher::engine_cost(model, n, v);
            out += fmt::format("{},{},{},{},{}\n", n,
                               v == cipher::EngineVariant::TAes ? "t_aes" : "b_aes",
                               cost.area_units, cost.power_units, cipher::engine_bandwidth(model, n));
        }
    }
    return out;
}

std::string emit_plot_data(const std::vector<std::string>& tables,
                           const std::vector<std::string>& metrics) {
    std::string out = "workload,scheme,metric,value\n";
    for (const auto& table : tables) {
        std::istringstream in(table);
        std::string line;
        if (!std::getline(in, line)) continue;
        const auto header = split_row(line);
        const auto col = [&](std::string_view name) -> std::ptrdiff_t {
            const auto it = std::find(header.begin(), header.end(), name);
            return it == header.end() ? -1 : it - header.begin();
        };
        const auto w = col("workload");
        const auto s = col("scheme");
        if (w < 0 || s < 0) throw Error(ErrorCode::ParseError, "report lacks workload/scheme columns");
        std::vector<std::pair<std::string, std::ptrdiff_t>> wanted;
        for (const auto& m : metrics)
            if (auto c = col(m); c >= 0) wanted.emplace_back(m, c);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto row = split_row(line);
            if (row.size() != header.size())
                throw Error(ErrorCode::ParseError, "report row has the wrong field count");
            for (const auto& [name, c] : wanted)
                out += fmt::format("{},{},{},{}\n", row[w], row[s], name, row[c]);
        }
    }
    return out;
}

RunOutcome run_experiment(const ExperimentSpec& spec) {
    std::string stage = "config";
    try {
        spec.validate();
        const adversary::LayerSecrets secrets = load_secrets();
        stage = "matrix";
        const MatrixResult matrix = run_matrix(spec);
        stage = "invariants";
        const auto violations = check_invariants(matrix);
        stage = "attacks";
        const std::string attacks = attacks_csv(spec, secrets);
        stage = "reports";
        std::filesystem::create_directories(spec.out_dir);
        const std::string traffic = traffic_csv(matrix, spec);
        const std::string performance = performance_csv(matrix, spec);
        write_file(spec.out_dir / "traffic.csv", traffic);
        write_file(spec.out_dir / "performance.csv", performance);
        write_file(spec.out_dir / "attacks.csv", attacks);
        write_file(spec.out_dir / "cost_model.csv", cost_model_csv(spec));
        write_file(spec.out_dir / "optblk.csv", optblk_csv(matrix));
        write_file(spec.out_dir / "plot_data.csv", emit_plot_data({traffic, performance}));
        if (!violations.empty()) {
            std::string msg;
            for (const auto& v : violations) msg += v + "\n";
            return {kExitInvariant, "invariants", msg};
        }
        return {kExitOk, "", ""};
    } catch (const Error& e) {
        const bool config = e.code() == ErrorCode::InvalidConfig ||
                            e.code() == ErrorCode::ParseError || e.code() == ErrorCode::Io ||
                            e.code() == ErrorCode::InvalidLayer;
        return {config ? kExitConfig : kExitInvariant, stage, e.what()};
    } catch (const std::exception& e) {
        return {kExitConfig, stage, e.what()};
    }
}

}  // namespace seda::harness
