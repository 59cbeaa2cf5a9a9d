#include "seda/harness.hpp"

#include "seda/common.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>

#ifndef SEDA_MODEL_DIR
#define SEDA_MODEL_DIR "data/models"
#endif

namespace seda::harness {
namespace pt = boost::property_tree;

namespace {

// Test-fixture keys; campaigns override them through the environment.
constexpr std::string_view kFixtureEncKey = "2b7e151628aed2a6abf7158809cf4f3c";
constexpr std::string_view kFixtureMacKey = "000102030405060708090a0b0c0d0e0f";

[[noreturn]] void config_fail(const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, what);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        config_fail(fmt::format("{}: bad number '{}'", key, text));
    return value;
}

double parse_double(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        config_fail(fmt::format("{}: bad number '{}'", key, text));
    return v;
}

Block128 key_from_env(const char* var, std::string_view fallback) {
    const char* v = std::getenv(var);
    const std::string_view text = v && *v ? std::string_view(v) : fallback;
    try {
        return block_from_hex(text);
    } catch (const Error&) {
        config_fail(fmt::format("{} must hold 32 hex digits", var));
    }
}

}  // namespace

std::vector<std::string> split_list(std::string_view csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = std::min(csv.find(',', start), csv.size());
        std::string_view item = csv.substr(start, comma - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.emplace_back(item);
        start = comma + 1;
    }
    return out;
}

void ExperimentSpec::validate() const {
    npu.validate();
    if (schemes.empty()) config_fail("scheme list is empty");
    if (models.empty()) config_fail("model list is empty");
    std::set<std::string> seen;
    for (const auto& s : schemes) {
        schemes::scheme_from_label(s);
        if (!seen.insert(s).second) config_fail(fmt::format("scheme '{}' listed twice", s));
    }
    seen.clear();
    for (const auto& m : models)
        if (!seen.insert(m).second) config_fail(fmt::format("model '{}' listed twice", m));
    if (seca_trials == 0 || repa_trials == 0) config_fail("attack trial counts must be positive");
    for (auto n : cost_multiples)
        if (n == 0) config_fail("cost multiples must be positive");
}

ExperimentSpec default_spec() {
    ExperimentSpec spec;
    spec.model_dir = SEDA_MODEL_DIR;
    return spec;
}

void apply_config(std::istream& in, ExperimentSpec& spec) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        config_fail(fmt::format("config line {}: {}", e.line(), e.message()));
    }
    for (const auto& [section, body] : tree) {
        for (const auto& [key, node] : body) {
            const std::string value = node.get_value<std::string>();
            const std::string full = section + "." + key;
            if (section == "experiment") {
                if (key == "profile") {
                    spec.profile = value;
                    if (value != "custom") spec.npu = workload::npu_profile(value);
                } else if (key == "schemes") spec.schemes = split_list(value);
                else if (key == "models") spec.models = split_list(value);
                else if (key == "seed") spec.seed = parse_number<std::uint64_t>(full, value);
                else if (key == "out") spec.out_dir = value;
                else if (key == "model_dir") spec.model_dir = value;
                else if (key == "jobs") spec.jobs = parse_number<unsigned>(full, value);
                else config_fail(fmt::format("unknown key '{}'", full));
            } else if (section == "npu") {
                auto& n = spec.npu;
                if (key == "pe_rows") n.pe_rows = parse_number<std::uint32_t>(full, value);
                else if (key == "pe_cols") n.pe_cols = parse_number<std::uint32_t>(full, value);
                else if (key == "sram_bytes") n.sram_bytes = parse_number<std::uint64_t>(full, value);
                else if (key == "freq_ghz") n.freq_ghz = parse_double(full, value);
                else if (key == "dram_channels")
                    n.dram_channels = parse_number<std::uint32_t>(full, value);
                else if (key == "dram_gbps_per_channel")
                    n.dram_gbps_per_channel = parse_double(full, value);
                else if (key == "element_bytes")
                    n.element_bytes = parse_number<std::uint32_t>(full, value);
                else config_fail(fmt::format("unknown key '{}'", full));
                n.name = "custom";
                spec.profile = "custom";
            } else if (section == "seda") {
                if (key == "layer_mac_residency") {
                    if (value == "on_chip") spec.layer_mac_residency = schemes::LayerMacResidency::OnChip;
                    else if (value == "off_chip")
                        spec.layer_mac_residency = schemes::LayerMacResidency::OffChip;
                    else config_fail(fmt::format("{}: expected on_chip or off_chip", full));
                } else if (key == "layer_verify") {
                    if (value == "speculative") spec.layer_verify = schemes::LayerVerifyMode::Speculative;
                    else if (value == "stall") spec.layer_verify = schemes::LayerVerifyMode::Stall;
                    else config_fail(fmt::format("{}: expected speculative or stall", full));
                } else config_fail(fmt::format("unknown key '{}'", full));
            } else if (section == "attacks") {
                if (key == "seca_trials") spec.seca_trials = parse_number<std::uint64_t>(full, value);
                else if (key == "repa_trials")
                    spec.repa_trials = parse_number<std::uint64_t>(full, value);
                else config_fail(fmt::format("unknown key '{}'", full));
            } else if (section == "cost_model") {
                if (key == "multiples") {
                    spec.cost_multiples.clear();
                    for (const auto& item : split_list(value))
                        spec.cost_multiples.push_back(parse_number<std::uint32_t>(full, item));
                } else config_fail(fmt::format("unknown key '{}'", full));
            } else {
                config_fail(fmt::format("unknown section '{}'", section));
            }
        }
    }
}

void apply_config_file(const std::filesystem::path& path, ExperimentSpec& spec) {
    std::ifstream in(path);
    if (!in) config_fail("cannot open config " + path.string());
    try {
        apply_config(in, spec);
    } catch (const Error& e) {
        config_fail(path.string() + ": " + e.what());
    }
}

adversary::LayerSecrets load_secrets() {
    adversary::LayerSecrets s;
    s.enc_key.bytes = key_from_env("SEDA_ENC_KEY", kFixtureEncKey);
    s.mac_key.bytes = key_from_env("SEDA_MAC_KEY", kFixtureMacKey);
    return s;
}

schemes::SchemeConfig scheme_config(const ExperimentSpec& spec, std::string_view label) {
    schemes::SchemeConfig c = schemes::scheme_from_label(label);
    c.layer_mac_residency = spec.layer_mac_residency;
    c.layer_verify = spec.layer_verify;
    return c;
}

}  // namespace seda::harness
