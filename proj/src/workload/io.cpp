#include "seda/workload.hpp"

#include "seda/common.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace seda::workload {
namespace {

constexpr std::string_view kLayerHeader = "layer_id,kind,H,W,C,R,S,K,stride";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::ParseError, fmt::format("line {}: {}", line_no, what));
}

template <typename T>
T parse_uint(std::string_view field, std::size_t line_no, std::string_view name, int base = 10) {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value, base);
    if (field.empty() || ec != std::errc{} || ptr != end)
        parse_fail(line_no, fmt::format("bad {} '{}'", name, field));
    return value;
}

LayerKind parse_kind(std::string_view field, std::size_t line_no) {
    if (field == "conv") return LayerKind::Conv;
    if (field == "fc") return LayerKind::Fc;
    if (field == "other") return LayerKind::Other;
    parse_fail(line_no, fmt::format("unknown layer kind '{}'", field));
}

}  // namespace

ModelDescriptor parse_layer_table(std::istream& in, std::string name) {
    ModelDescriptor model{std::move(name), {}};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        if (!header_seen) {
            if (view != kLayerHeader)
                parse_fail(line_no, fmt::format("expected header '{}'", kLayerHeader));
            header_seen = true;
            continue;
        }
        const auto f = split_fields(view);
        if (f.size() != 9) parse_fail(line_no, fmt::format("expected 9 fields, got {}", f.size()));
        LayerDescriptor layer;
        layer.layer_id = parse_uint<std::uint32_t>(f[0], line_no, "layer_id");
        layer.kind = parse_kind(f[1], line_no);
        layer.H = parse_uint<std::uint32_t>(f[2], line_no, "H");
        layer.W = parse_uint<std::uint32_t>(f[3], line_no, "W");
        layer.C = parse_uint<std::uint32_t>(f[4], line_no, "C");
        layer.R = parse_uint<std::uint32_t>(f[5], line_no, "R");
        layer.S = parse_uint<std::uint32_t>(f[6], line_no, "S");
        layer.K = parse_uint<std::uint32_t>(f[7], line_no, "K");
        layer.stride = parse_uint<std::uint32_t>(f[8], line_no, "stride");
        try {
            layer.validate();
        } catch (const Error& e) {
            parse_fail(line_no, e.what());
        }
        if (!model.layers.empty() && layer.layer_id <= model.layers.back().layer_id)
            parse_fail(line_no, "layer ids must be strictly increasing");
        model.layers.push_back(layer);
    }
    if (!header_seen) throw Error(ErrorCode::ParseError, "layer table is empty");
    return model;
}

ModelDescriptor load_layer_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open layer table " + path.string());
    try {
        return parse_layer_table(in, path.stem().string());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

ModelDescriptor load_model(const std::filesystem::path& model_dir, std::string_view name) {
    return load_layer_table(model_dir / (std::string(name) + ".csv"));
}

void write_trace(std::ostream& out, std::span<const TraceEvent> events) {
    out << kTraceHeader << '\n';
    for (const auto& e : events)
        out << fmt::format("{},0x{:x},{},{},{}\n", e.cycle, e.address, e.bytes, to_string(e.dir),
                           to_string(e.cls));
}

std::vector<TraceEvent> parse_trace(std::istream& in) {
    std::vector<TraceEvent> events;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        if (!header_seen) {
            if (view != kTraceHeader)
                parse_fail(line_no, fmt::format("expected header '{}'", kTraceHeader));
            header_seen = true;
            continue;
        }
        const auto f = split_fields(view);
        if (f.size() != 5) parse_fail(line_no, fmt::format("expected 5 fields, got {}", f.size()));
        TraceEvent e;
        e.cycle = parse_uint<std::uint64_t>(f[0], line_no, "cycle");
        std::string_view addr = f[1];
        if (!addr.starts_with("0x")) parse_fail(line_no, fmt::format("address '{}' lacks 0x", addr));
        addr.remove_prefix(2);
        e.address = parse_uint<std::uint64_t>(addr, line_no, "address", 16);
        e.bytes = parse_uint<std::uint32_t>(f[2], line_no, "bytes");
        if (e.bytes == 0) parse_fail(line_no, "bytes must be positive");
        if (f[3] == "read") e.dir = Direction::Read;
        else if (f[3] == "write") e.dir = Direction::Write;
        else parse_fail(line_no, fmt::format("bad dir '{}'", f[3]));
        if (f[4] == "data") e.cls = EventClass::Data;
        else if (f[4] == "vn") e.cls = EventClass::Vn;
        else if (f[4] == "mac") e.cls = EventClass::Mac;
        else if (f[4] == "tree_node") e.cls = EventClass::TreeNode;
        else parse_fail(line_no, fmt::format("bad class '{}'", f[4]));
        if (!events.empty() && e.cycle < events.back().cycle)
            throw Error(ErrorCode::NonMonotonicCycle,
                        fmt::format("line {}: cycle {} after {}", line_no, e.cycle,
                                    events.back().cycle));
        events.push_back(e);
    }
    if (!header_seen) throw Error(ErrorCode::ParseError, "trace file is empty");
    return events;
}

void save_trace_file(const std::filesystem::path& path, std::span<const TraceEvent> events) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write trace " + path.string());
    write_trace(out, events);
}

std::vector<TraceEvent> load_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open trace " + path.string());
    return parse_trace(in);
}

}  // namespace seda::workload
