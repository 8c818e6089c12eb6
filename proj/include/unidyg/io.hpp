#pragma once

// Dataset and model IO: CSV loaders for the two event-stream layouts,
// event-stream writers, JSON sidecar metadata, and bit-exact binary
// checkpoints for named parameter sets.

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unidyg/autograd.hpp"
#include "unidyg/graph.hpp"

namespace unidyg {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                                      std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    header = split_csv_line(line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

}  // namespace detail

// Continuous-time layout: header `src,dst,t[,feat_0,...]`, one event
// per row, rows must be sorted by t.
inline std::vector<Event> load_ctdg_csv(const std::string& path) {
    std::vector<std::string> header;
    auto rows = detail::read_csv(path, header);
    if (header.size() < 3 || header[0] != "src" || header[1] != "dst" || header[2] != "t")
        throw std::runtime_error(path + ": expected header src,dst,t[,feat_*]");
    std::vector<Event> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.size() != header.size())
            throw std::runtime_error(path + ": ragged row");
        Event e;
        e.src = std::stoll(r[0]);
        e.dst = std::stoll(r[1]);
        e.t = std::stod(r[2]);
        for (std::size_t c = 3; c < r.size(); ++c) e.features.push_back(std::stod(r[c]));
        if (!out.empty() && e.t < out.back().t)
            throw std::runtime_error(path + ": events must be sorted by t");
        out.push_back(std::move(e));
    }
    return out;
}

// Discrete-time layout: header `snapshot,src,dst[,feat_0,...]`, one
// edge per row, snapshot indices non-decreasing down the file.
inline std::vector<SnapshotGraph> load_dtdg_csv(const std::string& path) {
    std::vector<std::string> header;
    auto rows = detail::read_csv(path, header);
    if (header.size() < 3 || header[0] != "snapshot" || header[1] != "src" ||
        header[2] != "dst")
        throw std::runtime_error(path + ": expected header snapshot,src,dst[,feat_*]");
    std::vector<SnapshotGraph> out;
    for (const auto& r : rows) {
        if (r.size() != header.size())
            throw std::runtime_error(path + ": ragged row");
        std::int64_t idx = std::stoll(r[0]);
        if (out.empty() || out.back().index != idx) {
            if (!out.empty() && idx < out.back().index)
                throw std::runtime_error(path + ": snapshot indices must not decrease");
            out.push_back(SnapshotGraph{idx, {}});
        }
        SnapshotEdge e;
        e.src = std::stoll(r[1]);
        e.dst = std::stoll(r[2]);
        for (std::size_t c = 3; c < r.size(); ++c) e.features.push_back(std::stod(r[c]));
        out.back().edges.push_back(std::move(e));
    }
    return out;
}

inline void write_events_csv(const std::string& path, const std::vector<Event>& events) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::size_t feat_dim = events.empty() ? 0 : events.front().features.size();
    out << "src,dst,t";
    for (std::size_t f = 0; f < feat_dim; ++f) out << ",feat_" << f;
    out << "\n";
    out.precision(17);
    for (const auto& e : events) {
        out << e.src << "," << e.dst << "," << e.t;
        for (double v : e.features) out << "," << v;
        out << "\n";
    }
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

// ---------------------------------------------------------------------
// Checkpoints. Binary, name-keyed, doubles stored verbatim so a reload
// is bit-identical.

inline void save_checkpoint(const std::string& path,
                            const std::vector<Parameter*>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const char magic[8] = {'U', 'D', 'G', 'C', 'K', 'P', 'T', '1'};
    out.write(magic, 8);
    std::uint64_t count = params.size();
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const Parameter* p : params) {
        std::uint64_t name_len = p->name.size();
        std::uint64_t val_len = p->value.size();
        out.write(reinterpret_cast<const char*>(&name_len), 8);
        out.write(p->name.data(), long(name_len));
        out.write(reinterpret_cast<const char*>(&val_len), 8);
        out.write(reinterpret_cast<const char*>(p->value.data()), long(val_len * 8));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void load_checkpoint(const std::string& path,
                            const std::vector<Parameter*>& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "UDGCKPT1", 8) != 0)
        throw std::runtime_error(path + ": not a checkpoint file");
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 8);
    std::map<std::string, Vec> stored;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t name_len = 0, val_len = 0;
        in.read(reinterpret_cast<char*>(&name_len), 8);
        std::string name(name_len, '\0');
        in.read(name.data(), long(name_len));
        in.read(reinterpret_cast<char*>(&val_len), 8);
        Vec value(val_len);
        in.read(reinterpret_cast<char*>(value.data()), long(val_len * 8));
        if (!in) throw std::runtime_error(path + ": truncated checkpoint");
        stored[name] = std::move(value);
    }
    for (Parameter* p : params) {
        auto it = stored.find(p->name);
        if (it == stored.end())
            throw std::runtime_error(path + ": missing parameter " + p->name);
        if (it->second.size() != p->value.size())
            throw std::runtime_error(path + ": size mismatch for " + p->name);
        p->value = it->second;
    }
}

}  // namespace unidyg
