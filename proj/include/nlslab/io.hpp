#pragma once

// Persistence: CSV tables with a fixed column order and %.17g numbers, and
// field snapshots as little-endian float64 blobs with a JSON sidecar.

#include "euler_poisson.hpp"
#include "spectral.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(const std::vector<double>& row)
    {
        if (row.size() != columns_.size()) throw IoError("csv: row width does not match header");
        rows_.push_back(row);
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    std::string str() const
    {
        std::string out;
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
        out += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_double(r[i]);
            out += '\n';
        }
        return out;
    }

    void write(const std::filesystem::path& p) const
    {
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot write " + p.string());
        f << str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

inline CsvTable read_csv(const std::filesystem::path& p)
{
    std::ifstream f(p);
    if (!f) throw IoError("cannot read " + p.string());
    std::string line;
    if (!std::getline(f, line)) throw IoError("empty csv: " + p.string());
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    CsvTable t(cols);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) row.push_back(std::stod(c));
        t.add(row);
    }
    return t;
}

// Sample table of a state: x, rho, v.
inline CsvTable snapshot_table(const PlasmaState& s)
{
    CsvTable t({"x", "rho", "v"});
    for (std::size_t i = 0; i < s.grid.size(); ++i) t.add({s.grid.x(i), s.rho[i], s.v[i]});
    return t;
}

// Snapshot: <stem>.bin holds rho then v as float64 LE; <stem>.json the metadata.
inline void write_snapshot(const std::filesystem::path& stem, const PlasmaState& s)
{
    static_assert(std::endian::native == std::endian::little, "snapshots assume a little-endian host");
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    nlohmann::ordered_json meta;
    meta["L"] = s.grid.length();
    meta["N"] = s.grid.size();
    meta["t"] = s.t;
    meta["components"] = {"rho", "v"};
    meta["dtype"] = "float64-le";
    meta["convention"] = "paper-2pi";
    std::ofstream j(stem.string() + ".json");
    if (!j) throw IoError("cannot write snapshot sidecar");
    j << meta.dump(2) << '\n';
    std::ofstream b(stem.string() + ".bin", std::ios::binary);
    if (!b) throw IoError("cannot write snapshot data");
    b.write(reinterpret_cast<const char*>(s.rho.data()), static_cast<std::streamsize>(s.rho.size() * sizeof(double)));
    b.write(reinterpret_cast<const char*>(s.v.data()), static_cast<std::streamsize>(s.v.size() * sizeof(double)));
}

inline PlasmaState read_snapshot(const std::filesystem::path& stem)
{
    std::ifstream j(stem.string() + ".json");
    if (!j) throw IoError("cannot read snapshot sidecar");
    const auto meta = nlohmann::json::parse(j);
    if (meta.at("convention") != "paper-2pi") throw IoError("snapshot: unknown Fourier convention");
    const PeriodicGrid g(meta.at("L").get<double>(), meta.at("N").get<std::size_t>());
    PlasmaState s{g, meta.at("t").get<double>(), RVec(g.size()), RVec(g.size())};
    std::ifstream b(stem.string() + ".bin", std::ios::binary);
    if (!b) throw IoError("cannot read snapshot data");
    b.read(reinterpret_cast<char*>(s.rho.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
    b.read(reinterpret_cast<char*>(s.v.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
    if (!b) throw IoError("snapshot data truncated");
    return s;
}

} // namespace nlslab
