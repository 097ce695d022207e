#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mca/io.hpp"

namespace mca::io {

namespace {

std::string strip(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_cell(const std::string &cell, std::size_t row, std::size_t col,
                  const std::filesystem::path &path)
{
    const std::string t = strip(cell);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw DataError(path.string() + ": non-numeric cell at row " +
                        std::to_string(row) + ", column " +
                        std::to_string(col) + " ('" + t + "')");
    }
    return v;
}

std::vector<std::string> split_commas(const std::string &line)
{
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        out.push_back(cur);
    }
    if (!line.empty() && line.back() == ',') {
        out.push_back("");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Ensemble load_ensemble(const std::filesystem::path &csv,
                       const std::filesystem::path &sidecar)
{
    std::ifstream in = open_in(csv);
    Ensemble e;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const std::string t = strip(line);
        if (t.empty()) {
            continue;
        }
        const auto cells = split_commas(t);
        std::vector<double> s;
        s.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); c++) {
            s.push_back(parse_cell(cells[c], row, c, csv));
        }
        if (!e.series.empty() && s.size() != e.series[0].size()) {
            throw DataError(csv.string() + ": ragged row " +
                            std::to_string(row) + " (expected " +
                            std::to_string(e.series[0].size()) + " cells, got " +
                            std::to_string(s.size()) + ")");
        }
        e.series.push_back(std::move(s));
        row++;
    }
    if (e.series.empty()) {
        throw DataError(csv.string() + ": empty ensemble");
    }

    if (!sidecar.empty()) {
        const auto kv = load_keyvalue(sidecar);
        if (auto it = kv.find("dt"); it != kv.end()) {
            e.dt = std::stod(it->second);
        }
        if (auto it = kv.find("grid_w"); it != kv.end()) {
            e.grid_w = std::stoi(it->second);
        }
        if (auto it = kv.find("grid_h"); it != kv.end()) {
            e.grid_h = std::stoi(it->second);
        }
        if (auto it = kv.find("coords"); it != kv.end()) {
            std::filesystem::path cp(it->second);
            if (cp.is_relative()) {
                cp = sidecar.parent_path() / cp;
            }
            std::ifstream cin_ = open_in(cp);
            std::vector<GridCoord> grid(e.count());
            std::vector<bool> seen(e.count(), false);
            std::string cl;
            std::size_t crow = 0;
            while (std::getline(cin_, cl)) {
                const std::string ct = strip(cl);
                if (ct.empty() || ct[0] == '#') {
                    continue;
                }
                const auto cells = split_commas(ct);
                if (cells.size() != 3) {
                    throw DataError(cp.string() + ": coords row " +
                                    std::to_string(crow) +
                                    " needs series_index,row,col");
                }
                const auto idx = static_cast<std::size_t>(
                    parse_cell(cells[0], crow, 0, cp));
                if (idx >= e.count()) {
                    throw DataError(cp.string() + ": series index " +
                                    std::to_string(idx) + " out of range");
                }
                grid[idx].row =
                    static_cast<int>(parse_cell(cells[1], crow, 1, cp));
                grid[idx].col =
                    static_cast<int>(parse_cell(cells[2], crow, 2, cp));
                seen[idx] = true;
                crow++;
            }
            for (std::size_t i = 0; i < e.count(); i++) {
                if (!seen[i]) {
                    throw DataError(cp.string() + ": missing coordinates for series " +
                                    std::to_string(i));
                }
            }
            e.grid = std::move(grid);
        }
    }
    e.validate();
    return e;
}

void save_ensemble(const Ensemble &e, const std::filesystem::path &csv,
                   const std::filesystem::path &sidecar)
{
    std::ofstream out = open_out(csv);
    for (const auto &s : e.series) {
        for (std::size_t t = 0; t < s.size(); t++) {
            if (t > 0) {
                out << ',';
            }
            out << format_double(s[t]);
        }
        out << '\n';
    }
    if (!sidecar.empty()) {
        std::map<std::string, std::string> kv;
        kv["dt"] = format_double(e.dt);
        if (e.grid) {
            kv["grid_w"] = std::to_string(e.grid_w);
            kv["grid_h"] = std::to_string(e.grid_h);
            const std::filesystem::path cp =
                sidecar.parent_path() /
                (sidecar.stem().string() + ".coords.csv");
            std::ofstream cout_ = open_out(cp);
            for (std::size_t i = 0; i < e.grid->size(); i++) {
                cout_ << i << ',' << (*e.grid)[i].row << ','
                      << (*e.grid)[i].col << '\n';
            }
            kv["coords"] = cp.filename().string();
        }
        save_keyvalue(kv, sidecar);
    }
}

std::vector<RegionMask> load_region_masks(const std::filesystem::path &path)
{
    std::ifstream in = open_in(path);
    std::map<std::string, RegionMask> by_name;
    std::vector<std::string> order;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const std::string t = strip(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto cells = split_commas(t);
        if (cells.size() != 2) {
            throw DataError(path.string() + ": mask row " +
                            std::to_string(row) +
                            " needs series_index,region_name");
        }
        const auto idx =
            static_cast<std::size_t>(parse_cell(cells[0], row, 0, path));
        const std::string name = strip(cells[1]);
        if (by_name.find(name) == by_name.end()) {
            by_name[name] = RegionMask{name, {}};
            order.push_back(name);
        }
        by_name[name].members.push_back(idx);
        row++;
    }
    std::vector<RegionMask> masks;
    for (const auto &name : order) {
        RegionMask m = by_name[name];
        std::sort(m.members.begin(), m.members.end());
        masks.push_back(std::move(m));
    }
    return masks;
}

void save_region_masks(const std::vector<RegionMask> &masks,
                       const std::filesystem::path &path)
{
    std::ofstream out = open_out(path);
    for (const auto &m : masks) {
        for (const auto idx : m.members) {
            out << idx << ',' << m.name << '\n';
        }
    }
}

void save_matrix_csv(const std::vector<double> &values, std::size_t n,
                     const std::filesystem::path &path)
{
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < n; j++) {
            if (j > 0) {
                out << ',';
            }
            out << format_double(values[i * n + j]);
        }
        out << '\n';
    }
}

std::pair<std::vector<double>, std::size_t>
load_matrix_csv(const std::filesystem::path &path)
{
    std::ifstream in = open_in(path);
    std::vector<double> values;
    std::size_t n = 0;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const std::string t = strip(line);
        if (t.empty()) {
            continue;
        }
        const auto cells = split_commas(t);
        if (n == 0) {
            n = cells.size();
        } else if (cells.size() != n) {
            throw DataError(path.string() + ": ragged row " +
                            std::to_string(row));
        }
        for (std::size_t c = 0; c < cells.size(); c++) {
            values.push_back(parse_cell(cells[c], row, c, path));
        }
        row++;
    }
    if (row != n) {
        throw DataError(path.string() + ": matrix is not square (" +
                        std::to_string(row) + "x" + std::to_string(n) + ")");
    }
    return {values, n};
}

void save_matrix_binary(const std::vector<double> &values, std::size_t n,
                        const std::filesystem::path &path)
{
    std::ofstream out = open_out(path);
    out.write("MCA1", 4);
    const std::uint32_t n32 = static_cast<std::uint32_t>(n);
    unsigned char nb[4] = {
        static_cast<unsigned char>(n32 & 0xff),
        static_cast<unsigned char>((n32 >> 8) & 0xff),
        static_cast<unsigned char>((n32 >> 16) & 0xff),
        static_cast<unsigned char>((n32 >> 24) & 0xff),
    };
    out.write(reinterpret_cast<const char *>(nb), 4);
    for (double v : values) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof(bits));
        unsigned char b[8];
        for (int k = 0; k < 8; k++) {
            b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
        }
        out.write(reinterpret_cast<const char *>(b), 8);
    }
}

std::pair<std::vector<double>, std::size_t>
load_matrix_binary(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MCA1", 4) != 0) {
        throw DataError(path.string() + ": bad magic (expected MCA1)");
    }
    unsigned char nb[4];
    in.read(reinterpret_cast<char *>(nb), 4);
    if (!in) {
        throw DataError(path.string() + ": truncated header");
    }
    const std::uint32_t n = static_cast<std::uint32_t>(nb[0]) |
                            (static_cast<std::uint32_t>(nb[1]) << 8) |
                            (static_cast<std::uint32_t>(nb[2]) << 16) |
                            (static_cast<std::uint32_t>(nb[3]) << 24);
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    for (double &v : values) {
        unsigned char b[8];
        in.read(reinterpret_cast<char *>(b), 8);
        if (!in) {
            throw DataError(path.string() + ": truncated payload");
        }
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; k++) {
            bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
        }
        std::memcpy(&v, &bits, sizeof(v));
    }
    return {values, n};
}

std::map<std::string, std::string>
load_keyvalue(const std::filesystem::path &path)
{
    std::ifstream in = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = strip(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw DataError(path.string() + ": expected key=value, got '" + t +
                            "'");
        }
        kv[strip(t.substr(0, eq))] = strip(t.substr(eq + 1));
    }
    return kv;
}

void save_keyvalue(const std::map<std::string, std::string> &kv,
                   const std::filesystem::path &path)
{
    std::ofstream out = open_out(path);
    for (const auto &[k, v] : kv) {
        out << k << '=' << v << '\n';
    }
}

std::string file_digest(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; i++) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(h));
    return hex;
}

} // namespace mca::io
