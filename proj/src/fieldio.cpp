#include "polyfsi/fieldio.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "polyfsi/errors.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

std::string format_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kMagic = "POLYFSI-GRID";
constexpr int kVersion = 1;

double parse_double(const std::string& tok, const std::string& path, int lineno) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
    return v;
}

long parse_long(const std::string& tok, const std::string& path, int lineno) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad integer '" + tok + "'");
    return v;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

void write_grid(const StructuredGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << kMagic << " " << kVersion << "\n";
    out << "DIMS " << g.nx << " " << g.nz << "\n";
    out << "SPACING " << format_full(g.dx) << " " << format_full(g.dz) << "\n";
    out << "ORIGIN " << format_full(g.ox) << " " << format_full(g.oz) << "\n";
    out << "FIELDS " << g.fields.size() << "\n";
    for (const FieldRecord& f : g.fields) {
        if (f.data.size() != static_cast<size_t>(f.points) * f.components)
            throw ConfigError("field '" + f.name + "': data size does not match points*components");
        out << "FIELD " << f.name << " " << f.components << " " << f.points << "\n";
        for (int p = 0; p < f.points; ++p) {
            for (int c = 0; c < f.components; ++c) {
                if (c) out << " ";
                out << format_full(f.data[static_cast<size_t>(p) * f.components + c]);
            }
            out << "\n";
        }
    }
    if (!out) throw ConfigError("write failure: " + path);
}

StructuredGrid read_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    StructuredGrid g;
    std::string line;
    int lineno = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unexpected end of file");
        ++lineno;
    };
    next_line();
    {
        const auto t = split_ws(line);
        if (t.size() != 2 || t[0] != kMagic || parse_long(t[1], path, lineno) != kVersion)
            throw ConfigError(path + ":1: not a version-" + std::to_string(kVersion) +
                              " structured-grid file");
    }
    next_line();
    {
        const auto t = split_ws(line);
        if (t.size() != 3 || t[0] != "DIMS")
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected DIMS");
        g.nx = static_cast<int>(parse_long(t[1], path, lineno));
        g.nz = static_cast<int>(parse_long(t[2], path, lineno));
    }
    next_line();
    {
        const auto t = split_ws(line);
        if (t.size() != 3 || t[0] != "SPACING")
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected SPACING");
        g.dx = parse_double(t[1], path, lineno);
        g.dz = parse_double(t[2], path, lineno);
    }
    next_line();
    {
        const auto t = split_ws(line);
        if (t.size() != 3 || t[0] != "ORIGIN")
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected ORIGIN");
        g.ox = parse_double(t[1], path, lineno);
        g.oz = parse_double(t[2], path, lineno);
    }
    next_line();
    long nfields = 0;
    {
        const auto t = split_ws(line);
        if (t.size() != 2 || t[0] != "FIELDS")
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected FIELDS");
        nfields = parse_long(t[1], path, lineno);
        if (nfields < 0) throw ConfigError(path + ": negative field count");
    }
    for (long k = 0; k < nfields; ++k) {
        next_line();
        const auto t = split_ws(line);
        if (t.size() != 4 || t[0] != "FIELD")
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected FIELD");
        FieldRecord f;
        f.name = t[1];
        f.components = static_cast<int>(parse_long(t[2], path, lineno));
        f.points = static_cast<int>(parse_long(t[3], path, lineno));
        if (f.components < 1 || f.points < 0)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad field shape");
        f.data.reserve(static_cast<size_t>(f.points) * f.components);
        for (int p = 0; p < f.points; ++p) {
            next_line();
            const auto vals = split_ws(line);
            if (static_cast<int>(vals.size()) != f.components)
                throw ConfigError(path + ":" + std::to_string(lineno) +
                                  ": expected " + std::to_string(f.components) + " components");
            for (const std::string& v : vals) f.data.push_back(parse_double(v, path, lineno));
        }
        g.fields.push_back(std::move(f));
    }
    return g;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns)
    : out_(path), path_(path), ncols_(columns.size()) {
    if (!out_) throw ConfigError("cannot open for writing: " + path);
    out_ << "# schema " << schema << "\n";
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ",";
        out_ << columns[i];
    }
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != ncols_)
        throw ConfigError("csv row width mismatch in " + path_);
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ",";
        out_ << format_full(values[i]);
    }
    out_ << "\n";
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw ConfigError("write failure: " + path_);
    out_.close();
}

std::string join_path(const std::string& a, const std::string& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return (std::filesystem::path(a) / b).string();
}

std::string resolve_out_dir(const std::string& run_out_dir) {
    std::string dir = run_out_dir.empty() ? std::string("out") : run_out_dir;
    const char* root = std::getenv("POLYFSI_OUT_ROOT");
    if (root && *root && !std::filesystem::path(dir).is_absolute()) dir = join_path(root, dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace polyfsi
