#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace polyfsi {

/// One named point-data record; `components` values per point, point-major layout.
struct FieldRecord {
    std::string name;
    int components = 1;
    int points = 0;
    std::vector<double> data;  // size = points * components
};

/// Legacy structured-grid text snapshot: header (dims, spacing, origin), then
/// point-data records. Values are written in shortest round-trip decimal form,
/// so write -> read -> write is bit-stable.
struct StructuredGrid {
    int nx = 0, nz = 0;
    double dx = 0.0, dz = 0.0;
    double ox = 0.0, oz = 0.0;
    std::vector<FieldRecord> fields;
};

void write_grid(const StructuredGrid& g, const std::string& path);
StructuredGrid read_grid(const std::string& path);

/// Line-buffered CSV writer with a versioned schema comment line followed by the
/// column header. All values are written in shortest round-trip decimal form.
class CsvWriter {
   public:
    CsvWriter(const std::string& path, const std::string& schema,
              const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void close();

   private:
    std::ofstream out_;
    std::string path_;
    size_t ncols_;
};

/// Output directory resolution: POLYFSI_OUT_ROOT (when set, non-empty) is
/// prepended to relative run directories. Creates the directory.
std::string resolve_out_dir(const std::string& run_out_dir);

std::string join_path(const std::string& a, const std::string& b);

}  // namespace polyfsi
