#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sboltz/coefficients.hpp"
#include "sboltz/galerkin.hpp"
#include "sboltz/state.hpp"

namespace sboltz {

// Uniform tensor grid on [-extent, extent]^3 including both endpoints.
struct VelocityGrid {
    double extent = 8.0;
    int points_per_axis = 64;

    void validate() const;
    double spacing() const { return 2.0 * extent / (points_per_axis - 1); }
    double coord(int i) const { return -extent + i * spacing(); }
};

struct DensityField {
    VelocityGrid grid;
    std::vector<double> values;  // index (i * P + j) * P + k for (v1, v2, v3)
    double max_imag_residual = 0.0;

    double at(int i, int j, int k) const {
        const std::size_t P = std::size_t(grid.points_per_axis);
        return values[(std::size_t(i) * P + std::size_t(j)) * P + std::size_t(k)];
    }
};

double maxwellian(const Vec3& v);

// f = mu + sqrt(mu) * sum g_{n,l,m} phi_{n,l,m} on the grid.
DensityField reconstruct_f(const SpectralState& state, const VelocityGrid& grid);

// Trapezoidal integral of the field over the grid box.
double field_integral(const DensityField& field);

enum class TableFormat { binary, json };

// SHA-256 (hex) of the canonical binary encoding of the parameters and every coefficient.
std::string table_digest(const CoeffTable& table);

void write_table(const CoeffTable& table, const std::string& path, TableFormat format = TableFormat::binary);
// Format is detected from the first byte. Throws VersionMismatchError,
// DigestMismatchError or MalformedFileError.
CoeffTable read_table(const std::string& path);

std::string table_to_bytes(const CoeffTable& table, TableFormat format);
CoeffTable table_from_bytes(const std::string& bytes);

// One row per time: t, re/im per mode in canonical order, then named monitor columns.
struct Series {
    std::vector<double> times;
    std::vector<SpectralState> states;
    std::vector<std::pair<std::string, std::vector<double>>> monitors;
};

Series series_from_run(const IntegrationResult& run);
std::string series_csv(const Series& series, const std::vector<ModeIndex>& modes);
void write_series(const Series& series, const std::vector<ModeIndex>& modes, const std::string& path);

void write_report(const nlohmann::json& report, const std::string& path);

// Init data: {"n,l,m": [re, im], ...}. Admissibility is enforced here; the
// reality flag is set when the data is conjugation symmetric.
SpectralState parse_init(const std::string& text);
SpectralState read_init(const std::string& path);
nlohmann::json init_to_json(const SpectralState& state);

// Round-trip-exact decimal form of a double.
std::string format_double(double x);

}  // namespace sboltz
