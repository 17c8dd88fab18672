#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lafano {

/// Photoelectron probability density P(E, tau) on an energy x delay grid.
/// Energies in eV, delays in fs, values per eV, stored delay-major:
/// value(it, ie) = values[it * energies.size() + ie].
struct Spectrogram {
    std::vector<double> energies_eV;
    std::vector<double> delays_fs;
    std::vector<double> values;
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t n_energies() const noexcept { return energies_eV.size(); }
    std::size_t n_delays() const noexcept { return delays_fs.size(); }
    double& at(std::size_t it, std::size_t ie) { return values[it * energies_eV.size() + ie]; }
    double at(std::size_t it, std::size_t ie) const { return values[it * energies_eV.size() + ie]; }
    std::span<const double> row(std::size_t it) const {
        return {values.data() + it * energies_eV.size(), energies_eV.size()};
    }

    /// Axes strictly ascending, sizes consistent, values finite and >= 0.
    void validate() const;
};

/// A labelled matrix on (delay rows) x (column axis) used for every CSV
/// matrix the tools write. The CSV layout is, line by line:
///   # <title>
///   <column_label>,c0,c1,...
///   <row_label>,r0,r1,...
///   v(r0,c0),v(r0,c1),...        one line per row
/// Numbers use the shortest round-trip representation.
struct LabelledMatrix {
    std::string title;
    std::string column_label;
    std::string row_label;
    std::vector<double> columns;
    std::vector<double> rows;
    std::vector<double> values;  // row-major
};

void write_matrix_csv(const std::filesystem::path& path, const LabelledMatrix& m);
/// Throws SchemaError naming the line on malformed input.
LabelledMatrix read_matrix_csv(const std::filesystem::path& path);

/// Spectrogram CSV (column axis energy_eV, row axis delay_fs) plus a sidecar
/// "<path>.json" holding the metadata.
void write_spectrogram(const std::filesystem::path& path, const Spectrogram& s);

struct IngestReport {
    Spectrogram spectrogram;
    std::size_t clipped_negative = 0;  // entries coerced to 0
};

/// Reads a spectrogram CSV (and sidecar if present). Axes must be strictly
/// ascending; negative values are clipped to zero and counted.
IngestReport ingest_spectrogram(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace lafano
