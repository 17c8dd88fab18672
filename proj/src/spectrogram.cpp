#include "lafano/spectrogram.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lafano/errors.hpp"

namespace lafano {

namespace {

void check_ascending(std::span<const double> axis, const std::string& name) {
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1]))
            throw SchemaError(name + " axis is not strictly ascending at index " + std::to_string(i));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
    std::string s = text;
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && s[start] == ' ') ++start;
    double v = 0.0;
    const char* first = s.data() + start;
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last)
        throw SchemaError("line " + std::to_string(line_no) + ": cannot parse number '" + text + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void Spectrogram::validate() const {
    check_ascending(energies_eV, "energy");
    check_ascending(delays_fs, "delay");
    if (values.size() != energies_eV.size() * delays_fs.size())
        throw SchemaError("spectrogram: value count does not match axes");
    for (double v : values)
        if (!std::isfinite(v) || v < 0.0) throw SchemaError("spectrogram: values must be finite and >= 0");
}

void write_matrix_csv(const std::filesystem::path& path, const LabelledMatrix& m) {
    if (m.values.size() != m.columns.size() * m.rows.size())
        throw InvalidArgument("write_matrix_csv: value count does not match axes");
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "# " << m.title << '\n';
    out << m.column_label;
    for (double c : m.columns) out << ',' << format_double(c);
    out << '\n' << m.row_label;
    for (double r : m.rows) out << ',' << format_double(r);
    out << '\n';
    const std::size_t nc = m.columns.size();
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            if (j) out << ',';
            out << format_double(m.values[i * nc + j]);
        }
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

LabelledMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    LabelledMatrix m;
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw SchemaError("line " + std::to_string(line_no + 1) + ": missing " + what);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line("title line");
    if (line.rfind("# ", 0) != 0) throw SchemaError("line 1: expected '# <title>'");
    m.title = line.substr(2);

    auto read_axis = [&](std::string& label, std::vector<double>& axis, const char* what) {
        next_line(what);
        const auto cells = split_csv(line);
        if (cells.empty()) throw SchemaError("line " + std::to_string(line_no) + ": empty axis row");
        label = cells[0];
        for (std::size_t i = 1; i < cells.size(); ++i) axis.push_back(parse_number(cells[i], line_no));
        for (std::size_t i = 1; i < axis.size(); ++i)
            if (!(axis[i] > axis[i - 1]))
                throw SchemaError("line " + std::to_string(line_no) + ": " + label +
                                  " axis is not strictly ascending at entry " + std::to_string(i));
    };
    read_axis(m.column_label, m.columns, "column axis");
    read_axis(m.row_label, m.rows, "row axis");

    m.values.reserve(m.rows.size() * m.columns.size());
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        next_line("data row");
        const auto cells = split_csv(line);
        if (cells.size() != m.columns.size())
            throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(m.columns.size()) +
                              " values, found " + std::to_string(cells.size()));
        for (const auto& c : cells) m.values.push_back(parse_number(c, line_no));
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line != "\r") throw SchemaError("line " + std::to_string(line_no) + ": trailing data");
    }
    return m;
}

void write_spectrogram(const std::filesystem::path& path, const Spectrogram& s) {
    s.validate();
    LabelledMatrix m{"lafano spectrogram v1 (P per eV)", "energy_eV", "delay_fs", s.energies_eV, s.delays_fs, s.values};
    write_matrix_csv(path, m);
    std::ofstream side(path.string() + ".json");
    if (!side) throw Error("cannot write sidecar for " + path.string());
    side << s.metadata.dump(2) << '\n';
}

IngestReport ingest_spectrogram(const std::filesystem::path& path) {
    auto m = read_matrix_csv(path);
    if (m.column_label != "energy_eV") throw SchemaError("line 2: expected column axis 'energy_eV'");
    if (m.row_label != "delay_fs") throw SchemaError("line 3: expected row axis 'delay_fs'");
    IngestReport rep;
    auto& s = rep.spectrogram;
    s.energies_eV = std::move(m.columns);
    s.delays_fs = std::move(m.rows);
    s.values = std::move(m.values);
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        const double v = s.values[k];
        if (!std::isfinite(v))
            throw SchemaError("line " + std::to_string(4 + k / std::max<std::size_t>(1, s.energies_eV.size())) +
                              ": non-finite value");
        if (v < 0.0) {
            s.values[k] = 0.0;
            ++rep.clipped_negative;
        }
    }
    const std::filesystem::path side = path.string() + ".json";
    if (std::filesystem::exists(side)) {
        std::ifstream in(side);
        try {
            s.metadata = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(side.string() + ": " + e.what());
        }
    }
    return rep;
}

}  // namespace lafano
