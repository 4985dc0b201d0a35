#include "gammalab/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gammalab/error.hpp"

namespace gammalab {

Grid::Grid(int dimension, std::size_t nodes_per_axis) : d_(dimension), n_(nodes_per_axis) {
    if (d_ != 1 && d_ != 2) throw InvalidParameter("grid dimension must be 1 or 2");
    if (n_ < 3) throw InvalidParameter("grid needs at least 3 nodes per axis");
    h_ = 1.0 / static_cast<double>(n_ - 1);
}

Vec Grid::position(std::size_t node) const noexcept {
    return {static_cast<double>(ix(node)) * h_, d_ == 1 ? 0.0 : static_cast<double>(iy(node)) * h_};
}

double Grid::boundary_distance(std::size_t node) const noexcept {
    // Lattice distances are computed from integer offsets so that nodes at i h and
    // (n-1-i) h are treated symmetrically.
    auto axis = [this](std::size_t i) { return static_cast<double>(std::min(i, n_ - 1 - i)) * h_; };
    double dist = axis(ix(node));
    if (d_ == 2) dist = std::min(dist, axis(iy(node)));
    return dist;
}

Field::Field(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.node_count())
        throw InvalidInput("field has " + std::to_string(values.size()) + " values for " +
                           std::to_string(grid.node_count()) + " nodes");
}

bool Field::all_finite() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

void write_field_csv(std::ostream& out, const Field& field) {
    const Grid& g = field.grid;
    out << (g.dimension() == 1 ? "i,x,value\n" : "i,j,x,y,value\n");
    for (std::size_t node = 0; node < field.size(); ++node) {
        const Vec x = g.position(node);
        if (g.dimension() == 1) {
            out << g.ix(node) << ',' << format_double(x[0]) << ',' << format_double(field[node]) << '\n';
        } else {
            out << g.ix(node) << ',' << g.iy(node) << ',' << format_double(x[0]) << ',' << format_double(x[1])
                << ',' << format_double(field[node]) << '\n';
        }
    }
}

void write_field_csv(const std::string& path, const Field& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write field file '" + path + "'");
    write_field_csv(out, field);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

double parse_number(const std::string& text, std::size_t line) {
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size())
        throw InvalidInput("field CSV line " + std::to_string(line) + ": bad number '" + text + "'");
    return value;
}

}  // namespace

Field read_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("field CSV is empty");
    int d = 0;
    if (line == "i,x,value") d = 1;
    else if (line == "i,j,x,y,value") d = 2;
    else throw InvalidInput("field CSV has unexpected header '" + line + "'");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != static_cast<std::size_t>(2 * d + 1))
            throw InvalidInput("field CSV line " + std::to_string(lineno) + ": wrong column count");
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(parse_number(c, lineno));
        rows.push_back(std::move(row));
    }
    const std::size_t count = rows.size();
    const auto n = d == 1 ? count : static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
    if (n < 3 || (d == 2 && n * n != count)) throw InvalidInput("field CSV row count does not form a grid");
    Field field(Grid(d, n));
    for (const auto& row : rows) {
        const auto i = static_cast<std::size_t>(row[0]);
        const auto j = d == 2 ? static_cast<std::size_t>(row[1]) : 0;
        if (i >= n || j >= n) throw InvalidInput("field CSV index out of range");
        field[field.grid.index(i, j)] = row.back();
    }
    return field;
}

Field read_field_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read field file '" + path + "'");
    return read_field_csv(in);
}

}  // namespace gammalab
