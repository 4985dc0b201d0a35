#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "gammalab/vec.hpp"

namespace gammalab {

/// Uniform grid on the unit box (0,1)^d with n nodes per axis, x_i = i h, h = 1/(n-1).
class Grid {
public:
    Grid(int dimension, std::size_t nodes_per_axis);

    int dimension() const noexcept { return d_; }
    std::size_t n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    std::size_t node_count() const noexcept { return d_ == 1 ? n_ : n_ * n_; }
    std::size_t cell_count() const noexcept { return d_ == 1 ? n_ - 1 : (n_ - 1) * (n_ - 1); }

    /// Linear index of node (i, j); j is ignored in 1D.
    std::size_t index(std::size_t i, std::size_t j = 0) const noexcept { return i + n_ * j; }
    std::size_t ix(std::size_t node) const noexcept { return node % n_; }
    std::size_t iy(std::size_t node) const noexcept { return d_ == 1 ? 0 : node / n_; }

    Vec position(std::size_t node) const noexcept;
    /// Distance to the boundary of the unit box.
    double boundary_distance(std::size_t node) const noexcept;

    bool operator==(const Grid& other) const noexcept { return d_ == other.d_ && n_ == other.n_; }

private:
    int d_;
    std::size_t n_;
    double h_;
};

/// Nodal values of a scalar function on a grid.
struct Field {
    Grid grid;
    std::vector<double> values;

    explicit Field(Grid g) : grid(g), values(g.node_count(), 0.0) {}
    Field(Grid g, std::vector<double> v);

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    bool all_finite() const noexcept;
};

/// Formats a double with 17 significant digits (lossless round trip).
std::string format_double(double value);

/// Writes a field as CSV: header, then one row per node with index per axis,
/// coordinates and value.
void write_field_csv(std::ostream& out, const Field& field);
void write_field_csv(const std::string& path, const Field& field);

/// Reads a field written by write_field_csv. Throws InvalidInput on malformed data.
Field read_field_csv(std::istream& in);
Field read_field_csv(const std::string& path);

}  // namespace gammalab
