#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace pohozaev {

// Area of the unit sphere in R^N (2 for N = 1).
double sphere_area(int dim);
double ball_volume(int dim, double radius);

// Radial nodes 0 = r_0 < ... < r_M = R. Weights are the exact integrals of the
// hat functions against omega_N r^{N-1} dr, so they sum to |B_R|.
struct RadialGrid {
    int dim = 1;
    std::vector<double> radii;
    std::vector<double> weights;

    static RadialGrid uniform(int dim, double radius, std::size_t cells);
    static RadialGrid from_radii(int dim, std::vector<double> radii);

    std::size_t size() const { return radii.size(); }
    double extent() const { return radii.back(); }
    // Volume of the shell between r_j and r_{j+1}.
    double shell_volume(std::size_t j) const;

    bool operator==(const RadialGrid&) const = default;
};

// Periodic box, nodes x_j = (j - n/2) h on every axis, row-major storage
// with the last axis fastest.
struct BoxGrid {
    int dim = 1;
    std::vector<std::size_t> points;
    std::vector<double> spacing;
    bool periodic = true;

    static BoxGrid cube(int dim, double half_width, std::size_t n);

    std::size_t size() const;
    double cell_volume() const;
    double coordinate(int axis, std::size_t j) const {
        return (static_cast<double>(j) - static_cast<double>(points[axis] / 2)) * spacing[axis];
    }
    double half_width(int axis) const { return 0.5 * static_cast<double>(points[axis]) * spacing[axis]; }
    std::vector<std::size_t> strides() const;
    // Squared distance of node `flat` from the center node.
    double distance2(std::size_t flat) const;

    bool operator==(const BoxGrid&) const = default;
};

using Grid = std::variant<RadialGrid, BoxGrid>;

int grid_dim(const Grid& grid);
std::size_t grid_size(const Grid& grid);
// Quadrature weight of every node.
std::vector<double> node_weights(const Grid& grid);
double grid_volume(const Grid& grid);

struct GridFunction {
    Grid grid;
    std::vector<double> values;
    bool monotone = false;

    GridFunction() = default;
    GridFunction(Grid g, std::vector<double> v, bool mono = false)
        : grid(std::move(g)), values(std::move(v)), monotone(mono) {}

    const RadialGrid* radial() const { return std::get_if<RadialGrid>(&grid); }
    const BoxGrid* box() const { return std::get_if<BoxGrid>(&grid); }
    int dim() const { return grid_dim(grid); }
    std::size_t size() const { return values.size(); }

    bool operator==(const GridFunction&) const = default;
};

GridFunction zeros(const Grid& grid);

// Samples g(|x|) on the grid.
template <class F>
GridFunction sample_radial(const Grid& grid, F&& g) {
    GridFunction u = zeros(grid);
    if (const auto* rg = std::get_if<RadialGrid>(&grid)) {
        for (std::size_t j = 0; j < rg->size(); ++j) u.values[j] = g(rg->radii[j]);
    } else {
        const auto& bg = std::get<BoxGrid>(grid);
        for (std::size_t j = 0; j < u.size(); ++j) u.values[j] = g(std::sqrt(bg.distance2(j)));
    }
    return u;
}

// Nonnegative and nonincreasing in |x|, the discrete form of the radial cone.
bool is_radially_nonincreasing(const GridFunction& u, double tol = 0.0);

double max_abs(const std::vector<double>& v);
bool all_finite(const std::vector<double>& v);

// Header rows (kind, dim, points, ...) then one sample per line. Doubles are
// written in shortest round-trip form, so reading back is bit-exact.
std::string to_csv(const GridFunction& u);
GridFunction from_csv(const std::string& text);
void write_csv(const std::filesystem::path& path, const GridFunction& u);
GridFunction read_csv(const std::filesystem::path& path);

std::string format_double(double x);

}  // namespace pohozaev
