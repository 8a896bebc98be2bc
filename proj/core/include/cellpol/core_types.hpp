#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cellpol {

inline constexpr double kPi = 3.14159265358979323846;

/**
 * Physical constants of the polarisation models.
 *
 * S is either a constant (one entry) or one value per boundary node.
 */
struct Params {
    double D{1.0};        ///< diffusion coefficient
    double chi{1.0};      ///< advection strength
    double k_on{1.0};     ///< attachment rate
    double k_off{1.0};    ///< detachment rate
    std::vector<double> S{1.0};
    double alpha{0.1};    ///< potential degradation rate
    double r{1.0};        ///< domain radius
    double M{1.0};        ///< total mass

    double S_at(std::size_t k) const { return S.size() == 1 ? S.front() : S.at(k); }
    bool S_is_constant() const { return S.size() == 1; }

    /// Throws std::invalid_argument on a violated sign constraint. If
    /// boundary_nodes is given and S is an array, its length must match.
    void validate(std::optional<std::size_t> boundary_nodes = std::nullopt) const;
};

enum class Grid1DKind { Periodic, HalfLine };

/// Uniform 1D grid; periodic on [0, length) or the truncated half-line [0, length].
class Grid1D {
public:
    static Grid1D periodic(std::size_t nx, double length = 1.0);
    static Grid1D half_line(std::size_t nx, double length);

    Grid1DKind kind() const { return kind_; }
    std::size_t nx() const { return nx_; }
    double dx() const { return dx_; }
    double length() const { return length_; }

    /// Cell center of 0-based cell i: (i+1)*dx on the periodic grid,
    /// (i+1/2)*dx on the half-line so that cells tile [0, L].
    double center(std::size_t i) const;

private:
    Grid1D(Grid1DKind kind, std::size_t nx, double length);

    Grid1DKind kind_;
    std::size_t nx_;
    double length_;
    double dx_;
};

/**
 * Bounded x periodic grid [0, nx*dx] x R/(ny*dy)Z.
 *
 * Storage is row-major in x: cell (j, k), 0-based, lives at k + j*ny.
 * The active boundary is the last row j = nx-1.
 */
class Grid2D {
public:
    /// Cell counts with spacings set directly (no relation to a radius).
    static Grid2D with_spacing(std::size_t nx, std::size_t ny, double dx, double dy);

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t cells() const { return nx_ * ny_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    double width() const { return dx_ * static_cast<double>(nx_); }
    double circumference() const { return dy_ * static_cast<double>(ny_); }
    double cell_area() const { return dx_ * dy_; }

    std::size_t index(std::size_t j, std::size_t k) const { return k + j * ny_; }
    double x_center(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dx_; }
    double y_node(std::size_t k) const { return static_cast<double>(k + 1) * dy_; }

private:
    Grid2D(std::size_t nx, std::size_t ny, double dx, double dy);

    std::size_t nx_;
    std::size_t ny_;
    double dx_;
    double dy_;
};

/// Domain [0,r] x R/2*pi*r*Z with dx = r/nx, dy = 2*pi*r/ny.
Grid2D build_grid_2d(double r, std::size_t nx, std::size_t ny);

/// 1-based linear index k + (j-1)*ny of cell (j, k).
std::size_t flatten_index(std::size_t j, std::size_t k, std::size_t ny);
std::size_t flatten_index(std::size_t j, std::size_t k, std::size_t nx, std::size_t ny);

/**
 * Complete state of a simulation.
 *
 * mu has one entry per boundary node in 2D, a single entry for the 1D
 * exchange model and is empty for models without boundary exchange.
 * c is only populated by the 2D model.
 */
struct SimState {
    std::vector<double> rho;
    std::vector<double> mu;
    std::vector<double> c;
    double t{0.0};
    std::uint64_t step{0};
};

/**
 * Deterministic uniform generator: std::mt19937_64 with the top 53 bits mapped
 * to [0, 1). The integer engine is fully specified by the standard, so the
 * stream is identical on every conforming platform.
 */
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64/53-bit";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform on [-1, 1).
    double symmetric() { return 2.0 * uniform01() - 1.0; }

private:
    std::mt19937_64 engine_;
};

/// How initial mass is split between the bulk and the boundary.
struct InitialSplit {
    /// Fraction of M placed on the boundary. Unset means exchange equilibrium
    /// mu_bar = (k_on/k_off) * rho_bar.
    std::optional<double> boundary_fraction;
};

/// Randomly perturbed near-uniform state on the 2D grid with total mass exactly M.
SimState seeded_random_initial(const Grid2D& grid, const Params& params, double eps,
                               std::uint64_t seed, InitialSplit split = {});

/// Same construction for the 1D exchange model on the half-line (scalar mu).
SimState seeded_random_initial(const Grid1D& grid, const Params& params, double eps,
                               std::uint64_t seed, InitialSplit split = {});

/// Cell averages of M * a * exp(-a x) on the half-line, renormalised so that sum(rho)*dx = M.
std::vector<double> exponential_profile(const Grid1D& grid, double mass, double rate = 1.0);

}  // namespace cellpol
