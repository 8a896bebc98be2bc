#include "cellpol/core_types.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cellpol {

void Params::validate(std::optional<std::size_t> boundary_nodes) const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    require(std::isfinite(D) && D > 0.0, "D must be > 0");
    require(std::isfinite(chi) && chi >= 0.0, "chi must be >= 0");
    require(std::isfinite(k_on) && k_on >= 0.0, "k_on must be >= 0");
    require(std::isfinite(k_off) && k_off > 0.0, "k_off must be > 0");
    require(!S.empty(), "S must have at least one entry");
    for (double s : S) require(std::isfinite(s) && s >= 0.0, "S must be >= 0");
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
    require(std::isfinite(r) && r > 0.0, "r must be > 0");
    require(std::isfinite(M) && M > 0.0, "M must be > 0");
    if (boundary_nodes && S.size() != 1 && S.size() != *boundary_nodes) {
        throw std::invalid_argument("S array length " + std::to_string(S.size()) +
                                    " does not match N_y = " + std::to_string(*boundary_nodes));
    }
}

Grid1D::Grid1D(Grid1DKind kind, std::size_t nx, double length)
    : kind_(kind), nx_(nx), length_(length), dx_(length / static_cast<double>(nx)) {
    if (nx < 3) throw std::invalid_argument("Grid1D needs at least 3 cells");
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw std::invalid_argument("Grid1D length must be > 0");
    }
}

Grid1D Grid1D::periodic(std::size_t nx, double length) {
    return Grid1D(Grid1DKind::Periodic, nx, length);
}

Grid1D Grid1D::half_line(std::size_t nx, double length) {
    return Grid1D(Grid1DKind::HalfLine, nx, length);
}

double Grid1D::center(std::size_t i) const {
    const double shift = kind_ == Grid1DKind::Periodic ? 1.0 : 0.5;
    return (static_cast<double>(i) + shift) * dx_;
}

Grid2D::Grid2D(std::size_t nx, std::size_t ny, double dx, double dy)
    : nx_(nx), ny_(ny), dx_(dx), dy_(dy) {}

Grid2D Grid2D::with_spacing(std::size_t nx, std::size_t ny, double dx, double dy) {
    if (nx < 2) throw std::invalid_argument("Grid2D needs N_x >= 2");
    if (ny < 3) throw std::invalid_argument("Grid2D needs N_y >= 3 (periodic direction)");
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
        throw std::invalid_argument("Grid2D spacings must be > 0");
    }
    return Grid2D(nx, ny, dx, dy);
}

Grid2D build_grid_2d(double r, std::size_t nx, std::size_t ny) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("r must be > 0");
    if (nx < 3 || ny < 3) throw std::invalid_argument("N_x and N_y must be >= 3");
    return Grid2D::with_spacing(nx, ny, r / static_cast<double>(nx),
                                2.0 * kPi * r / static_cast<double>(ny));
}

std::size_t flatten_index(std::size_t j, std::size_t k, std::size_t ny) {
    if (ny == 0 || j < 1 || k < 1 || k > ny) {
        throw std::out_of_range("flatten_index: (j, k) outside 1-based grid");
    }
    return k + (j - 1) * ny;
}

std::size_t flatten_index(std::size_t j, std::size_t k, std::size_t nx, std::size_t ny) {
    if (j > nx) throw std::out_of_range("flatten_index: j > N_x");
    return flatten_index(j, k, ny);
}

namespace {

double boundary_share(const Params& params, double bulk_measure, double boundary_measure,
                      const InitialSplit& split) {
    if (split.boundary_fraction) {
        const double f = *split.boundary_fraction;
        if (!(f >= 0.0 && f <= 1.0)) {
            throw std::invalid_argument("boundary_fraction must be in [0, 1]");
        }
        return f;
    }
    const double ratio = params.k_on / params.k_off;
    return ratio * boundary_measure / (bulk_measure + ratio * boundary_measure);
}

void check_eps(double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in [0, 1)");
}

// Rescales rho and mu by one common factor so that the discrete mass is M.
void normalise(SimState& state, double cell_measure, double node_measure, double M) {
    double mass = 0.0;
    for (double v : state.rho) mass += v * cell_measure;
    for (double v : state.mu) mass += v * node_measure;
    if (mass <= 0.0) return;
    const double factor = M / mass;
    for (double& v : state.rho) v *= factor;
    for (double& v : state.mu) v *= factor;
}

}  // namespace

SimState seeded_random_initial(const Grid2D& grid, const Params& params, double eps,
                               std::uint64_t seed, InitialSplit split) {
    check_eps(eps);
    params.validate(grid.ny());
    const double area = grid.width() * grid.circumference();
    const double perimeter = grid.circumference();
    const double f = boundary_share(params, area, perimeter, split);
    const double rho_bar = (1.0 - f) * params.M / area;
    const double mu_bar = f * params.M / perimeter;

    Rng rng(seed);
    SimState state;
    state.rho.resize(grid.cells());
    state.mu.resize(grid.ny());
    for (double& v : state.rho) v = rho_bar * (1.0 + eps * rng.symmetric());
    for (double& v : state.mu) v = mu_bar * (1.0 + eps * rng.symmetric());
    state.c.assign(grid.cells(), 0.0);
    normalise(state, grid.cell_area(), grid.dy(), params.M);
    return state;
}

SimState seeded_random_initial(const Grid1D& grid, const Params& params, double eps,
                               std::uint64_t seed, InitialSplit split) {
    check_eps(eps);
    params.validate();
    const double f = boundary_share(params, grid.length(), 1.0, split);
    const double rho_bar = (1.0 - f) * params.M / grid.length();
    const double mu_bar = f * params.M;

    Rng rng(seed);
    SimState state;
    state.rho.resize(grid.nx());
    for (double& v : state.rho) v = rho_bar * (1.0 + eps * rng.symmetric());
    state.mu = {mu_bar * (1.0 + eps * rng.symmetric())};
    normalise(state, grid.dx(), 1.0, params.M);
    return state;
}

std::vector<double> exponential_profile(const Grid1D& grid, double mass, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("rate must be > 0");
    std::vector<double> rho(grid.nx());
    const double dx = grid.dx();
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double a = static_cast<double>(i) * dx;
        rho[i] = (std::exp(-rate * a) - std::exp(-rate * (a + dx))) / dx;
    }
    const double total = std::accumulate(rho.begin(), rho.end(), 0.0) * dx;
    for (double& v : rho) v *= mass / total;
    return rho;
}

}  // namespace cellpol
